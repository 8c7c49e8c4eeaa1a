#include "convtopic/text.hpp"

#include <fstream>
#include <sstream>

#include "convtopic/error.hpp"
#include "convtopic/resources.hpp"

namespace convtopic {

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string_view trim(std::string_view s) {
  const char* ws = " \t\r\n\f\v";
  const auto first = s.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(ws);
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.emplace_back(line);
    start = end + 1;
  }
  return lines;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::vector<std::string> word_substrings(std::string_view text) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && !is_word_byte(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t start = i;
    while (i < text.size() && is_word_byte(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) words.emplace_back(text.substr(start, i - start));
  }
  return words;
}

std::vector<std::string> parse_word_list(std::string_view content) {
  std::vector<std::string> out;
  for (const auto& raw : split_lines(content)) {
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    out.push_back(to_lower(line));
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write file: " + path);
  out << content;
}

std::vector<std::string> read_word_list_file(const std::string& path) {
  return parse_word_list(read_file(path));
}

namespace {

WordSet to_set(const std::vector<std::string>& words) { return WordSet(words.begin(), words.end()); }

}  // namespace

const WordSet& default_stopwords() {
  static const WordSet words = to_set(parse_word_list(resources::stopwords()));
  return words;
}

const WordSet& default_abbreviations() {
  static const WordSet words = to_set(parse_word_list(resources::abbreviations()));
  return words;
}

const std::vector<std::string>& default_cue_words() {
  static const std::vector<std::string> words = parse_word_list(resources::cuewords());
  return words;
}

}  // namespace convtopic
