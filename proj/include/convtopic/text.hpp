#ifndef CONVTOPIC_TEXT_HPP
#define CONVTOPIC_TEXT_HPP

#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace convtopic {

using WordSet = std::unordered_set<std::string>;

std::string to_lower(std::string_view s);
std::string_view trim(std::string_view s);
std::vector<std::string> split_lines(std::string_view text);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// True for bytes that may appear inside a token. Non-ASCII bytes count as
/// word characters so UTF-8 letters are never split.
inline bool is_word_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
         (c >= 'A' && c <= 'Z') || c >= 0x80;
}

/// Maximal runs of word bytes, in order.
std::vector<std::string> word_substrings(std::string_view text);

/// One entry per line; blank lines and lines starting with '#' are skipped.
/// Entries are trimmed and lowercased.
std::vector<std::string> parse_word_list(std::string_view content);
std::vector<std::string> read_word_list_file(const std::string& path);
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

const WordSet& default_stopwords();
const WordSet& default_abbreviations();
const std::vector<std::string>& default_cue_words();

}  // namespace convtopic

#endif  // CONVTOPIC_TEXT_HPP
