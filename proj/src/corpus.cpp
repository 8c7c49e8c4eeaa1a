#include "convtopic/corpus.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include <json.hpp>

#include "convtopic/error.hpp"
#include "convtopic/porter.hpp"

namespace convtopic {

using nlohmann::json;

std::vector<LineRun> Comment::runs() const {
  std::vector<LineRun> out;
  bool paragraph_break = false;
  for (const auto& line : lines) {
    if (line.text.empty()) {
      paragraph_break = true;
      continue;
    }
    if (out.empty() || out.back().depth != line.depth) {
      out.push_back(LineRun{line.depth, {line.text}});
    } else if (paragraph_break) {
      out.back().paragraphs.push_back(line.text);
    } else {
      out.back().paragraphs.back() += ' ';
      out.back().paragraphs.back() += line.text;
    }
    paragraph_break = false;
  }
  return out;
}

bool Comment::has_quotation() const {
  return std::any_of(lines.begin(), lines.end(), [](const QuotedLine& l) { return l.depth > 0 && !l.text.empty(); });
}

int Conversation::comment_index(std::string_view comment_id) const {
  for (std::size_t i = 0; i < comments.size(); ++i)
    if (comments[i].id == comment_id) return static_cast<int>(i);
  return -1;
}

int Conversation::parent_index(int index) const {
  const auto& parent = comments.at(index).parent_id;
  return parent ? comment_index(*parent) : -1;
}

// ---------------------------------------------------------------------------
// Sentences and tokens

namespace {

bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }
bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']' || c == '}'; }
bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

// Lowercased whitespace-delimited token ending at `end` (inclusive), with
// leading brackets and quotes dropped.
std::string token_before(std::string_view text, std::size_t end) {
  std::size_t start = end;
  while (start > 0 && !is_space(text[start - 1])) --start;
  while (start < end && (text[start] == '(' || text[start] == '"' || text[start] == '\'' || text[start] == '['))
    ++start;
  return to_lower(text.substr(start, end - start + 1));
}

}  // namespace

std::vector<std::string> split_sentences(std::string_view body, const WordSet& abbreviations) {
  std::vector<std::string> out;
  std::size_t start = 0;
  std::size_t i = 0;
  auto emit = [&](std::size_t end) {
    auto s = trim(body.substr(start, end - start));
    if (!s.empty()) out.emplace_back(s);
    start = end;
  };
  while (i < body.size()) {
    if (!is_terminal(body[i])) {
      ++i;
      continue;
    }
    const std::size_t punct = i;
    std::size_t j = i;
    while (j < body.size() && is_terminal(body[j])) ++j;
    while (j < body.size() && is_closer(body[j])) ++j;
    const bool at_break = j == body.size() || is_space(body[j]);
    if (at_break && body[punct] == '.' && j == punct + 1 && abbreviations.count(token_before(body, punct))) {
      i = j;
      continue;
    }
    if (at_break) emit(j);
    i = j;
  }
  emit(body.size());
  return out;
}

std::vector<std::string> split_sentences(std::string_view body) {
  return split_sentences(body, default_abbreviations());
}

namespace {

std::vector<Token> make_tokens(std::string_view sentence, const WordSet& stopwords, const Tagger& tagger) {
  const auto surfaces = word_substrings(sentence);
  const auto tags = tagger.tag(surfaces);
  std::vector<Token> tokens;
  tokens.reserve(surfaces.size());
  for (std::size_t i = 0; i < surfaces.size(); ++i) {
    Token t;
    t.surface = surfaces[i];
    const std::string lower = to_lower(t.surface);
    t.stem = porter_stem(lower);
    t.is_stopword = stopwords.count(lower) > 0;
    t.pos = t.is_stopword ? Pos::Other : tags[i];
    tokens.push_back(std::move(t));
  }
  return tokens;
}

}  // namespace

std::vector<Token> tokenize(std::string_view sentence, const WordSet& stopwords) {
  return make_tokens(sentence, stopwords, *default_tagger());
}

TextProcessor::TextProcessor()
    : stopwords_(default_stopwords()), abbreviations_(default_abbreviations()), tagger_(default_tagger()) {}

TextProcessor::TextProcessor(WordSet stopwords, WordSet abbreviations, std::shared_ptr<const Tagger> tagger)
    : stopwords_(std::move(stopwords)), abbreviations_(std::move(abbreviations)), tagger_(std::move(tagger)) {
  if (!tagger_) tagger_ = default_tagger();
}

std::vector<std::string> TextProcessor::split_sentences(std::string_view body) const {
  return convtopic::split_sentences(body, abbreviations_);
}

std::vector<Token> TextProcessor::tokenize(std::string_view sentence) const {
  return make_tokens(sentence, stopwords_, *tagger_);
}

std::vector<Token> TextProcessor::tokenize(std::string_view sentence, const Tagger& tagger) const {
  return make_tokens(sentence, stopwords_, tagger);
}

QuotedLine parse_quoted_line(std::string_view raw) {
  std::size_t i = 0;
  int depth = 0;
  while (i < raw.size()) {
    if (raw[i] == '>') {
      ++depth;
      ++i;
    } else if (raw[i] == ' ' || raw[i] == '\t') {
      ++i;
    } else {
      break;
    }
  }
  return QuotedLine{std::string(trim(raw.substr(i))), depth};
}

// ---------------------------------------------------------------------------
// Conversation records

namespace {

std::string describe(std::size_t index, const json& c) {
  std::string out = "comment #" + std::to_string(index);
  if (c.is_object() && c.contains("id") && c["id"].is_string()) out += " (id '" + c["id"].get<std::string>() + "')";
  return out;
}

std::string optional_string(const json& c, const char* key, std::size_t index) {
  if (!c.contains(key) || c[key].is_null()) return {};
  if (!c[key].is_string()) throw ParseError(describe(index, c) + ": field '" + key + "' must be a string");
  return c[key].get<std::string>();
}

Comment parse_comment(const json& c, std::size_t index) {
  if (!c.is_object()) throw ParseError(describe(index, c) + ": not an object");
  if (!c.contains("id") || !c["id"].is_string()) throw ParseError(describe(index, c) + ": missing string 'id'");
  if (!c.contains("body") || !c["body"].is_string()) throw ParseError(describe(index, c) + ": missing string 'body'");
  Comment out;
  out.id = c["id"].get<std::string>();
  if (out.id.empty()) throw ParseError(describe(index, c) + ": empty id");
  if (c.contains("parent_id") && !c["parent_id"].is_null()) {
    if (!c["parent_id"].is_string()) throw ParseError(describe(index, c) + ": 'parent_id' must be a string or null");
    out.parent_id = c["parent_id"].get<std::string>();
  }
  out.author = optional_string(c, "author", index);
  out.title = optional_string(c, "title", index);
  if (c.contains("timestamp") && !c["timestamp"].is_null()) {
    if (!c["timestamp"].is_number_integer()) throw ParseError(describe(index, c) + ": 'timestamp' must be an integer");
    out.timestamp = c["timestamp"].get<std::int64_t>();
  }
  for (const auto& raw : split_lines(c["body"].get<std::string>())) out.lines.push_back(parse_quoted_line(raw));
  // Trailing blank lines carry no structure and would not survive a round trip.
  while (!out.lines.empty() && out.lines.back().text.empty()) out.lines.pop_back();
  return out;
}

}  // namespace

Conversation parse_conversation(std::string_view document, const TextProcessor& text) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("conversation is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("conversation must be a JSON object");
  if (!doc.contains("id") || !doc["id"].is_string()) throw ParseError("conversation: missing string 'id'");
  if (!doc.contains("comments") || !doc["comments"].is_array())
    throw ParseError("conversation '" + doc["id"].get<std::string>() + "': missing array 'comments'");

  Conversation conv;
  conv.id = doc["id"].get<std::string>();
  const auto& raw_comments = doc["comments"];
  for (std::size_t i = 0; i < raw_comments.size(); ++i) conv.comments.push_back(parse_comment(raw_comments[i], i));

  if (doc.contains("pos_tags") && !doc["pos_tags"].is_null()) {
    if (!doc["pos_tags"].is_object()) throw ParseError("conversation: 'pos_tags' must be an object");
    for (const auto& [word, tag] : doc["pos_tags"].items()) {
      if (!tag.is_string()) throw ParseError("conversation: POS tag for '" + word + "' must be a string");
      conv.pos_tags[to_lower(word)] = parse_pos(tag.get<std::string>());
    }
  }

  // Temporal order: by timestamp when every comment has one, else document order.
  const bool all_timed = std::all_of(conv.comments.begin(), conv.comments.end(),
                                     [](const Comment& c) { return c.timestamp.has_value(); });
  if (all_timed) {
    std::stable_sort(conv.comments.begin(), conv.comments.end(),
                     [](const Comment& a, const Comment& b) { return *a.timestamp < *b.timestamp; });
  }

  std::set<std::string> seen;
  for (const auto& c : conv.comments) {
    if (!seen.insert(c.id).second) throw StructuralError("duplicate comment id '" + c.id + "'");
  }
  for (std::size_t i = 0; i < conv.comments.size(); ++i) {
    const auto& c = conv.comments[i];
    if (!c.parent_id) continue;
    const int p = conv.comment_index(*c.parent_id);
    if (p < 0) throw StructuralError("comment '" + c.id + "' replies to unknown comment '" + *c.parent_id + "'");
    if (p >= static_cast<int>(i))
      throw StructuralError("comment '" + c.id + "' replies to later comment '" + *c.parent_id + "'");
  }

  std::shared_ptr<const Tagger> override_tagger;
  if (!conv.pos_tags.empty()) override_tagger = std::make_shared<OverrideTagger>(conv.pos_tags, text.tagger_ptr());
  const Tagger& tagger = override_tagger ? *override_tagger : text.tagger();

  for (std::size_t ci = 0; ci < conv.comments.size(); ++ci) {
    auto& comment = conv.comments[ci];
    const auto runs = comment.runs();
    for (std::size_t r = 0; r < runs.size(); ++r) {
      if (runs[r].depth != 0) continue;
      for (const auto& paragraph : runs[r].paragraphs) {
        for (auto& sentence_text : text.split_sentences(paragraph)) {
          Sentence s;
          s.id = static_cast<int>(conv.sentences.size());
          s.comment_id = comment.id;
          s.comment_index = static_cast<int>(ci);
          s.run_index = static_cast<int>(r);
          s.tokens = text.tokenize(sentence_text, tagger);
          s.text = std::move(sentence_text);
          comment.sentence_ids.push_back(s.id);
          conv.sentences.push_back(std::move(s));
        }
      }
    }
  }
  return conv;
}

Conversation load_conversation(const std::string& path, const TextProcessor& text) {
  return parse_conversation(read_file(path), text);
}

std::string conversation_to_record(const Conversation& conversation) {
  json doc;
  doc["id"] = conversation.id;
  json comments = json::array();
  for (const auto& c : conversation.comments) {
    json jc;
    jc["id"] = c.id;
    jc["parent_id"] = c.parent_id ? json(*c.parent_id) : json(nullptr);
    jc["author"] = c.author;
    jc["title"] = c.title;
    jc["timestamp"] = c.timestamp ? json(*c.timestamp) : json(nullptr);
    std::vector<std::string> body;
    for (const auto& line : c.lines) {
      if (line.depth == 0) {
        body.push_back(line.text);
      } else {
        std::string prefix(static_cast<std::size_t>(line.depth), '>');
        body.push_back(line.text.empty() ? prefix : prefix + " " + line.text);
      }
    }
    jc["body"] = join(body, "\n");
    comments.push_back(std::move(jc));
  }
  doc["comments"] = std::move(comments);
  if (!conversation.pos_tags.empty()) {
    json tags = json::object();
    for (const auto& [word, pos] : conversation.pos_tags) tags[word] = std::string(pos_name(pos));
    doc["pos_tags"] = std::move(tags);
  }
  return doc.dump(2);
}

std::string conversation_to_normalized_json(const Conversation& conversation) {
  json doc;
  doc["id"] = conversation.id;
  json comments = json::array();
  for (const auto& c : conversation.comments) {
    json jc;
    jc["id"] = c.id;
    jc["parent_id"] = c.parent_id ? json(*c.parent_id) : json(nullptr);
    jc["author"] = c.author;
    jc["sentence_ids"] = c.sentence_ids;
    json lines = json::array();
    for (const auto& l : c.lines) lines.push_back({{"depth", l.depth}, {"text", l.text}});
    jc["lines"] = std::move(lines);
    comments.push_back(std::move(jc));
  }
  doc["comments"] = std::move(comments);
  json sentences = json::array();
  for (const auto& s : conversation.sentences) {
    json js;
    js["id"] = s.id;
    js["comment_id"] = s.comment_id;
    js["text"] = s.text;
    json tokens = json::array();
    for (const auto& t : s.tokens) {
      tokens.push_back({{"surface", t.surface},
                        {"stem", t.stem},
                        {"pos", std::string(pos_name(t.pos))},
                        {"stopword", t.is_stopword}});
    }
    js["tokens"] = std::move(tokens);
    sentences.push_back(std::move(js));
  }
  doc["sentences"] = std::move(sentences);
  return doc.dump(2);
}

}  // namespace convtopic
