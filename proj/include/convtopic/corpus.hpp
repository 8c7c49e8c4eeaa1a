#ifndef CONVTOPIC_CORPUS_HPP
#define CONVTOPIC_CORPUS_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "convtopic/tagger.hpp"
#include "convtopic/text.hpp"

namespace convtopic {

struct Token {
  std::string surface;
  std::string stem;
  Pos pos = Pos::Other;
  bool is_stopword = false;

  bool operator==(const Token&) const = default;
};

struct QuotedLine {
  std::string text;
  int depth = 0;

  bool operator==(const QuotedLine&) const = default;
};

/// Maximal run of consecutive lines sharing a quotation depth. Blank lines
/// do not break a run; they separate paragraphs inside it.
struct LineRun {
  int depth = 0;
  /// Consecutive non-blank lines joined with single spaces.
  std::vector<std::string> paragraphs;

  std::string text() const { return join(paragraphs, " "); }
};

struct Comment {
  std::string id;
  std::optional<std::string> parent_id;
  std::string author;
  std::string title;
  std::optional<std::int64_t> timestamp;
  std::vector<QuotedLine> lines;
  /// Global ids of the sentences written in this comment (quoted text
  /// produces no sentences).
  std::vector<int> sentence_ids;

  std::vector<LineRun> runs() const;
  bool has_quotation() const;

  bool operator==(const Comment&) const = default;
};

struct Sentence {
  int id = 0;
  std::string comment_id;
  /// Index of the owning comment in Conversation::comments.
  int comment_index = 0;
  /// Index of the new-text run inside the comment this sentence came from.
  int run_index = 0;
  std::string text;
  std::vector<Token> tokens;

  bool operator==(const Sentence&) const = default;
};

/// A parsed thread. Comments are in temporal order and sentence ids are
/// consecutive from 0 in that order.
struct Conversation {
  std::string id;
  std::vector<Comment> comments;
  std::vector<Sentence> sentences;
  /// Externally supplied POS tags (lowercased surface -> tag), if any.
  std::map<std::string, Pos> pos_tags;

  int comment_index(std::string_view comment_id) const;
  const Comment& comment_of(int sentence_id) const {
    return comments.at(sentences.at(sentence_id).comment_index);
  }
  /// Index of the parent comment, or -1.
  int parent_index(int comment_index) const;
  std::size_t size() const { return sentences.size(); }

  bool operator==(const Conversation&) const = default;
};

/// Sentence splitting, tokenization, stemming and tagging with one set of
/// word lists.
class TextProcessor {
 public:
  /// Bundled stopwords, abbreviations and tagger.
  TextProcessor();
  TextProcessor(WordSet stopwords, WordSet abbreviations, std::shared_ptr<const Tagger> tagger);

  std::vector<std::string> split_sentences(std::string_view body) const;
  std::vector<Token> tokenize(std::string_view sentence) const;
  std::vector<Token> tokenize(std::string_view sentence, const Tagger& tagger) const;

  const WordSet& stopwords() const { return stopwords_; }
  const WordSet& abbreviations() const { return abbreviations_; }
  const Tagger& tagger() const { return *tagger_; }
  std::shared_ptr<const Tagger> tagger_ptr() const { return tagger_; }

 private:
  WordSet stopwords_;
  WordSet abbreviations_;
  std::shared_ptr<const Tagger> tagger_;
};

std::vector<std::string> split_sentences(std::string_view body);
std::vector<std::string> split_sentences(std::string_view body, const WordSet& abbreviations);
std::vector<Token> tokenize(std::string_view sentence, const WordSet& stopwords);

/// Leading '>' markers (whitespace between them allowed) -> depth; returns
/// the trimmed remainder.
QuotedLine parse_quoted_line(std::string_view raw);

/// Parses a conversation record (JSON text). Throws ParseError on malformed
/// input and StructuralError on dangling or forward reply links.
Conversation parse_conversation(std::string_view document, const TextProcessor& text = TextProcessor());
Conversation load_conversation(const std::string& path, const TextProcessor& text = TextProcessor());

/// Serializes back to the input record format (bodies rebuilt with '>'
/// prefixes). Parsing the result reproduces the conversation.
std::string conversation_to_record(const Conversation& conversation);

/// Normalized dump with sentences and tokens, for inspection.
std::string conversation_to_normalized_json(const Conversation& conversation);

}  // namespace convtopic

#endif  // CONVTOPIC_CORPUS_HPP
