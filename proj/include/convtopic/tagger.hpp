#ifndef CONVTOPIC_TAGGER_HPP
#define CONVTOPIC_TAGGER_HPP

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace convtopic {

enum class Pos { Noun, Adj, Verb, Adv, Other };

std::string_view pos_name(Pos pos);
/// Accepts NOUN/ADJ/VERB/ADV/OTHER (case-insensitive); throws InvalidArgument.
Pos parse_pos(std::string_view name);

/// Coarse part-of-speech tagger over a tokenized sentence.
class Tagger {
 public:
  virtual ~Tagger() = default;
  /// `surfaces` are the original-case tokens of one sentence.
  virtual std::vector<Pos> tag(const std::vector<std::string>& surfaces) const = 0;
};

/// Lexicon lookup with inflection stripping, a determiner context rule,
/// a capitalization rule, suffix rules, and NOUN as the final fallback.
class LexiconTagger : public Tagger {
 public:
  /// Uses the bundled lexicon.
  LexiconTagger();
  explicit LexiconTagger(std::unordered_map<std::string, Pos> lexicon);

  std::vector<Pos> tag(const std::vector<std::string>& surfaces) const override;

  static std::unordered_map<std::string, Pos> parse_lexicon(std::string_view content);

 private:
  Pos tag_word(const std::string& surface, bool sentence_initial) const;
  const Pos* lookup(const std::string& lower) const;

  std::unordered_map<std::string, Pos> lexicon_;
};

/// Tags supplied by an external tagger, keyed by lowercased surface. Words
/// not in the table fall through to `fallback`.
class OverrideTagger : public Tagger {
 public:
  OverrideTagger(std::map<std::string, Pos> table, std::shared_ptr<const Tagger> fallback);
  std::vector<Pos> tag(const std::vector<std::string>& surfaces) const override;

 private:
  std::map<std::string, Pos> table_;
  std::shared_ptr<const Tagger> fallback_;
};

std::shared_ptr<const Tagger> default_tagger();

}  // namespace convtopic

#endif  // CONVTOPIC_TAGGER_HPP
