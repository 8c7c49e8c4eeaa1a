#include "convtopic/tagger.hpp"

#include <array>

#include "convtopic/error.hpp"
#include "convtopic/resources.hpp"
#include "convtopic/text.hpp"

namespace convtopic {

std::string_view pos_name(Pos pos) {
  switch (pos) {
    case Pos::Noun: return "NOUN";
    case Pos::Adj: return "ADJ";
    case Pos::Verb: return "VERB";
    case Pos::Adv: return "ADV";
    case Pos::Other: return "OTHER";
  }
  return "OTHER";
}

Pos parse_pos(std::string_view name) {
  const std::string lower = to_lower(trim(name));
  if (lower == "noun") return Pos::Noun;
  if (lower == "adj") return Pos::Adj;
  if (lower == "verb") return Pos::Verb;
  if (lower == "adv") return Pos::Adv;
  if (lower == "other") return Pos::Other;
  throw InvalidArgument("unknown POS tag: " + std::string(name));
}

std::unordered_map<std::string, Pos> LexiconTagger::parse_lexicon(std::string_view content) {
  std::unordered_map<std::string, Pos> lexicon;
  for (const auto& raw : split_lines(content)) {
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto sep = line.find_first_of(" \t");
    if (sep == std::string_view::npos) throw ParseError("lexicon line without tag: " + std::string(line));
    lexicon.emplace(to_lower(line.substr(0, sep)), parse_pos(line.substr(sep + 1)));
  }
  return lexicon;
}

LexiconTagger::LexiconTagger() : lexicon_(parse_lexicon(resources::lexicon())) {}

LexiconTagger::LexiconTagger(std::unordered_map<std::string, Pos> lexicon) : lexicon_(std::move(lexicon)) {}

const Pos* LexiconTagger::lookup(const std::string& lower) const {
  if (auto it = lexicon_.find(lower); it != lexicon_.end()) return &it->second;
  return nullptr;
}

namespace {

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() > suffix.size() + 1 && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

bool is_determiner(const std::string& lower) {
  static constexpr std::array<std::string_view, 14> dets = {
      "a", "an", "the", "this", "that", "these", "those", "my", "your", "his", "her", "its", "our", "their"};
  for (auto d : dets)
    if (lower == d) return true;
  return false;
}

bool is_number(const std::string& s) {
  for (char c : s)
    if (c < '0' || c > '9') return false;
  return !s.empty();
}

}  // namespace

Pos LexiconTagger::tag_word(const std::string& surface, bool sentence_initial) const {
  const std::string lower = to_lower(surface);
  if (is_number(lower)) return Pos::Other;
  if (const Pos* p = lookup(lower)) return *p;

  // Inflected forms of lexicon entries.
  struct Inflection {
    std::string_view suffix;
    std::string_view replacement;
  };
  static constexpr std::array<Inflection, 9> inflections = {{{"ies", "y"},
                                                             {"es", ""},
                                                             {"s", ""},
                                                             {"ied", "y"},
                                                             {"ed", ""},
                                                             {"ed", "e"},
                                                             {"ing", ""},
                                                             {"ing", "e"},
                                                             {"er", ""}}};
  for (const auto& inf : inflections) {
    if (!ends_with(lower, inf.suffix)) continue;
    std::string base = lower.substr(0, lower.size() - inf.suffix.size());
    base += inf.replacement;
    if (const Pos* p = lookup(base)) {
      if (*p == Pos::Verb || *p == Pos::Noun) return *p;
      if (*p == Pos::Adj && inf.suffix == "er") return Pos::Adj;
    }
  }

  const bool capitalized = !surface.empty() && surface[0] >= 'A' && surface[0] <= 'Z';
  if (capitalized && !sentence_initial) return Pos::Noun;

  if (ends_with(lower, "ly")) return Pos::Adv;
  if (ends_with(lower, "ing") || ends_with(lower, "ed")) return Pos::Verb;
  for (std::string_view suf : {"ous", "ful", "ive", "able", "ible", "less", "ish", "ical", "ic", "al", "ary"}) {
    if (ends_with(lower, suf)) return Pos::Adj;
  }
  if (ends_with(lower, "ize") || ends_with(lower, "ise") || ends_with(lower, "ify")) return Pos::Verb;
  return Pos::Noun;
}

std::vector<Pos> LexiconTagger::tag(const std::vector<std::string>& surfaces) const {
  std::vector<Pos> tags;
  tags.reserve(surfaces.size());
  for (std::size_t i = 0; i < surfaces.size(); ++i) {
    Pos p = tag_word(surfaces[i], i == 0);
    // A verb reading right after a determiner or adjective is a noun use
    // ("the release", "a free release").
    if (p == Pos::Verb && i > 0) {
      const std::string prev = to_lower(surfaces[i - 1]);
      if (is_determiner(prev) || tags.back() == Pos::Adj) p = Pos::Noun;
    }
    tags.push_back(p);
  }
  return tags;
}

OverrideTagger::OverrideTagger(std::map<std::string, Pos> table, std::shared_ptr<const Tagger> fallback)
    : table_(std::move(table)), fallback_(std::move(fallback)) {
  if (!fallback_) throw InvalidArgument("OverrideTagger needs a fallback tagger");
}

std::vector<Pos> OverrideTagger::tag(const std::vector<std::string>& surfaces) const {
  auto tags = fallback_->tag(surfaces);
  for (std::size_t i = 0; i < surfaces.size(); ++i) {
    if (auto it = table_.find(to_lower(surfaces[i])); it != table_.end()) tags[i] = it->second;
  }
  return tags;
}

std::shared_ptr<const Tagger> default_tagger() {
  static const std::shared_ptr<const Tagger> tagger = std::make_shared<LexiconTagger>();
  return tagger;
}

}  // namespace convtopic
