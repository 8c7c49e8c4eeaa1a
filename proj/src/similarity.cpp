#include "convtopic/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace convtopic {

TermVector term_frequencies(const Sentence& sentence) {
  TermVector tf;
  for (const auto& t : sentence.tokens)
    if (!t.is_stopword) tf[t.stem] += 1.0;
  return tf;
}

TermVector term_frequencies(const std::vector<const Sentence*>& sentences) {
  TermVector tf;
  for (const Sentence* s : sentences)
    for (const auto& t : s->tokens)
      if (!t.is_stopword) tf[t.stem] += 1.0;
  return tf;
}

double cosine(const TermVector& a, const TermVector& b) {
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (const auto& [term, v] : a) {
    na += v * v;
    if (auto it = b.find(term); it != b.end()) dot += v * it->second;
  }
  for (const auto& [term, v] : b) nb += v * v;
  if (na <= 0.0 || nb <= 0.0) return 0.0;
  // Clamp rounding noise so identical vectors give exactly 1.
  return std::min(1.0, dot / (std::sqrt(na) * std::sqrt(nb)));
}

double cosine_tf(const Sentence& x, const Sentence& y) { return cosine(term_frequencies(x), term_frequencies(y)); }

TermVector sentence_idf(const std::vector<Sentence>& sentences) {
  TermVector df;
  for (const auto& s : sentences) {
    std::set<std::string> seen;
    for (const auto& t : s.tokens)
      if (!t.is_stopword) seen.insert(t.stem);
    for (const auto& stem : seen) df[stem] += 1.0;
  }
  const double n = static_cast<double>(sentences.size());
  for (auto& [stem, v] : df) v = std::log(n / v);
  return df;
}

TermVector weight_by(TermVector tf, const TermVector& idf) {
  for (auto& [term, v] : tf) {
    auto it = idf.find(term);
    v *= it == idf.end() ? 0.0 : it->second;
  }
  return tf;
}

double cosine_tfidf(const Sentence& x, const Sentence& y, const TermVector& idf) {
  return cosine(weight_by(term_frequencies(x), idf), weight_by(term_frequencies(y), idf));
}

}  // namespace convtopic
