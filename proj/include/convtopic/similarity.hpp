#ifndef CONVTOPIC_SIMILARITY_HPP
#define CONVTOPIC_SIMILARITY_HPP

#include <map>
#include <string>
#include <vector>

#include "convtopic/corpus.hpp"

namespace convtopic {

/// Sparse term vector keyed by stem.
using TermVector = std::map<std::string, double>;

/// Counts of non-stopword stems.
TermVector term_frequencies(const Sentence& sentence);
TermVector term_frequencies(const std::vector<const Sentence*>& sentences);

/// Cosine of two sparse vectors; 0 when either is all-zero.
double cosine(const TermVector& a, const TermVector& b);

/// TF cosine over non-stop stems.
double cosine_tf(const Sentence& x, const Sentence& y);

/// idf(t) = ln(N / df(t)) with each sentence as a document.
TermVector sentence_idf(const std::vector<Sentence>& sentences);
TermVector weight_by(TermVector tf, const TermVector& idf);
double cosine_tfidf(const Sentence& x, const Sentence& y, const TermVector& idf);

}  // namespace convtopic

#endif  // CONVTOPIC_SIMILARITY_HPP
