#ifndef CONVTOPIC_METRICS_HPP
#define CONVTOPIC_METRICS_HPP

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "convtopic/corpus.hpp"
#include "convtopic/segmentation.hpp"

namespace convtopic {

/// Maximum-weight assignment of rows to columns (Hungarian method). Returns
/// the column of each row, or -1 for rows left unmatched when there are
/// more rows than columns.
std::vector<int> max_weight_matching(const Eigen::MatrixXd& weights);

/// overlap(i, j) = number of sentences in cluster i of a and cluster j of b.
Eigen::MatrixXd overlap_matrix(const Segmentation& a, const Segmentation& b);

/// Keeps the sentences whose flag is 0. Topic ids and K are left as they are.
Segmentation without(const Segmentation& seg, const std::vector<char>& excluded);

double one_to_one(const Segmentation& a, const Segmentation& b);
double loc_k(const Segmentation& a, const Segmentation& b, int k = 3);
/// Not symmetric: every source cluster goes to its best target cluster.
double many_to_one(const Segmentation& source, const Segmentation& target);
/// Entropy of the topic size distribution, in bits.
double entropy(const Segmentation& seg);

/// Stems and tags of a label phrase.
struct Phrase {
  std::vector<std::string> stems;
  std::vector<Pos> pos;
};

Phrase analyze_phrase(std::string_view text, const TextProcessor& text_processor = TextProcessor());

struct ScoredPhrase {
  std::string text;
  double score = 0.0;
};

/// Pairwise noun similarity. Identical stems score 1, pairs in the table
/// score their table value, everything else 0.
class SimilarityProvider {
 public:
  SimilarityProvider() = default;
  explicit SimilarityProvider(std::map<std::pair<std::string, std::string>, double> table);

  double operator()(const std::string& a, const std::string& b) const;
  std::size_t table_size() const { return table_.size(); }

 private:
  std::map<std::pair<std::string, std::string>, double> table_;
};

/// TSV lines `noun1<TAB>noun2<TAB>sigma`. Words are stemmed and both
/// orientations are stored.
SimilarityProvider parse_similarity_table(std::string_view tsv);
SimilarityProvider load_similarity_table(const std::string& path);

double mutual_overlap(const Phrase& ref, const Phrase& cand);
double mutual_overlap(std::string_view ref, std::string_view cand, const TextProcessor& tp = TextProcessor());

/// Scores must sum to 1 within 1e-6.
double weighted_mutual_overlap(std::string_view ref, const std::vector<ScoredPhrase>& cands,
                               const TextProcessor& tp = TextProcessor());
double weighted_semantic_mutual_overlap(std::string_view ref, const std::vector<ScoredPhrase>& cands,
                                        const SimilarityProvider& sim = {}, const TextProcessor& tp = TextProcessor());
double semantic_overlap(const Phrase& ref, const Phrase& cand, const SimilarityProvider& sim);

struct LabelAgreement {
  double wmo = 0.0;
  double wsmo = 0.0;
};

/// Maps the reference clusters one-to-one onto the system clusters and
/// scores the top-k system labels of each mapped cluster against the
/// reference label. Reference clusters with an empty label are skipped;
/// unmapped ones score 0. Returns the mean over scored reference clusters.
LabelAgreement end_to_end_label_agreement(const Segmentation& reference, const std::vector<std::string>& reference_labels,
                                          const Segmentation& system,
                                          const std::vector<std::vector<ScoredPhrase>>& system_labels, int k,
                                          const SimilarityProvider& sim = {}, const TextProcessor& tp = TextProcessor());

struct Summary {
  double mean = 0.0;
  double max = 0.0;
  double min = 0.0;
  std::size_t count = 0;
};

Summary summarize(const std::vector<double>& values);

}  // namespace convtopic

#endif  // CONVTOPIC_METRICS_HPP
