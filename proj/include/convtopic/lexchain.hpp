#ifndef CONVTOPIC_LEXCHAIN_HPP
#define CONVTOPIC_LEXCHAIN_HPP

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "convtopic/corpus.hpp"
#include "convtopic/fqg.hpp"
#include "convtopic/segmentation.hpp"

namespace convtopic {

/// Repetitions of one stem. Positions index the sentence list the chain was
/// built from (equal to sentence ids when built over a whole conversation).
struct LexicalChain {
  std::string stem;
  std::vector<int> occurrences;  // distinct positions, sorted
  int freq = 0;                  // token count
  double score = 0.0;
  int first = 0;
  int last = 0;

  bool overlaps(int from, int to) const { return first <= to && last >= from; }
};

struct LcsegParams {
  int window = 2;
  int hiatus = 11;
  int smoothing = 3;
};

/// Inclusive position range.
struct Window {
  int from = 0;
  int to = 0;
};

std::vector<LexicalChain> build_chains(const std::vector<const Sentence*>& sentences, int hiatus = 11);
std::vector<LexicalChain> build_chains(const std::vector<Sentence>& sentences, int hiatus = 11);

/// Chain-score vector of a window: rank of each chain overlapping it, else 0.
Eigen::VectorXd chain_vector(Window w, const std::vector<LexicalChain>& chains);

/// Cosine of two dense vectors; 0 when either is all-zero.
double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

double lexcoh(Window x, Window y, const std::vector<LexicalChain>& chains);

/// Cohesion at each gap i = 1..n-1 (between positions i-1 and i).
std::vector<double> lcseg_cohesion(int n, const std::vector<LexicalChain>& chains, const LcsegParams& params = {});

/// Positions i where a new segment starts, ascending, K-1 of them.
std::vector<int> lcseg_boundaries(int n, const std::vector<LexicalChain>& chains, int K,
                                  const LcsegParams& params = {});

/// Contiguous segmentation of the given sentence sequence (indices follow
/// the sequence, not sentence ids).
Segmentation lcseg_segment(const std::vector<const Sentence*>& sentences, int K, const LcsegParams& params = {});
Segmentation lcseg_segment(const Conversation& conversation, int K, const LcsegParams& params = {});

/// Sentence ids per path, in path order.
std::vector<std::vector<int>> path_sentences(const FragmentQuotationGraph& fqg);

/// Consolidation weights: co-segment count across path segmentations, or
/// TF cosine for pairs that never share a segment.
Eigen::MatrixXd consolidation_graph(const Conversation& conversation,
                                    const std::vector<std::vector<int>>& paths,
                                    const std::vector<Segmentation>& path_segmentations);

Segmentation lcseg_fqg_segment(const Conversation& conversation, const FragmentQuotationGraph& fqg, int K,
                               const LcsegParams& params = {});

}  // namespace convtopic

#endif  // CONVTOPIC_LEXCHAIN_HPP
