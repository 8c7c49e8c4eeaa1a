#ifndef CONVTOPIC_LABELER_HPP
#define CONVTOPIC_LABELER_HPP

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "convtopic/corpus.hpp"
#include "convtopic/fqg.hpp"
#include "convtopic/segmentation.hpp"

namespace convtopic {

/// Which parts of speech become graph nodes. Stopwords never do.
enum class SyntacticFilter { Nouns, NounsAdjectives, NounsAdjectivesVerbs, ContentWords, AllWords };

bool passes_filter(const Token& token, SyntacticFilter filter);
std::vector<std::string> syntactic_filter(const std::vector<const Sentence*>& sentences,
                                          SyntacticFilter filter = SyntacticFilter::NounsAdjectives);

/// Unordered co-occurrence counts of candidate stems within a window of s
/// positions over each sentence's non-stopword tokens. Keys are ordered
/// (a < b); a stem never co-occurs with itself.
using CooccurrenceCounts = std::map<std::pair<std::string, std::string>, double>;
CooccurrenceCounts cooccurrences(const std::vector<const Sentence*>& sentences, int s, SyntacticFilter filter);

/// Word co-occurrence graph of one topic segment.
struct WordGraph {
  std::vector<std::string> words;
  Eigen::MatrixXd weights;    // symmetric, >= 0
  Eigen::VectorXd relevance;  // rho(w | U_k)

  int index_of(const std::string& word) const;
};

/// Discriminative edge weight tf * ln(K / (0.5 + tf_other)), clamped at 0.
double discriminative_weight(double tf_in, double tf_out, int K);

/// rho(w | U) = ln(tf_U + 1) * ln(tf_segment + 1).
double leading_relevance(double tf_leading, double tf_segment);

struct WcgOptions {
  int window = 2;
  SyntacticFilter filter = SyntacticFilter::NounsAdjectives;
};

/// `others` are the sentences of every other segment, `leading` the U_k.
WordGraph build_wcg(const std::vector<const Sentence*>& segment, const std::vector<const Sentence*>& others,
                    const std::vector<const Sentence*>& leading, int K, const WcgOptions& options = {});

/// Plain co-occurrence counts as weights, no relevance.
WordGraph build_count_graph(const std::vector<const Sentence*>& sentences, const WcgOptions& options = {});

/// Scores over named items, summing to 1.
struct RankVector {
  std::vector<std::string> items;
  Eigen::VectorXd scores;

  double score_of(const std::string& item) const;
  /// Items by descending score, ties by item.
  std::vector<std::string> ordered() const;
};

/// Rows divided by their sums; all-zero rows become uniform.
Eigen::MatrixXd row_stochastic(const Eigen::MatrixXd& M);
/// d * A + (1 - d) / N.
Eigen::MatrixXd with_teleport(const Eigen::MatrixXd& A, double d);
/// Stationary vector of a row-stochastic matrix by power iteration.
Eigen::VectorXd stationary(const Eigen::MatrixXd& M, double tolerance = 1e-13, int max_iterations = 100000);

/// Transition matrix of the biased walk: teleport(lambda Q + (1 - lambda) R).
Eigen::MatrixXd biased_transition(const WordGraph& graph, double lambda_bias, double d);
RankVector biased_rank(const WordGraph& graph, double lambda_bias = 0.85, double d = 0.85);

/// Unbiased weighted PageRank over the graph's weights.
RankVector general_rank(const WordGraph& graph, double d = 0.85);

/// Word counts per fragment (rows follow graph.nodes(), columns words).
Eigen::MatrixXd fragment_word_counts(const Conversation& conversation, const FragmentQuotationGraph& graph,
                                     const std::vector<std::string>& words, SyntacticFilter filter);

/// Transition matrices of the three coupled walks.
struct CorankMatrices {
  Eigen::MatrixXd F;
  Eigen::MatrixXd W;
  Eigen::MatrixXd FW;
  Eigen::MatrixXd WF;
};

CorankMatrices corank_matrices(const FragmentQuotationGraph& fragments, const WordGraph& words,
                               const Eigen::MatrixXd& counts, double d, std::optional<double> lambda_bias);

/// Iterates f <- (1-d)F'f + d WF'(FW'(WF'w)), w <- (1-d)W'w + d FW'(WF'(FW'f)),
/// renormalizing both, from uniform vectors unless starts are given.
std::pair<Eigen::VectorXd, Eigen::VectorXd> corank_iterate(const CorankMatrices& m, double delta,
                                                           std::optional<Eigen::VectorXd> f0 = std::nullopt,
                                                           std::optional<Eigen::VectorXd> w0 = std::nullopt,
                                                           double tolerance = 1e-12, int max_iterations = 100000);

/// Fragment and word ranks. Without a bias the word walk is R alone. An empty
/// fragment graph falls back to the word walk only.
std::pair<RankVector, RankVector> corank(const FragmentQuotationGraph& fragments, const WordGraph& words,
                                         const Eigen::MatrixXd& counts, double delta = 0.4, double d = 0.85,
                                         std::optional<double> lambda_bias = std::nullopt);

enum class PhraseOrigin { Segment, Conversation };

struct Keyphrase {
  std::string text;
  std::vector<std::string> stems;
  double score = 0.0;
  PhraseOrigin origin = PhraseOrigin::Segment;
};

/// Marks the top ceil(fraction * |items|) ranked words and collapses runs of
/// adjacent marked tokens. A phrase scores the max of its words; repeated stem
/// sequences keep the higher score. Sorted by score, then text.
std::vector<Keyphrase> generate_phrases(const std::vector<const Sentence*>& sentences, const RankVector& rank,
                                        double fraction = 0.25, PhraseOrigin origin = PhraseOrigin::Segment);

/// Rescores each phrase by the max segment score of its words (0 if absent).
std::vector<Keyphrase> rerank_conversation_phrases(const std::vector<Keyphrase>& phrases,
                                                   const RankVector& segment_rank);

/// Union by stem sequence keeping the higher score; zero-score entries of
/// `extra` are dropped.
std::vector<Keyphrase> merge_phrases(std::vector<Keyphrase> base, const std::vector<Keyphrase>& extra);

/// Overlapping words (modulo stemming) divided by the length of `selected`.
double phrase_similarity(const Keyphrase& candidate, const Keyphrase& selected);

struct Label {
  std::string text;
  double score = 0.0;
};

/// Greedy MMR. Scores are rescaled to max 1 and identical stem sequences
/// merged first; returned scores sum to 1.
std::vector<Label> select_labels_mmr(std::vector<Keyphrase> phrases, int k, double rho = 0.35);

enum class Ranker { Freq, Lead, MT, Bias, BiasPlus, CorGen, CorGenPlus, CorBias, CorBiasPlus };

Ranker parse_ranker(std::string_view name);
std::string_view ranker_name(Ranker ranker);

struct LabelOptions {
  Ranker ranker = Ranker::CorBiasPlus;
  SyntacticFilter filter = SyntacticFilter::NounsAdjectives;
  double lambda_bias = 0.85;
  double delta = 0.4;
  int window = 2;
  double teleport = 0.85;
  double phrase_fraction = 0.25;
  double rho = 0.35;
  int labels_k = 5;
  int leading_sentences = 2;
};

/// Labels per topic id (index = topic id of the segmentation).
using LabeledTopics = std::vector<std::vector<Label>>;

LabeledTopics label_topics(const Conversation& conversation, const Segmentation& segmentation,
                           const FragmentQuotationGraph& fqg, const LabelOptions& options = {});

std::string labels_to_json(const LabeledTopics& labels);

}  // namespace convtopic

#endif  // CONVTOPIC_LABELER_HPP
