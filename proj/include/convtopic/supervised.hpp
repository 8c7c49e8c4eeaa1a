#ifndef CONVTOPIC_SUPERVISED_HPP
#define CONVTOPIC_SUPERVISED_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "convtopic/annotations.hpp"
#include "convtopic/corpus.hpp"
#include "convtopic/fqg.hpp"
#include "convtopic/lexchain.hpp"
#include "convtopic/similarity.hpp"
#include "convtopic/topicmodel.hpp"

namespace convtopic {

inline constexpr int kFeatureCount = 19;
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "TFIDF1", "TFIDF2", "CueWords", "QA", "Greet", "Gap", "Speaker", "FQG1", "FQG2", "FQG3",
    "SameReply", "Name", "LSA1", "LSA2", "LDAdec", "LDAFQGdec", "LCSegdec", "LCSegFQGdec", "LexCoh"};

using FeatureVector = Eigen::Matrix<double, kFeatureCount, 1>;

struct LsaSpace {
  int rank = 0;
  Vocabulary vocab;
  Eigen::MatrixXd W;                 // V x D, tf * idf
  Eigen::MatrixXd U;                 // V x k
  Eigen::VectorXd sigma;             // k
  Eigen::MatrixXd V;                 // D x k
  Eigen::MatrixXd word_vectors;      // V x k, rows of U_k Sigma_k
  Eigen::MatrixXd sentence_vectors;  // n x k
};

/// max(1, floor(comments / 4)), capped by min(V, D).
int default_lsa_rank(const Conversation& conversation);
LsaSpace compute_lsa(const Conversation& conversation, int rank);

/// Everything pair features need besides the two sentences.
struct PairContext {
  const Conversation* conversation = nullptr;
  FragmentQuotationGraph fqg;
  std::vector<LexicalChain> chains;
  LsaSpace lsa;
  TermVector idf;
  std::vector<TermVector> tf;
  Segmentation lda;
  Segmentation lda_fqg;
  Segmentation lcseg;
  Segmentation lcseg_fqg;
  std::vector<std::string> cue_words;
};

struct PairContextOptions {
  int K = 2;
  LdaOptions lda;
  double lambda_reg = 20.0;
  LcsegParams lcseg;
  std::vector<std::string> cue_words = default_cue_words();
};

/// Builds the FQG, chains and LSA space and runs the four unsupervised
/// segmenters. The conversation must outlive the context.
PairContext build_pair_context(const Conversation& conversation, const PairContextOptions& options);

/// Features of the pair (x, y), x < y.
FeatureVector extract_pair_features(const PairContext& context, int x, int y);

/// Feature rows for all pairs x < y in row-major pair order.
Eigen::MatrixXd extract_all_pair_features(const PairContext& context, int threads = 1);

struct LabeledPair {
  int x = 0;
  int y = 0;
  bool same = false;
};

/// All n(n-1)/2 pairs labelled by strict majority of annotators.
std::vector<LabeledPair> pair_expansion(const GoldStandard& gold);
std::vector<LabeledPair> pair_expansion(const std::vector<Segmentation>& annotations);

/// Mean negative log-likelihood + (l2 / 2) |w|^2 over standardized rows.
/// theta holds the feature weights followed by the bias; the bias is not
/// regularized.
double logistic_objective(const Eigen::VectorXd& theta, const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double l2,
                          Eigen::VectorXd* gradient = nullptr);

struct LbfgsOptions {
  int memory = 10;
  double gradient_tolerance = 1e-6;
  int max_iterations = 5000;
};

struct LbfgsResult {
  Eigen::VectorXd x;
  double value = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Objective after every accepted step, starting with the initial point.
  std::vector<double> trace;
};

using Objective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*)>;
LbfgsResult minimize_lbfgs(const Objective& f, Eigen::VectorXd x0, const LbfgsOptions& options = {});

struct ClassifierModel {
  std::vector<std::string> feature_names;
  Eigen::VectorXd weights;
  double bias = 0.0;
  double l2 = 1.0;
  Eigen::VectorXd means;
  Eigen::VectorXd stds;

  /// P(same) for one raw (unstandardized) feature row.
  double predict(const Eigen::VectorXd& features) const;
  Eigen::VectorXd predict_all(const Eigen::MatrixXd& features) const;
  /// Feature name and |weight|, in feature order.
  std::vector<std::pair<std::string, double>> importance() const;
};

/// Rows of X are raw feature vectors, y holds 0/1 labels.
ClassifierModel train_classifier(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double l2,
                                 const LbfgsOptions& options = {});

/// K-fold cross-validated choice of l2 by held-out log-loss; ties go to the
/// earlier grid entry.
double select_l2(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const std::vector<double>& grid = {0.01, 0.1, 1, 10},
                 int folds = 10, std::uint64_t seed = 1);

std::string classifier_to_json(const ClassifierModel& model);
ClassifierModel classifier_from_json(std::string_view document);

/// Complete graph weighted by P(same); zero diagonal; Ncut into K clusters.
Segmentation segment_from_probabilities(const Eigen::MatrixXd& probabilities, int K);
Segmentation supervised_segment(const PairContext& context, const ClassifierModel& model, int K, int threads = 1);

}  // namespace convtopic

#endif  // CONVTOPIC_SUPERVISED_HPP
