#ifndef CONVTOPIC_TOPICMODEL_HPP
#define CONVTOPIC_TOPICMODEL_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "convtopic/corpus.hpp"
#include "convtopic/fqg.hpp"
#include "convtopic/segmentation.hpp"

namespace convtopic {

class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> words);

  /// Index of a word, adding it if new.
  int add(const std::string& word);
  /// Index or -1.
  int find(const std::string& word) const;
  const std::string& word(int id) const { return words_.at(static_cast<std::size_t>(id)); }
  const std::vector<std::string>& words() const { return words_; }
  int size() const { return static_cast<int>(words_.size()); }

 private:
  std::vector<std::string> words_;
  std::map<std::string, int> index_;
};

/// Documents as word-id sequences over a vocabulary.
struct BagOfWords {
  Vocabulary vocab;
  std::vector<std::vector<int>> docs;
};

/// One document per comment; tokens are non-stop stems in sentence order.
BagOfWords comment_documents(const Conversation& conversation);

/// Undirected must-links between distinct stems.
struct WordNetwork {
  std::set<std::pair<std::string, std::string>> links;

  void link(const std::string& a, const std::string& b);
  bool linked(const std::string& a, const std::string& b) const;
  std::size_t size() const { return links.size(); }
};

/// Links the non-stop stems of each fragment to each other and to the
/// stems of fragments joined to it by an edge.
WordNetwork build_word_network(const Conversation& conversation, const FragmentQuotationGraph& fqg);

/// Tree-shaped prior over the vocabulary. Node 0 is the root; every word is
/// exactly one leaf.
class DirichletTree {
 public:
  struct Node {
    int parent = -1;
    /// Weight of the edge from the parent (unused for the root).
    double weight = 0.0;
    std::vector<int> children;
    /// Word id for leaves, -1 otherwise.
    int word = -1;
  };

  /// Flat tree: every word hangs from the root with weight beta.
  DirichletTree(int vocab_size, double beta);
  DirichletTree(std::vector<Node> nodes, int vocab_size);

  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& node(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }
  int leaf_of(int word) const { return leaf_of_.at(static_cast<std::size_t>(word)); }
  int vocab_size() const { return static_cast<int>(leaf_of_.size()); }
  /// Internal nodes other than the root.
  std::vector<int> internal_nodes() const;
  /// Edge weight into i minus the sum of its children's edge weights.
  double delta(int internal_node) const;
  /// Nodes from the root's child down to the word's leaf.
  const std::vector<int>& path(int word) const { return paths_.at(static_cast<std::size_t>(word)); }
  /// Sum of child edge weights of a node.
  double child_weight(int node) const { return child_weight_.at(static_cast<std::size_t>(node)); }

 private:
  void index();

  std::vector<Node> nodes_;
  std::vector<int> leaf_of_;
  std::vector<std::vector<int>> paths_;
  std::vector<double> child_weight_;
};

/// Each connected component of at least two words becomes a subtree: root ->
/// internal node with weight |L|*beta, internal node -> leaf with weight
/// lambda*beta. Remaining words attach to the root with weight beta. Words of
/// the network outside the vocabulary are ignored.
DirichletTree build_dirichlet_tree(const WordNetwork& network, const Vocabulary& vocab, double beta, double lambda_reg);

struct LdaOptions {
  int K = 2;
  /// Non-positive means 50 / K.
  double alpha = 0.0;
  double beta = 0.01;
  int iterations = 2000;
  std::uint64_t seed = 1;
  /// Extra samples averaged into the token posteriors (1 = final sample only).
  int samples = 1;
  int sample_lag = 10;

  double effective_alpha() const { return alpha > 0.0 ? alpha : 50.0 / K; }
};

struct LdaModel {
  int K = 0;
  double alpha = 0.0;
  double beta = 0.0;
  std::uint64_t seed = 0;
  Vocabulary vocab;
  Eigen::MatrixXd topic_word;  // K x V
  Eigen::MatrixXd doc_topic;   // D x K
  std::vector<std::vector<int>> docs;
  std::vector<std::vector<int>> z;
  /// P(z = k | token) per document token.
  std::vector<std::vector<Eigen::VectorXd>> token_posterior;
};

/// Sampler state handed to an observer after every sweep.
struct GibbsState {
  int sweep = 0;
  const std::vector<std::vector<int>>& z;
  const Eigen::MatrixXi& doc_topic_counts;   // D x K
  const Eigen::MatrixXi& topic_word_counts;  // K x V
  const Eigen::VectorXi& topic_counts;       // K
};
using GibbsObserver = std::function<void(const GibbsState&)>;

/// Collapsed Gibbs sampling. With a tree, the word likelihood is the product
/// over the root-to-leaf path of (n_k(child) + w(child)) / sum over siblings.
LdaModel fit_lda(const BagOfWords& corpus, const LdaOptions& options, const DirichletTree* tree = nullptr,
                 const GibbsObserver& observer = {});
LdaModel fit_lda(const Conversation& conversation, const LdaOptions& options, const DirichletTree* tree = nullptr);

/// Builds the word network and tree, then fits.
LdaModel fit_lda_fqg(const Conversation& conversation, const FragmentQuotationGraph& fqg, const LdaOptions& options,
                     double lambda_reg = 20.0);

/// argmax_k of sum_x log P(z = k | x); ties to the lowest id. -1 if empty.
int sentence_topic(const std::vector<Eigen::VectorXd>& token_posteriors);

/// Sentences with no content tokens take the previous sentence's topic in
/// the same comment, else topic 0.
Segmentation assign_sentence_topics(const LdaModel& model, const Conversation& conversation);

std::string lda_to_json(const LdaModel& model);

}  // namespace convtopic

#endif  // CONVTOPIC_TOPICMODEL_HPP
