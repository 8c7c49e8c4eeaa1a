#include "convtopic/topicmodel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <json.hpp>

#include "convtopic/error.hpp"

namespace convtopic {

Vocabulary::Vocabulary(std::vector<std::string> words) {
  for (auto& w : words) add(w);
}

int Vocabulary::add(const std::string& word) {
  auto [it, fresh] = index_.emplace(word, static_cast<int>(words_.size()));
  if (fresh) words_.push_back(word);
  return it->second;
}

int Vocabulary::find(const std::string& word) const {
  auto it = index_.find(word);
  return it == index_.end() ? -1 : it->second;
}

BagOfWords comment_documents(const Conversation& conversation) {
  BagOfWords bow;
  for (const auto& comment : conversation.comments) {
    std::vector<int> doc;
    for (int sid : comment.sentence_ids)
      for (const auto& t : conversation.sentences[static_cast<std::size_t>(sid)].tokens)
        if (!t.is_stopword) doc.push_back(bow.vocab.add(t.stem));
    bow.docs.push_back(std::move(doc));
  }
  return bow;
}

void WordNetwork::link(const std::string& a, const std::string& b) {
  if (a == b) return;
  links.insert(a < b ? std::make_pair(a, b) : std::make_pair(b, a));
}

bool WordNetwork::linked(const std::string& a, const std::string& b) const {
  return links.count(a < b ? std::make_pair(a, b) : std::make_pair(b, a)) > 0;
}

WordNetwork build_word_network(const Conversation& conversation, const FragmentQuotationGraph& fqg) {
  std::map<int, std::set<std::string>> stems;
  for (const auto& f : fqg.nodes()) {
    auto& set = stems[f.id];
    for (int sid : f.sentence_ids)
      for (const auto& t : conversation.sentences.at(static_cast<std::size_t>(sid)).tokens)
        if (!t.is_stopword) set.insert(t.stem);
  }
  WordNetwork net;
  for (const auto& [id, set] : stems)
    for (auto a = set.begin(); a != set.end(); ++a)
      for (auto b = std::next(a); b != set.end(); ++b) net.link(*a, *b);
  for (const auto& [from, to] : fqg.edges())
    for (const auto& a : stems[from])
      for (const auto& b : stems[to]) net.link(a, b);
  return net;
}

DirichletTree::DirichletTree(int vocab_size, double beta) {
  if (vocab_size < 1) throw InvalidArgument("Dirichlet tree needs a non-empty vocabulary");
  nodes_.push_back(Node{});
  for (int w = 0; w < vocab_size; ++w) {
    nodes_[0].children.push_back(static_cast<int>(nodes_.size()));
    nodes_.push_back(Node{0, beta, {}, w});
  }
  leaf_of_.assign(static_cast<std::size_t>(vocab_size), -1);
  index();
}

DirichletTree::DirichletTree(std::vector<Node> nodes, int vocab_size) : nodes_(std::move(nodes)) {
  if (vocab_size < 1) throw InvalidArgument("Dirichlet tree needs a non-empty vocabulary");
  leaf_of_.assign(static_cast<std::size_t>(vocab_size), -1);
  index();
}

void DirichletTree::index() {
  if (nodes_.empty() || nodes_[0].parent != -1) throw InvalidArgument("Dirichlet tree: node 0 must be the root");
  child_weight_.assign(nodes_.size(), 0.0);
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    if (!(n.weight > 0.0)) throw InvalidArgument("Dirichlet tree: edge weights must be positive");
    if (n.parent < 0 || n.parent >= static_cast<int>(i)) throw InvalidArgument("Dirichlet tree: parents must precede children");
    child_weight_[static_cast<std::size_t>(n.parent)] += n.weight;
    if (n.word >= 0) {
      if (!n.children.empty()) throw InvalidArgument("Dirichlet tree: leaf with children");
      if (n.word >= vocab_size() || leaf_of_[static_cast<std::size_t>(n.word)] >= 0)
        throw InvalidArgument("Dirichlet tree: word " + std::to_string(n.word) + " is not exactly one leaf");
      leaf_of_[static_cast<std::size_t>(n.word)] = static_cast<int>(i);
    }
  }
  paths_.assign(leaf_of_.size(), {});
  for (std::size_t w = 0; w < leaf_of_.size(); ++w) {
    if (leaf_of_[w] < 0) throw InvalidArgument("Dirichlet tree: word " + std::to_string(w) + " has no leaf");
    std::vector<int> path;
    for (int n = leaf_of_[w]; n != 0; n = nodes_[static_cast<std::size_t>(n)].parent) path.push_back(n);
    std::reverse(path.begin(), path.end());
    paths_[w] = std::move(path);
  }
}

std::vector<int> DirichletTree::internal_nodes() const {
  std::vector<int> out;
  for (std::size_t i = 1; i < nodes_.size(); ++i)
    if (nodes_[i].word < 0) out.push_back(static_cast<int>(i));
  return out;
}

double DirichletTree::delta(int internal_node) const {
  const Node& n = node(internal_node);
  if (internal_node == 0 || n.word >= 0) throw InvalidArgument("delta is defined for non-root internal nodes");
  return n.weight - child_weight(internal_node);
}

DirichletTree build_dirichlet_tree(const WordNetwork& network, const Vocabulary& vocab, double beta, double lambda_reg) {
  if (!(beta > 0.0)) throw InvalidArgument("beta must be positive");
  if (!(lambda_reg >= 1.0)) throw InvalidArgument("lambda_reg must be at least 1");
  const int V = vocab.size();
  if (V < 1) throw InvalidArgument("Dirichlet tree needs a non-empty vocabulary");

  std::vector<int> parent(static_cast<std::size_t>(V));
  std::iota(parent.begin(), parent.end(), 0);
  auto root = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& [a, b] : network.links) {
    const int ia = vocab.find(a);
    const int ib = vocab.find(b);
    if (ia < 0 || ib < 0) continue;
    const int ra = root(ia);
    const int rb = root(ib);
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  }
  std::map<int, std::vector<int>> groups;
  for (int w = 0; w < V; ++w) groups[root(w)].push_back(w);

  std::vector<DirichletTree::Node> nodes(1);
  std::vector<char> placed(static_cast<std::size_t>(V), 0);
  for (int w = 0; w < V; ++w) {
    if (placed[w]) continue;
    const auto& members = groups[root(w)];
    if (members.size() == 1) {
      nodes[0].children.push_back(static_cast<int>(nodes.size()));
      nodes.push_back({0, beta, {}, w});
      placed[w] = 1;
      continue;
    }
    const int inner = static_cast<int>(nodes.size());
    nodes[0].children.push_back(inner);
    nodes.push_back({0, static_cast<double>(members.size()) * beta, {}, -1});
    for (int m : members) {
      nodes[static_cast<std::size_t>(inner)].children.push_back(static_cast<int>(nodes.size()));
      nodes.push_back({inner, lambda_reg * beta, {}, m});
      placed[m] = 1;
    }
  }
  return DirichletTree(std::move(nodes), V);
}

namespace {

class Sampler {
 public:
  Sampler(const BagOfWords& corpus, const LdaOptions& o, const DirichletTree* tree)
      : docs_(corpus.docs), K_(o.K), V_(corpus.vocab.size()), alpha_(o.effective_alpha()), beta_(o.beta), tree_(tree),
        rng_(o.seed) {
    ndk_ = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(docs_.size()), K_);
    nkw_ = Eigen::MatrixXi::Zero(K_, V_);
    nk_ = Eigen::VectorXi::Zero(K_);
    if (tree_) nkn_ = Eigen::MatrixXi::Zero(K_, static_cast<Eigen::Index>(tree_->nodes().size()));
    p_.resize(static_cast<std::size_t>(K_));
    z_.resize(docs_.size());
    for (std::size_t d = 0; d < docs_.size(); ++d) {
      for (int w : docs_[d]) {
        const int k = std::min(K_ - 1, static_cast<int>(uniform() * K_));
        z_[d].push_back(k);
        update(static_cast<int>(d), w, k, +1);
      }
    }
  }

  void sweep() {
    for (std::size_t d = 0; d < docs_.size(); ++d) {
      for (std::size_t i = 0; i < docs_[d].size(); ++i) {
        const int w = docs_[d][i];
        update(static_cast<int>(d), w, z_[d][i], -1);
        double total = 0.0;
        for (int k = 0; k < K_; ++k) {
          total += (ndk_(static_cast<Eigen::Index>(d), k) + alpha_) * likelihood(w, k);
          p_[static_cast<std::size_t>(k)] = total;
        }
        const double u = uniform() * total;
        int k = 0;
        while (k < K_ - 1 && !(u < p_[static_cast<std::size_t>(k)])) ++k;
        z_[d][i] = k;
        update(static_cast<int>(d), w, k, +1);
      }
    }
  }

  // Token posterior with the token itself held out.
  Eigen::VectorXd token_posterior(int d, int i) {
    const int w = docs_[static_cast<std::size_t>(d)][static_cast<std::size_t>(i)];
    const int k0 = z_[static_cast<std::size_t>(d)][static_cast<std::size_t>(i)];
    update(d, w, k0, -1);
    Eigen::VectorXd p(K_);
    for (int k = 0; k < K_; ++k) p(k) = (ndk_(d, k) + alpha_) * likelihood(w, k);
    update(d, w, k0, +1);
    return p / p.sum();
  }

  Eigen::MatrixXd topic_word() const {
    Eigen::MatrixXd b(K_, V_);
    for (int k = 0; k < K_; ++k) {
      for (int w = 0; w < V_; ++w) b(k, w) = likelihood(w, k);
      b.row(k) /= b.row(k).sum();
    }
    return b;
  }

  Eigen::MatrixXd doc_topic() const {
    Eigen::MatrixXd t(ndk_.rows(), K_);
    for (Eigen::Index d = 0; d < ndk_.rows(); ++d) {
      const double n = static_cast<double>(docs_[static_cast<std::size_t>(d)].size());
      for (int k = 0; k < K_; ++k) t(d, k) = (ndk_(d, k) + alpha_) / (n + K_ * alpha_);
    }
    return t;
  }

  GibbsState state(int sweep) const { return GibbsState{sweep, z_, ndk_, nkw_, nk_}; }
  const std::vector<std::vector<int>>& z() const { return z_; }

 private:
  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

  double likelihood(int w, int k) const {
    if (!tree_) return (nkw_(k, w) + beta_) / (nk_(k) + V_ * beta_);
    double prob = 1.0;
    int parent_count = nk_(k);
    int parent = 0;
    for (int n : tree_->path(w)) {
      const auto& node = tree_->node(n);
      prob *= (nkn_(k, n) + node.weight) / (parent_count + tree_->child_weight(parent));
      parent_count = nkn_(k, n);
      parent = n;
    }
    return prob;
  }

  void update(int d, int w, int k, int delta) {
    ndk_(d, k) += delta;
    nkw_(k, w) += delta;
    nk_(k) += delta;
    if (tree_)
      for (int n : tree_->path(w)) nkn_(k, n) += delta;
  }

  const std::vector<std::vector<int>>& docs_;
  int K_;
  int V_;
  double alpha_;
  double beta_;
  const DirichletTree* tree_;
  std::mt19937_64 rng_;
  std::vector<std::vector<int>> z_;
  Eigen::MatrixXi ndk_;
  Eigen::MatrixXi nkw_;
  Eigen::VectorXi nk_;
  Eigen::MatrixXi nkn_;
  std::vector<double> p_;
};

// With zero delta at every internal node the tree is an ordinary Dirichlet
// over its leaf weights. If those all equal beta it is the flat prior.
bool collapses_to_flat(const DirichletTree& tree, double beta) {
  for (int n : tree.internal_nodes())
    if (std::abs(tree.delta(n)) > 1e-9 * tree.node(n).weight) return false;
  for (int w = 0; w < tree.vocab_size(); ++w)
    if (tree.node(tree.leaf_of(w)).weight != beta) return false;
  return true;
}

}  // namespace

LdaModel fit_lda(const BagOfWords& corpus, const LdaOptions& options, const DirichletTree* tree,
                 const GibbsObserver& observer) {
  if (options.K < 1) throw InvalidArgument("LDA: K must be at least 1");
  if (options.iterations < 1) throw InvalidArgument("LDA: iterations must be at least 1");
  if (options.samples < 1 || options.sample_lag < 1) throw InvalidArgument("LDA: samples and lag must be positive");
  if (!(options.beta > 0.0)) throw InvalidArgument("LDA: beta must be positive");
  if (corpus.vocab.size() == 0) throw InvalidArgument("LDA: empty vocabulary");
  for (const auto& doc : corpus.docs)
    for (int w : doc)
      if (w < 0 || w >= corpus.vocab.size()) throw InvalidArgument("LDA: word id out of range");
  if (tree && tree->vocab_size() != corpus.vocab.size()) throw InvalidArgument("LDA: tree does not match vocabulary");
  if (tree && collapses_to_flat(*tree, options.beta)) tree = nullptr;

  Sampler sampler(corpus, options, tree);
  int sweeps = 0;
  auto step = [&] {
    sampler.sweep();
    ++sweeps;
    if (observer) observer(sampler.state(sweeps));
  };
  for (int it = 0; it < options.iterations; ++it) step();

  LdaModel model;
  model.K = options.K;
  model.alpha = options.effective_alpha();
  model.beta = options.beta;
  model.seed = options.seed;
  model.vocab = corpus.vocab;
  model.docs = corpus.docs;
  model.topic_word = Eigen::MatrixXd::Zero(options.K, corpus.vocab.size());
  model.doc_topic = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(corpus.docs.size()), options.K);
  model.token_posterior.resize(corpus.docs.size());
  for (std::size_t d = 0; d < corpus.docs.size(); ++d)
    model.token_posterior[d].assign(corpus.docs[d].size(), Eigen::VectorXd::Zero(options.K));

  for (int s = 0; s < options.samples; ++s) {
    if (s > 0)
      for (int l = 0; l < options.sample_lag; ++l) step();
    model.topic_word += sampler.topic_word();
    model.doc_topic += sampler.doc_topic();
    for (std::size_t d = 0; d < corpus.docs.size(); ++d)
      for (std::size_t i = 0; i < corpus.docs[d].size(); ++i)
        model.token_posterior[d][i] += sampler.token_posterior(static_cast<int>(d), static_cast<int>(i));
  }
  const double S = options.samples;
  model.topic_word /= S;
  model.doc_topic /= S;
  for (auto& doc : model.token_posterior)
    for (auto& p : doc) p /= S;
  model.z = sampler.z();
  return model;
}

LdaModel fit_lda(const Conversation& conversation, const LdaOptions& options, const DirichletTree* tree) {
  return fit_lda(comment_documents(conversation), options, tree);
}

LdaModel fit_lda_fqg(const Conversation& conversation, const FragmentQuotationGraph& fqg, const LdaOptions& options,
                     double lambda_reg) {
  const BagOfWords corpus = comment_documents(conversation);
  if (corpus.vocab.size() == 0) throw InvalidArgument("LDA: empty vocabulary");
  const DirichletTree tree =
      build_dirichlet_tree(build_word_network(conversation, fqg), corpus.vocab, options.beta, lambda_reg);
  return fit_lda(corpus, options, &tree);
}

int sentence_topic(const std::vector<Eigen::VectorXd>& token_posteriors) {
  if (token_posteriors.empty()) return -1;
  const Eigen::Index K = token_posteriors.front().size();
  int best = -1;
  double best_score = 0.0;
  std::vector<double> logs;
  for (Eigen::Index k = 0; k < K; ++k) {
    logs.clear();
    for (const auto& p : token_posteriors) {
      if (p.size() != K) throw InvalidArgument("token posteriors of different lengths");
      logs.push_back(std::log(p(k)));
    }
    // Summing in sorted order keeps the result independent of word order.
    std::sort(logs.begin(), logs.end());
    const double score = std::accumulate(logs.begin(), logs.end(), 0.0);
    if (best < 0 || score > best_score) {
      best = static_cast<int>(k);
      best_score = score;
    }
  }
  return best;
}

Segmentation assign_sentence_topics(const LdaModel& model, const Conversation& conversation) {
  if (model.token_posterior.size() != conversation.comments.size())
    throw InvalidArgument("LDA model was not fitted on this conversation");
  Segmentation seg;
  seg.K = model.K;
  seg.topic_of.assign(conversation.sentences.size(), 0);
  for (std::size_t c = 0; c < conversation.comments.size(); ++c) {
    const auto& posts = model.token_posterior[c];
    std::size_t cursor = 0;
    int previous = -1;
    for (int sid : conversation.comments[c].sentence_ids) {
      std::vector<Eigen::VectorXd> tokens;
      for (const auto& t : conversation.sentences[static_cast<std::size_t>(sid)].tokens) {
        if (t.is_stopword) continue;
        if (cursor >= posts.size()) throw InvalidArgument("LDA model was not fitted on this conversation");
        tokens.push_back(posts[cursor++]);
      }
      int topic = sentence_topic(tokens);
      if (topic < 0) topic = previous >= 0 ? previous : 0;
      seg.topic_of[static_cast<std::size_t>(sid)] = topic;
      previous = topic;
    }
    if (cursor != posts.size()) throw InvalidArgument("LDA model was not fitted on this conversation");
  }
  return seg;
}

std::string lda_to_json(const LdaModel& model) {
  nlohmann::ordered_json j;
  j["K"] = model.K;
  j["alpha"] = model.alpha;
  j["beta"] = model.beta;
  j["seed"] = model.seed;
  j["vocab"] = model.vocab.words();
  auto rows = [](const Eigen::MatrixXd& m) {
    nlohmann::json out = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      std::vector<double> row(m.cols());
      for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
      out.push_back(row);
    }
    return out;
  };
  j["topic_word"] = rows(model.topic_word);
  j["doc_topic"] = rows(model.doc_topic);
  return j.dump(2) + "\n";
}

}  // namespace convtopic
