#include "convtopic/graphcut.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "convtopic/error.hpp"
#include "convtopic/similarity.hpp"

namespace convtopic {

namespace {

void check_graph(const Eigen::MatrixXd& W) {
  if (W.rows() != W.cols()) throw InvalidArgument("weight matrix is not square");
  for (Eigen::Index i = 0; i < W.rows(); ++i) {
    if (W(i, i) != 0.0) throw InvalidArgument("weight matrix has a non-zero diagonal");
    for (Eigen::Index j = 0; j < W.cols(); ++j) {
      if (!(W(i, j) >= 0.0) || !std::isfinite(W(i, j))) throw InvalidArgument("negative or non-finite edge weight");
      if (std::abs(W(i, j) - W(j, i)) > 1e-12 * std::max(1.0, std::abs(W(i, j))))
        throw InvalidArgument("weight matrix is not symmetric");
    }
  }
}

// Connected components over positive-weight edges, labelled by lowest member.
std::vector<int> components(const Eigen::MatrixXd& W) {
  const int n = static_cast<int>(W.rows());
  std::vector<int> comp(static_cast<std::size_t>(n), -1);
  int next = 0;
  for (int s = 0; s < n; ++s) {
    if (comp[s] >= 0) continue;
    std::vector<int> stack{s};
    comp[s] = next;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int v = 0; v < n; ++v) {
        if (comp[v] < 0 && W(u, v) > 0.0) {
          comp[v] = next;
          stack.push_back(v);
        }
      }
    }
    ++next;
  }
  return comp;
}

// Two-way Ncut from a 0/1 side vector, via cut and degrees.
double two_way_ncut(const Eigen::MatrixXd& W, const Eigen::VectorXd& degree, const std::vector<char>& side) {
  double cut_ab = 0.0;
  double assoc_a = 0.0;
  double assoc_b = 0.0;
  const int n = static_cast<int>(W.rows());
  for (int u = 0; u < n; ++u) {
    (side[u] ? assoc_b : assoc_a) += degree(u);
    if (side[u]) continue;
    for (int v = 0; v < n; ++v)
      if (side[v]) cut_ab += W(u, v);
  }
  double value = 0.0;
  if (assoc_a > 0.0) value += cut_ab / assoc_a;
  if (assoc_b > 0.0) value += cut_ab / assoc_b;
  return value;
}

Eigen::MatrixXd submatrix(const Eigen::MatrixXd& W, const std::vector<int>& nodes) {
  const auto m = static_cast<Eigen::Index>(nodes.size());
  Eigen::MatrixXd S(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) S(i, j) = W(nodes[i], nodes[j]);
  return S;
}

struct Split {
  double ncut = 0.0;
  std::vector<char> side;
};

// Ncut bookkeeping for a two-way split, updated in O(n) per node move.
class SplitState {
 public:
  SplitState(const Eigen::MatrixXd& W, const Eigen::VectorXd& degree, std::vector<char> side)
      : W_(W), degree_(degree), side_(std::move(side)), to_a_(Eigen::VectorXd::Zero(W.rows())) {
    const auto n = W.rows();
    for (Eigen::Index u = 0; u < n; ++u) {
      if (side_[u] == 0) {
        assoc_a_ += degree(u);
        to_a_ += W.col(u);
      } else {
        assoc_b_ += degree(u);
      }
    }
    for (Eigen::Index u = 0; u < n; ++u)
      if (side_[u] == 1) cut_ += to_a_(u);
    count_a_ = static_cast<int>(std::count(side_.begin(), side_.end(), 0));
  }

  double value() const { return ncut(cut_, assoc_a_, assoc_b_); }

  /// Ncut after moving u to the other side, or +inf if a side would empty.
  double value_if_moved(int u) const {
    const int n = static_cast<int>(side_.size());
    if ((side_[u] == 0 && count_a_ == 1) || (side_[u] == 1 && count_a_ == n - 1)) return kInf;
    const double to_b = degree_(u) - to_a_(u);
    if (side_[u] == 0) return ncut(cut_ - to_b + to_a_(u), assoc_a_ - degree_(u), assoc_b_ + degree_(u));
    return ncut(cut_ - to_a_(u) + to_b, assoc_a_ + degree_(u), assoc_b_ - degree_(u));
  }

  void move(int u) {
    const double to_b = degree_(u) - to_a_(u);
    if (side_[u] == 0) {
      cut_ += to_a_(u) - to_b;
      assoc_a_ -= degree_(u);
      assoc_b_ += degree_(u);
      to_a_ -= W_.col(u);
      --count_a_;
    } else {
      cut_ += to_b - to_a_(u);
      assoc_a_ += degree_(u);
      assoc_b_ -= degree_(u);
      to_a_ += W_.col(u);
      ++count_a_;
    }
    side_[u] ^= 1;
  }

  const std::vector<char>& side() const { return side_; }

 private:
  static constexpr double kInf = std::numeric_limits<double>::infinity();
  static double ncut(double cut, double a, double b) {
    double v = 0.0;
    if (a > 0.0) v += cut / a;
    if (b > 0.0) v += cut / b;
    return v;
  }

  const Eigen::MatrixXd& W_;
  const Eigen::VectorXd& degree_;
  std::vector<char> side_;
  Eigen::VectorXd to_a_;
  double cut_ = 0.0;
  double assoc_a_ = 0.0;
  double assoc_b_ = 0.0;
  int count_a_ = 0;
};

// Fiduccia-Mattheyses passes: every node moves once per pass, best move
// first even when it raises the Ncut; the best prefix of the pass is kept.
Split refine(const Eigen::MatrixXd& W, const Eigen::VectorXd& degree, std::vector<char> side) {
  const int n = static_cast<int>(W.rows());
  SplitState state(W, degree, std::move(side));
  double best = state.value();
  for (int pass = 0; pass < n; ++pass) {
    SplitState trial = state;
    std::vector<char> locked(static_cast<std::size_t>(n), 0);
    std::vector<int> moves;
    double pass_best = best;
    std::size_t keep = 0;
    for (int step = 0; step < n; ++step) {
      int pick = -1;
      double pick_value = std::numeric_limits<double>::infinity();
      for (int u = 0; u < n; ++u) {
        if (locked[u]) continue;
        const double v = trial.value_if_moved(u);
        if (v < pick_value) {
          pick_value = v;
          pick = u;
        }
      }
      if (pick < 0) break;
      trial.move(pick);
      locked[pick] = 1;
      moves.push_back(pick);
      if (pick_value < pass_best - 1e-12) {
        pass_best = pick_value;
        keep = moves.size();
      }
    }
    if (keep == 0) break;
    for (std::size_t i = 0; i < keep; ++i) state.move(moves[i]);
    best = state.value();
  }
  Split out;
  out.side = state.side();
  out.ncut = best;
  return out;
}

// Generalized eigenvectors D^-1/2 u_i of the normalized Laplacian for the
// smallest non-trivial eigenvalues, sign-fixed.
std::vector<Eigen::VectorXd> spectral_vectors(const Eigen::MatrixXd& W, const Eigen::VectorXd& degree, int count) {
  const Eigen::Index n = W.rows();
  const Eigen::VectorXd inv_sqrt = degree.array().rsqrt();
  const Eigen::MatrixXd L = Eigen::MatrixXd::Identity(n, n) - inv_sqrt.asDiagonal() * W * inv_sqrt.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(L);
  if (solver.info() != Eigen::Success) throw Error("eigen decomposition failed");
  std::vector<Eigen::VectorXd> out;
  for (Eigen::Index i = 1; i < n && static_cast<int>(out.size()) < count; ++i) {
    Eigen::VectorXd v = inv_sqrt.asDiagonal() * solver.eigenvectors().col(i);
    Eigen::Index pivot = 0;
    v.cwiseAbs().maxCoeff(&pivot);
    if (v(pivot) < 0.0) v = -v;
    out.push_back(std::move(v));
  }
  return out;
}

constexpr int kSweepVectors = 3;

Split best_split(const Eigen::MatrixXd& W) {
  const int n = static_cast<int>(W.rows());
  Split out;
  out.side.assign(static_cast<std::size_t>(n), 0);
  const auto comp = components(W);
  if (*std::max_element(comp.begin(), comp.end()) > 0) {
    for (int u = 0; u < n; ++u) out.side[u] = comp[u] == 0 ? 0 : 1;
    out.ncut = 0.0;
    return out;
  }
  if (n == 2) {
    out.side[1] = 1;
    out.ncut = two_way_ncut(W, W.rowwise().sum(), out.side);
    return out;
  }

  const Eigen::VectorXd degree = W.rowwise().sum();
  out.ncut = std::numeric_limits<double>::infinity();
  for (const Eigen::VectorXd& vec : spectral_vectors(W, degree, kSweepVectors)) {
    // Sweep every distinct value as a threshold.
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return vec(a) < vec(b); });
    double best = std::numeric_limits<double>::infinity();
    std::vector<char> side(static_cast<std::size_t>(n), 1);
    std::vector<char> start;
    for (int i = 0; i + 1 < n; ++i) {
      side[order[i]] = 0;
      if (vec(order[i]) == vec(order[i + 1])) continue;
      const double value = two_way_ncut(W, degree, side);
      if (value < best) {
        best = value;
        start = side;
      }
    }
    if (start.empty()) {
      // Constant vector (fully symmetric input): split off the first node.
      start.assign(static_cast<std::size_t>(n), 1);
      start[0] = 0;
    }
    Split s = refine(W, degree, std::move(start));
    if (s.ncut < out.ncut - 1e-12) out = std::move(s);
  }
  return out;
}

}  // namespace

Fiedler fiedler(const Eigen::MatrixXd& W) {
  check_graph(W);
  const Eigen::Index n = W.rows();
  if (n < 2) throw InvalidArgument("Fiedler vector needs at least two nodes");
  const Eigen::VectorXd degree = W.rowwise().sum();
  if ((degree.array() <= 0.0).any()) throw InvalidArgument("Fiedler vector needs positive degrees");
  const Eigen::VectorXd inv_sqrt = degree.array().rsqrt();
  const Eigen::MatrixXd L =
      Eigen::MatrixXd::Identity(n, n) - inv_sqrt.asDiagonal() * W * inv_sqrt.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(L);
  if (solver.info() != Eigen::Success) throw Error("eigen decomposition failed");
  Fiedler f;
  f.lambda = solver.eigenvalues()(1);
  f.vector = inv_sqrt.asDiagonal() * solver.eigenvectors().col(1);
  // Fix the sign so results do not depend on solver internals.
  Eigen::Index pivot = 0;
  f.vector.cwiseAbs().maxCoeff(&pivot);
  if (f.vector(pivot) < 0.0) f.vector = -f.vector;
  return f;
}

Partition bipartition(const Eigen::MatrixXd& W) {
  check_graph(W);
  if (W.rows() < 2) throw InvalidArgument("bipartition needs at least two nodes");
  const Split s = best_split(W);
  Partition p;
  p.K = 2;
  for (char c : s.side) p.cluster_of.push_back(c);
  return p;
}

Partition partition_ncut(const Eigen::MatrixXd& W, int K) {
  check_graph(W);
  const int n = static_cast<int>(W.rows());
  if (K < 1) throw InvalidArgument("partition_ncut: K must be at least 1");
  if (K > n) throw InvalidArgument("partition_ncut: K = " + std::to_string(K) + " exceeds " + std::to_string(n) + " nodes");

  const Eigen::VectorXd degree = W.rowwise().sum();
  std::vector<std::vector<int>> clusters;
  std::vector<int> connected;
  std::vector<int> isolated;
  for (int u = 0; u < n; ++u) (degree(u) > 0.0 ? connected : isolated).push_back(u);
  if (!connected.empty()) clusters.push_back(connected);
  for (int u : isolated) clusters.push_back({u});
  // Too many singletons: fold the lowest-index ones into cluster 0.
  while (static_cast<int>(clusters.size()) > K) {
    auto& first = clusters[0];
    const int u = clusters[1][0];
    first.insert(std::upper_bound(first.begin(), first.end(), u), u);
    clusters.erase(clusters.begin() + 1);
  }

  while (static_cast<int>(clusters.size()) < K) {
    int chosen = -1;
    Split chosen_split;
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      if (clusters[c].size() < 2) continue;
      Split s = best_split(submatrix(W, clusters[c]));
      if (chosen < 0 || s.ncut < chosen_split.ncut) {
        chosen = static_cast<int>(c);
        chosen_split = std::move(s);
      }
    }
    std::vector<int> a;
    std::vector<int> b;
    for (std::size_t i = 0; i < clusters[chosen].size(); ++i)
      (chosen_split.side[i] ? b : a).push_back(clusters[chosen][i]);
    clusters[chosen] = std::move(a);
    clusters.insert(clusters.begin() + chosen + 1, std::move(b));
  }

  Partition p;
  p.K = K;
  p.cluster_of.assign(static_cast<std::size_t>(n), 0);
  // Cluster ids by lowest member so output does not depend on split order.
  std::sort(clusters.begin(), clusters.end(), [](const auto& x, const auto& y) { return x.front() < y.front(); });
  for (std::size_t c = 0; c < clusters.size(); ++c)
    for (int u : clusters[c]) p.cluster_of[u] = static_cast<int>(c);
  return p;
}

Eigen::MatrixXd sentence_similarity_graph(const Conversation& conversation, TermWeighting weighting) {
  const auto n = static_cast<Eigen::Index>(conversation.sentences.size());
  std::vector<TermVector> vectors;
  const TermVector idf = weighting == TermWeighting::TfIdf ? sentence_idf(conversation.sentences) : TermVector{};
  for (const auto& s : conversation.sentences) {
    auto tf = term_frequencies(s);
    vectors.push_back(weighting == TermWeighting::TfIdf ? weight_by(std::move(tf), idf) : std::move(tf));
  }
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) W(i, j) = W(j, i) = cosine(vectors[i], vectors[j]);
  return W;
}

Segmentation mb_segment(const Conversation& conversation, int K, TermWeighting weighting) {
  if (conversation.sentences.empty()) throw InvalidArgument("mb_segment: conversation has no sentences");
  const Partition p = partition_ncut(sentence_similarity_graph(conversation, weighting), K);
  Segmentation seg = Segmentation::from_labels(p.cluster_of);
  seg.K = K;
  return seg;
}

}  // namespace convtopic
