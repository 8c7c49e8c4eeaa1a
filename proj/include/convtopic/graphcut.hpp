#ifndef CONVTOPIC_GRAPHCUT_HPP
#define CONVTOPIC_GRAPHCUT_HPP

#include <Eigen/Dense>
#include <vector>

#include "convtopic/corpus.hpp"
#include "convtopic/segmentation.hpp"

namespace convtopic {

/// Node -> cluster assignment with K non-empty clusters.
struct Partition {
  std::vector<int> cluster_of;
  int K = 0;

  bool operator==(const Partition&) const = default;
};

/// Sum of w(u, v) over u in A, v in B.
template <typename Derived>
typename Derived::Scalar cut(const Eigen::MatrixBase<Derived>& W, const std::vector<int>& A,
                             const std::vector<int>& B) {
  typename Derived::Scalar total(0);
  for (int u : A)
    for (int v : B) total += W(u, v);
  return total;
}

/// Total connection from A to all nodes.
template <typename Derived>
typename Derived::Scalar assoc(const Eigen::MatrixBase<Derived>& W, const std::vector<int>& A) {
  typename Derived::Scalar total(0);
  for (int u : A) total += W.row(u).sum();
  return total;
}

/// Sum over clusters of cut(A_k, V - A_k) / assoc(A_k, V). Clusters with no
/// association contribute 0; K = 1 gives 0.
template <typename Derived>
typename Derived::Scalar ncut_value(const Eigen::MatrixBase<Derived>& W, const Partition& p) {
  using Scalar = typename Derived::Scalar;
  const int n = static_cast<int>(W.rows());
  int k = 0;
  for (int c : p.cluster_of) k = std::max(k, c + 1);
  std::vector<std::vector<int>> members(static_cast<std::size_t>(k));
  std::vector<std::vector<int>> rest(static_cast<std::size_t>(k));
  for (int u = 0; u < n; ++u)
    for (int c = 0; c < k; ++c) (p.cluster_of[static_cast<std::size_t>(u)] == c ? members : rest)[c].push_back(u);
  if (k <= 1) return Scalar(0);
  Scalar total(0);
  for (int c = 0; c < k; ++c) {
    const Scalar a = assoc(W, members[static_cast<std::size_t>(c)]);
    if (a > Scalar(0)) total += cut(W, members[static_cast<std::size_t>(c)], rest[static_cast<std::size_t>(c)]) / a;
  }
  return total;
}

/// Second-smallest solution of (D - W) v = lambda D v.
struct Fiedler {
  double lambda = 0.0;
  Eigen::VectorXd vector;
};

/// Requires every node to have positive degree.
Fiedler fiedler(const Eigen::MatrixXd& W);

/// Best two-way split of a graph by spectral sweep plus single-node
/// refinement. Disconnected graphs split along a component (Ncut 0).
Partition bipartition(const Eigen::MatrixXd& W);

/// Recursive Shi-Malik partition into K clusters. W must be square,
/// symmetric, non-negative with a zero diagonal.
Partition partition_ncut(const Eigen::MatrixXd& W, int K);

template <typename Derived>
Partition partition_ncut(const Eigen::MatrixBase<Derived>& W, int K) {
  return partition_ncut(Eigen::MatrixXd(W.template cast<double>()), K);
}

enum class TermWeighting { Tf, TfIdf };

/// Complete sentence graph under cosine similarity.
Eigen::MatrixXd sentence_similarity_graph(const Conversation& conversation, TermWeighting weighting = TermWeighting::Tf);

/// Malioutov & Barzilay style segmentation without the sequentiality
/// constraint.
Segmentation mb_segment(const Conversation& conversation, int K, TermWeighting weighting = TermWeighting::Tf);

}  // namespace convtopic

#endif  // CONVTOPIC_GRAPHCUT_HPP
