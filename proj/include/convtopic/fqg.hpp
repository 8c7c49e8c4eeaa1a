#ifndef CONVTOPIC_FQG_HPP
#define CONVTOPIC_FQG_HPP

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "convtopic/corpus.hpp"

namespace convtopic {

enum class FragmentKind { New, Quoted };

struct FragmentSource {
  std::string comment_id;
  FragmentKind kind = FragmentKind::New;
  int depth = 0;

  bool operator==(const FragmentSource&) const = default;
};

/// A distinct span of text. New-text fragments own conversation sentences;
/// fragments built from quotations whose origin is not in the conversation
/// own none.
struct Fragment {
  int id = 0;
  std::vector<int> sentence_ids;
  FragmentSource source;
  std::string text;

  bool operator==(const Fragment&) const = default;
};

/// Directed graph of fragments. An edge (from, to) means fragment `from`
/// is a likely reply to fragment `to`; edges always point back in time.
class FragmentQuotationGraph {
 public:
  FragmentQuotationGraph() = default;
  FragmentQuotationGraph(std::vector<Fragment> nodes, std::set<std::pair<int, int>> edges);

  const std::vector<Fragment>& nodes() const { return nodes_; }
  const std::set<std::pair<int, int>>& edges() const { return edges_; }
  bool empty() const { return nodes_.empty(); }
  std::size_t size() const { return nodes_.size(); }

  bool has_node(int fragment_id) const;
  const Fragment& node(int fragment_id) const;
  /// Position of a fragment in nodes(), or -1.
  int index_of(int fragment_id) const;
  bool has_edge(int from, int to) const { return edges_.count({from, to}) > 0; }

  /// Fragment id holding a sentence, or -1.
  int fragment_of_sentence(int sentence_id) const;

  /// Fragments this one replies to / fragments replying to this one.
  std::vector<int> replies_to(int fragment_id) const;
  std::vector<int> replied_by(int fragment_id) const;

  /// Shortest path length following edge directions, trying both
  /// orientations; -1 if neither endpoint reaches the other.
  int directed_distance(int a, int b) const;
  /// Shortest path length ignoring directions; -1 if disconnected.
  int undirected_distance(int a, int b) const;

  /// Graphviz DOT; node label = id plus the first 40 characters of text.
  std::string to_dot() const;

  bool operator==(const FragmentQuotationGraph&) const = default;

 private:
  int bfs(int from, int to, bool directed) const;

  std::vector<Fragment> nodes_;
  std::set<std::pair<int, int>> edges_;
};

struct FqgOptions {
  /// Stemmed-token Jaccard at or above which two spans are the same text.
  double identity_threshold = 0.8;
  /// Containment of the shorter span at or above which a partial quote
  /// still matches.
  double containment_threshold = 0.8;
};

FragmentQuotationGraph build_fqg(const Conversation& conversation, const FqgOptions& options = {});

/// Maximal root-to-leaf paths. Roots are fragments that reply to nothing;
/// a path descends from a fragment to the fragments replying to it. Throws
/// StructuralError on a cycle.
std::vector<std::vector<int>> extract_paths(const FragmentQuotationGraph& graph);

/// Restriction of the graph to a sentence subset; fragments left without
/// sentences are dropped together with their edges.
FragmentQuotationGraph project_fqg(const FragmentQuotationGraph& graph, const std::set<int>& sentence_ids);

}  // namespace convtopic

#endif  // CONVTOPIC_FQG_HPP
