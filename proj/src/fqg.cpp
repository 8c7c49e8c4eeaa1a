#include "convtopic/fqg.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <sstream>

#include "convtopic/error.hpp"

namespace convtopic {

FragmentQuotationGraph::FragmentQuotationGraph(std::vector<Fragment> nodes, std::set<std::pair<int, int>> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
  for (const auto& [from, to] : edges_) {
    if (from == to) throw InvalidArgument("fragment graph: self edge on " + std::to_string(from));
    if (!has_node(from) || !has_node(to)) throw InvalidArgument("fragment graph: edge endpoint missing");
  }
}

int FragmentQuotationGraph::index_of(int fragment_id) const {
  // Nodes are kept sorted by id.
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), fragment_id,
                             [](const Fragment& f, int id) { return f.id < id; });
  if (it == nodes_.end() || it->id != fragment_id) return -1;
  return static_cast<int>(it - nodes_.begin());
}

bool FragmentQuotationGraph::has_node(int fragment_id) const { return index_of(fragment_id) >= 0; }

const Fragment& FragmentQuotationGraph::node(int fragment_id) const {
  const int i = index_of(fragment_id);
  if (i < 0) throw InvalidArgument("fragment graph: no fragment " + std::to_string(fragment_id));
  return nodes_[static_cast<std::size_t>(i)];
}

int FragmentQuotationGraph::fragment_of_sentence(int sentence_id) const {
  for (const auto& f : nodes_) {
    if (std::find(f.sentence_ids.begin(), f.sentence_ids.end(), sentence_id) != f.sentence_ids.end()) return f.id;
  }
  return -1;
}

std::vector<int> FragmentQuotationGraph::replies_to(int fragment_id) const {
  std::vector<int> out;
  for (auto it = edges_.lower_bound({fragment_id, INT32_MIN}); it != edges_.end() && it->first == fragment_id; ++it)
    out.push_back(it->second);
  return out;
}

std::vector<int> FragmentQuotationGraph::replied_by(int fragment_id) const {
  std::vector<int> out;
  for (const auto& [from, to] : edges_)
    if (to == fragment_id) out.push_back(from);
  return out;
}

int FragmentQuotationGraph::bfs(int from, int to, bool directed) const {
  if (!has_node(from) || !has_node(to)) return -1;
  if (from == to) return 0;
  std::map<int, int> dist{{from, 0}};
  std::deque<int> queue{from};
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    std::vector<int> next = replies_to(u);
    if (!directed) {
      auto back = replied_by(u);
      next.insert(next.end(), back.begin(), back.end());
    }
    for (int v : next) {
      if (dist.count(v)) continue;
      dist[v] = dist[u] + 1;
      if (v == to) return dist[v];
      queue.push_back(v);
    }
  }
  return -1;
}

int FragmentQuotationGraph::directed_distance(int a, int b) const {
  const int ab = bfs(a, b, true);
  const int ba = bfs(b, a, true);
  if (ab < 0) return ba;
  if (ba < 0) return ab;
  return std::min(ab, ba);
}

int FragmentQuotationGraph::undirected_distance(int a, int b) const { return bfs(a, b, false); }

std::string FragmentQuotationGraph::to_dot() const {
  std::ostringstream out;
  out << "digraph fqg {\n";
  for (const auto& f : nodes_) {
    std::string label = f.text.substr(0, 40);
    std::string escaped;
    for (char c : label) {
      if (c == '"' || c == '\\') escaped += '\\';
      escaped += c;
    }
    out << "  f" << f.id << " [label=\"" << f.id << ": " << escaped << "\"];\n";
  }
  for (const auto& [from, to] : edges_) out << "  f" << from << " -> f" << to << ";\n";
  out << "}\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Construction

namespace {

struct Run {
  int comment = 0;
  int depth = 0;
  std::string comment_id;
  std::vector<int> units;  // occurrences in source order
};

struct Unit {
  int owner_run = 0;
  int sentence_id = -1;  // -1 for quoted text with no origin in the thread
  std::vector<std::string> stems;  // sorted, unique
  std::string text;
  std::vector<int> quoted_in;  // quoted runs that reproduce this unit
};

std::vector<std::string> stem_set(const std::vector<Token>& tokens) {
  std::vector<std::string> out;
  for (const auto& t : tokens) out.push_back(t.stem);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::size_t intersection_size(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::size_t n = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++n;
      ++i;
      ++j;
    }
  }
  return n;
}

}  // namespace

FragmentQuotationGraph build_fqg(const Conversation& conversation, const FqgOptions& options) {
  const WordSet no_stopwords;
  std::vector<Run> runs;
  std::vector<Unit> units;
  std::vector<std::vector<int>> comment_runs(conversation.comments.size());

  // Units are origin candidates; `origin_limit` tracks which are visible to
  // quotations in later comments.
  for (std::size_t ci = 0; ci < conversation.comments.size(); ++ci) {
    const auto& comment = conversation.comments[ci];
    const auto line_runs = comment.runs();
    const int first_unit_of_comment = static_cast<int>(units.size());
    for (std::size_t r = 0; r < line_runs.size(); ++r) {
      Run run;
      run.comment = static_cast<int>(ci);
      run.depth = line_runs[r].depth;
      run.comment_id = comment.id;
      const int run_id = static_cast<int>(runs.size());
      if (run.depth == 0) {
        for (int sid : comment.sentence_ids) {
          const auto& s = conversation.sentences[static_cast<std::size_t>(sid)];
          if (s.run_index != static_cast<int>(r)) continue;
          Unit u;
          u.owner_run = run_id;
          u.sentence_id = sid;
          u.stems = stem_set(s.tokens);
          u.text = s.text;
          run.units.push_back(static_cast<int>(units.size()));
          units.push_back(std::move(u));
        }
      } else {
        for (const auto& paragraph : line_runs[r].paragraphs) {
          for (const auto& piece : split_sentences(paragraph)) {
            auto stems = stem_set(tokenize(piece, no_stopwords));
            if (stems.empty()) continue;
            int best = -1;
            double best_jaccard = -1.0;
            double best_containment = -1.0;
            for (int ui = 0; ui < static_cast<int>(units.size()); ++ui) {
              const Unit& cand = units[static_cast<std::size_t>(ui)];
              // New text is only a valid origin if written in an earlier comment.
              if (cand.sentence_id >= 0 && ui >= first_unit_of_comment) continue;
              if (cand.stems.empty()) continue;
              const double inter = static_cast<double>(intersection_size(stems, cand.stems));
              const double uni = static_cast<double>(stems.size() + cand.stems.size()) - inter;
              const double jaccard = inter / uni;
              const double containment = inter / static_cast<double>(std::min(stems.size(), cand.stems.size()));
              if (jaccard > best_jaccard || (jaccard == best_jaccard && containment > best_containment)) {
                best = ui;
                best_jaccard = jaccard;
                best_containment = containment;
              }
            }
            const bool matched = best >= 0 && (best_jaccard >= options.identity_threshold ||
                                               best_containment >= options.containment_threshold);
            if (matched) {
              auto& q = units[static_cast<std::size_t>(best)].quoted_in;
              if (std::find(q.begin(), q.end(), run_id) == q.end()) q.push_back(run_id);
              run.units.push_back(best);
            } else {
              Unit u;
              u.owner_run = run_id;
              u.stems = std::move(stems);
              u.text = piece;
              run.units.push_back(static_cast<int>(units.size()));
              units.push_back(std::move(u));
            }
          }
        }
      }
      comment_runs[ci].push_back(run_id);
      runs.push_back(std::move(run));
    }
  }

  // Fragments: maximal stretches of a run's own units quoted by exactly the
  // same set of runs.
  std::vector<Fragment> fragments;
  std::vector<int> fragment_of_unit(units.size(), -1);
  std::vector<std::vector<int>> own_fragments(runs.size());
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const Run& run = runs[r];
    const std::vector<int>* prev_signature = nullptr;
    for (int ui : run.units) {
      Unit& u = units[static_cast<std::size_t>(ui)];
      if (u.owner_run != static_cast<int>(r)) continue;
      std::sort(u.quoted_in.begin(), u.quoted_in.end());
      if (prev_signature == nullptr || *prev_signature != u.quoted_in) {
        Fragment f;
        f.id = static_cast<int>(fragments.size());
        f.source = FragmentSource{run.comment_id, run.depth == 0 ? FragmentKind::New : FragmentKind::Quoted, run.depth};
        own_fragments[r].push_back(f.id);
        fragments.push_back(std::move(f));
      }
      Fragment& f = fragments.back();
      if (u.sentence_id >= 0) f.sentence_ids.push_back(u.sentence_id);
      if (!f.text.empty()) f.text += ' ';
      f.text += u.text;
      fragment_of_unit[static_cast<std::size_t>(ui)] = f.id;
      prev_signature = &u.quoted_in;
    }
  }

  auto referenced = [&](int run_id) {
    std::vector<int> out;
    for (int ui : runs[static_cast<std::size_t>(run_id)].units) {
      const int f = fragment_of_unit[static_cast<std::size_t>(ui)];
      if (f >= 0 && std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
    }
    return out;
  };

  std::set<std::pair<int, int>> edges;
  auto link = [&](const std::vector<int>& from, const std::vector<int>& to) {
    for (int a : from)
      for (int b : to)
        if (a != b) edges.emplace(a, b);
  };

  for (std::size_t ci = 0; ci < conversation.comments.size(); ++ci) {
    const auto& ids = comment_runs[ci];
    const bool quotes = std::any_of(ids.begin(), ids.end(),
                                    [&](int r) { return runs[static_cast<std::size_t>(r)].depth > 0; });
    if (quotes) {
      // New text replies to the depth-1 quotations directly above and below it.
      for (std::size_t p = 0; p < ids.size(); ++p) {
        const Run& run = runs[static_cast<std::size_t>(ids[p])];
        if (run.depth != 0) continue;
        for (int q : {static_cast<int>(p) - 1, static_cast<int>(p) + 1}) {
          if (q < 0 || q >= static_cast<int>(ids.size())) continue;
          if (runs[static_cast<std::size_t>(ids[static_cast<std::size_t>(q)])].depth != 1) continue;
          link(own_fragments[static_cast<std::size_t>(ids[p])], referenced(ids[static_cast<std::size_t>(q)]));
        }
      }
      continue;
    }
    const int parent = conversation.parent_index(static_cast<int>(ci));
    if (parent < 0) continue;
    std::vector<int> mine;
    std::vector<int> theirs;
    for (int r : ids)
      if (runs[static_cast<std::size_t>(r)].depth == 0)
        for (int f : own_fragments[static_cast<std::size_t>(r)]) mine.push_back(f);
    for (int r : comment_runs[static_cast<std::size_t>(parent)])
      if (runs[static_cast<std::size_t>(r)].depth == 0)
        for (int f : own_fragments[static_cast<std::size_t>(r)]) theirs.push_back(f);
    link(mine, theirs);
  }

  return FragmentQuotationGraph(std::move(fragments), std::move(edges));
}

std::vector<std::vector<int>> extract_paths(const FragmentQuotationGraph& graph) {
  // Kahn's algorithm over reply edges to reject cycles up front.
  std::map<int, int> pending;
  for (const auto& f : graph.nodes()) pending[f.id] = 0;
  for (const auto& [from, to] : graph.edges()) ++pending[from];
  std::deque<int> ready;
  for (const auto& [id, n] : pending)
    if (n == 0) ready.push_back(id);
  std::size_t visited = 0;
  while (!ready.empty()) {
    const int u = ready.front();
    ready.pop_front();
    ++visited;
    for (int v : graph.replied_by(u))
      if (--pending[v] == 0) ready.push_back(v);
  }
  if (visited != graph.size()) throw StructuralError("fragment graph contains a cycle");

  constexpr std::size_t kMaxPaths = 1u << 20;
  std::vector<std::vector<int>> paths;
  std::vector<int> current;
  auto descend = [&](auto&& self, int node) -> void {
    current.push_back(node);
    const auto children = graph.replied_by(node);
    if (children.empty()) {
      if (paths.size() >= kMaxPaths) throw InvalidArgument("fragment graph has too many paths");
      paths.push_back(current);
    }
    for (int c : children) self(self, c);
    current.pop_back();
  };
  for (const auto& f : graph.nodes()) {
    if (graph.replies_to(f.id).empty()) descend(descend, f.id);
  }
  return paths;
}

FragmentQuotationGraph project_fqg(const FragmentQuotationGraph& graph, const std::set<int>& sentence_ids) {
  std::vector<Fragment> kept;
  std::set<int> alive;
  for (const auto& f : graph.nodes()) {
    Fragment g = f;
    g.sentence_ids.clear();
    for (int s : f.sentence_ids)
      if (sentence_ids.count(s)) g.sentence_ids.push_back(s);
    if (g.sentence_ids.empty()) continue;
    if (g.sentence_ids.size() != f.sentence_ids.size()) g.text.clear();
    alive.insert(g.id);
    kept.push_back(std::move(g));
  }
  std::set<std::pair<int, int>> edges;
  for (const auto& e : graph.edges())
    if (alive.count(e.first) && alive.count(e.second)) edges.insert(e);
  return FragmentQuotationGraph(std::move(kept), std::move(edges));
}

}  // namespace convtopic
