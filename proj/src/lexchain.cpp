#include "convtopic/lexchain.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "convtopic/error.hpp"
#include "convtopic/graphcut.hpp"
#include "convtopic/similarity.hpp"

namespace convtopic {

std::vector<LexicalChain> build_chains(const std::vector<const Sentence*>& sentences, int hiatus) {
  if (hiatus < 1) throw InvalidArgument("hiatus must be at least 1");
  std::map<std::string, std::map<int, int>> positions;
  for (std::size_t i = 0; i < sentences.size(); ++i)
    for (const auto& t : sentences[i]->tokens)
      if (!t.is_stopword) ++positions[t.stem][static_cast<int>(i)];

  const double n = static_cast<double>(sentences.size());
  std::vector<LexicalChain> chains;
  auto finish = [&](LexicalChain& c) {
    c.first = c.occurrences.front();
    c.last = c.occurrences.back();
    const double span = static_cast<double>(c.last - c.first + 1);
    c.score = std::max(0.0, c.freq * std::log(n / span));
    chains.push_back(std::move(c));
  };
  for (const auto& [stem, counts] : positions) {
    LexicalChain current;
    current.stem = stem;
    for (const auto& [pos, count] : counts) {
      if (!current.occurrences.empty() && pos - current.occurrences.back() > hiatus) {
        finish(current);
        current = LexicalChain{};
        current.stem = stem;
      }
      current.occurrences.push_back(pos);
      current.freq += count;
    }
    finish(current);
  }
  return chains;
}

std::vector<LexicalChain> build_chains(const std::vector<Sentence>& sentences, int hiatus) {
  std::vector<const Sentence*> ptrs;
  for (const auto& s : sentences) ptrs.push_back(&s);
  return build_chains(ptrs, hiatus);
}

Eigen::VectorXd chain_vector(Window w, const std::vector<LexicalChain>& chains) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(chains.size()));
  for (std::size_t i = 0; i < chains.size(); ++i)
    if (chains[i].overlaps(w.from, w.to)) v(static_cast<Eigen::Index>(i)) = chains[i].score;
  return v;
}

double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na <= 0.0 || nb <= 0.0) return 0.0;
  return std::clamp(a.dot(b) / (na * nb), 0.0, 1.0);
}

double lexcoh(Window x, Window y, const std::vector<LexicalChain>& chains) {
  if (x.from > x.to || y.from > y.to) throw InvalidArgument("lexcoh: empty window");
  return cosine(chain_vector(x, chains), chain_vector(y, chains));
}

namespace {

// Rounded so that rescaling chain scores cannot reorder near-ties.
double quantize(double v) { return std::round(v * 1e12) / 1e12; }

}  // namespace

std::vector<double> lcseg_cohesion(int n, const std::vector<LexicalChain>& chains, const LcsegParams& params) {
  if (params.window < 1) throw InvalidArgument("LCSeg window must be at least 1");
  std::vector<double> out;
  for (int i = 1; i < n; ++i) {
    const Window x{std::max(0, i - params.window), i - 1};
    const Window y{i, std::min(n - 1, i + params.window - 1)};
    out.push_back(quantize(lexcoh(x, y, chains)));
  }
  return out;
}

std::vector<int> lcseg_boundaries(int n, const std::vector<LexicalChain>& chains, int K, const LcsegParams& params) {
  if (K < 1) throw InvalidArgument("LCSeg: K must be at least 1");
  if (K > n) throw InvalidArgument("LCSeg: K = " + std::to_string(K) + " exceeds " + std::to_string(n) + " sentences");
  if (params.smoothing < 1) throw InvalidArgument("LCSeg smoothing width must be at least 1");
  if (K == 1) return {};

  const std::vector<double> raw = lcseg_cohesion(n, chains, params);
  const int gaps = static_cast<int>(raw.size());
  const int half = params.smoothing / 2;
  std::vector<double> s(raw.size());
  for (int g = 0; g < gaps; ++g) {
    const int lo = std::max(0, g - half);
    const int hi = std::min(gaps - 1, g + half);
    double sum = 0.0;
    for (int j = lo; j <= hi; ++j) sum += raw[j];
    s[g] = quantize(sum / (hi - lo + 1));
  }

  struct Candidate {
    int gap;
    double depth;
  };
  std::vector<Candidate> minima;
  for (int g = 0; g < gaps; ++g) {
    if (g > 0 && s[g - 1] < s[g]) continue;
    if (g + 1 < gaps && s[g + 1] < s[g]) continue;
    int l = g;
    while (l > 0 && s[l - 1] >= s[l]) --l;
    int r = g;
    while (r + 1 < gaps && s[r + 1] >= s[r]) ++r;
    const double depth = 0.5 * ((s[l] - s[g]) + (s[r] - s[g]));
    if (depth > 0.0) minima.push_back({g, depth});
  }
  std::stable_sort(minima.begin(), minima.end(), [](const Candidate& a, const Candidate& b) { return a.depth > b.depth; });

  std::vector<char> taken(static_cast<std::size_t>(gaps), 0);
  std::vector<int> chosen;
  for (const auto& c : minima) {
    if (static_cast<int>(chosen.size()) == K - 1) break;
    chosen.push_back(c.gap);
    taken[c.gap] = 1;
  }
  if (static_cast<int>(chosen.size()) < K - 1) {
    std::vector<int> rest;
    for (int g = 0; g < gaps; ++g)
      if (!taken[g]) rest.push_back(g);
    std::stable_sort(rest.begin(), rest.end(), [&](int a, int b) { return raw[a] < raw[b]; });
    for (int g : rest) {
      if (static_cast<int>(chosen.size()) == K - 1) break;
      chosen.push_back(g);
    }
  }
  std::vector<int> boundaries;
  for (int g : chosen) boundaries.push_back(g + 1);
  std::sort(boundaries.begin(), boundaries.end());
  return boundaries;
}

Segmentation lcseg_segment(const std::vector<const Sentence*>& sentences, int K, const LcsegParams& params) {
  const int n = static_cast<int>(sentences.size());
  if (n == 0) throw InvalidArgument("LCSeg: no sentences");
  const auto boundaries = lcseg_boundaries(n, build_chains(sentences, params.hiatus), K, params);
  Segmentation seg;
  seg.K = K;
  int topic = 0;
  std::size_t next = 0;
  for (int i = 0; i < n; ++i) {
    if (next < boundaries.size() && boundaries[next] == i) {
      ++topic;
      ++next;
    }
    seg.topic_of.push_back(topic);
  }
  return seg;
}

Segmentation lcseg_segment(const Conversation& conversation, int K, const LcsegParams& params) {
  std::vector<const Sentence*> ptrs;
  for (const auto& s : conversation.sentences) ptrs.push_back(&s);
  return lcseg_segment(ptrs, K, params);
}

std::vector<std::vector<int>> path_sentences(const FragmentQuotationGraph& fqg) {
  std::vector<std::vector<int>> out;
  for (const auto& path : extract_paths(fqg)) {
    std::vector<int> ids;
    for (int f : path) {
      const auto& s = fqg.node(f).sentence_ids;
      ids.insert(ids.end(), s.begin(), s.end());
    }
    if (!ids.empty()) out.push_back(std::move(ids));
  }
  return out;
}

Eigen::MatrixXd consolidation_graph(const Conversation& conversation, const std::vector<std::vector<int>>& paths,
                                    const std::vector<Segmentation>& path_segmentations) {
  if (paths.size() != path_segmentations.size()) throw InvalidArgument("one segmentation per path expected");
  const auto n = static_cast<Eigen::Index>(conversation.sentences.size());
  Eigen::MatrixXd count = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t p = 0; p < paths.size(); ++p) {
    const auto& ids = paths[p];
    const auto& seg = path_segmentations[p];
    if (seg.size() != ids.size()) throw InvalidArgument("path segmentation size mismatch");
    for (std::size_t a = 0; a < ids.size(); ++a)
      for (std::size_t b = a + 1; b < ids.size(); ++b)
        if (seg.topic_of[a] == seg.topic_of[b] && ids[a] != ids[b]) {
          count(ids[a], ids[b]) += 1.0;
          count(ids[b], ids[a]) += 1.0;
        }
  }
  std::vector<TermVector> tf;
  for (const auto& s : conversation.sentences) tf.push_back(term_frequencies(s));
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      W(i, j) = W(j, i) = count(i, j) > 0.0 ? count(i, j) : cosine(tf[i], tf[j]);
  return W;
}

Segmentation lcseg_fqg_segment(const Conversation& conversation, const FragmentQuotationGraph& fqg, int K,
                               const LcsegParams& params) {
  const int n = static_cast<int>(conversation.sentences.size());
  if (K < 1 || K > n) throw InvalidArgument("LCSeg+FQG: K must lie in [1, " + std::to_string(n) + "]");
  const auto paths = path_sentences(fqg);
  if (paths.empty()) throw InvalidArgument("LCSeg+FQG: graph has no sentences");

  auto run = [&](const std::vector<int>& ids, int k) {
    std::vector<const Sentence*> seq;
    for (int id : ids) seq.push_back(&conversation.sentences.at(static_cast<std::size_t>(id)));
    return lcseg_segment(seq, k, params);
  };

  if (paths.size() == 1 && static_cast<int>(paths[0].size()) == n) {
    const Segmentation local = run(paths[0], K);
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < paths[0].size(); ++i) labels[paths[0][i]] = local.topic_of[i];
    Segmentation seg = Segmentation::from_labels(labels);
    seg.K = K;
    return seg;
  }

  double total = 0.0;
  for (const auto& p : paths) total += static_cast<double>(p.size());
  std::vector<Segmentation> segs;
  for (const auto& p : paths) {
    const int len = static_cast<int>(p.size());
    const int k = std::clamp(static_cast<int>(std::lround(K * len / total)), 1, len);
    segs.push_back(run(p, k));
  }
  const Partition part = partition_ncut(consolidation_graph(conversation, paths, segs), K);
  Segmentation seg = Segmentation::from_labels(part.cluster_of);
  seg.K = K;
  return seg;
}

}  // namespace convtopic
