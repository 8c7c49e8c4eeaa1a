#include "convtopic/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "convtopic/error.hpp"
#include "convtopic/porter.hpp"

namespace convtopic {

namespace {

void check_universe(const Segmentation& a, const Segmentation& b) {
  if (a.size() != b.size()) throw InvalidArgument("segmentations cover different sentence sets");
}

}  // namespace

std::vector<int> max_weight_matching(const Eigen::MatrixXd& weights) {
  const auto rows = static_cast<int>(weights.rows());
  const auto cols = static_cast<int>(weights.cols());
  const int n = std::max(rows, cols);
  std::vector<int> out(static_cast<std::size_t>(rows), -1);
  if (n == 0) return out;
  const double top = weights.size() ? weights.maxCoeff() : 0.0;
  // Min-cost square problem; padding cells cost as much as a zero weight.
  auto cost = [&](int i, int j) { return (i < rows && j < cols) ? top - weights(i, j) : top; };

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  for (int j = 1; j <= n; ++j)
    if (p[j] - 1 < rows && j - 1 < cols) out[static_cast<std::size_t>(p[j] - 1)] = j - 1;
  return out;
}

Eigen::MatrixXd overlap_matrix(const Segmentation& a, const Segmentation& b) {
  check_universe(a, b);
  int ka = a.K, kb = b.K;
  for (int t : a.topic_of) ka = std::max(ka, t + 1);
  for (int t : b.topic_of) kb = std::max(kb, t + 1);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(ka, kb);
  for (std::size_t i = 0; i < a.size(); ++i) m(a.topic_of[i], b.topic_of[i]) += 1.0;
  return m;
}

Segmentation without(const Segmentation& seg, const std::vector<char>& excluded) {
  if (excluded.size() != seg.size()) throw InvalidArgument("exclusion mask has the wrong length");
  Segmentation out;
  out.K = seg.K;
  for (std::size_t i = 0; i < seg.size(); ++i)
    if (!excluded[i]) out.topic_of.push_back(seg.topic_of[i]);
  return out;
}

double one_to_one(const Segmentation& a, const Segmentation& b) {
  check_universe(a, b);
  if (a.size() == 0) return 1.0;
  const Eigen::MatrixXd m = overlap_matrix(a, b);
  const auto match = max_weight_matching(m);
  double total = 0.0;
  for (std::size_t i = 0; i < match.size(); ++i)
    if (match[i] >= 0) total += m(static_cast<Eigen::Index>(i), match[i]);
  return total / static_cast<double>(a.size());
}

double loc_k(const Segmentation& a, const Segmentation& b, int k) {
  check_universe(a, b);
  if (k < 1) throw InvalidArgument("loc_k: k must be at least 1");
  std::size_t agree = 0, total = 0;
  const auto n = static_cast<int>(a.size());
  for (int m = 1; m < n; ++m)
    for (int j = std::max(0, m - k); j < m; ++j) {
      ++total;
      if (a.same_topic(m, j) == b.same_topic(m, j)) ++agree;
    }
  return total == 0 ? 1.0 : static_cast<double>(agree) / static_cast<double>(total);
}

double many_to_one(const Segmentation& source, const Segmentation& target) {
  check_universe(source, target);
  if (source.size() == 0) return 1.0;
  const Eigen::MatrixXd m = overlap_matrix(source, target);
  double total = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) total += m.cols() ? m.row(i).maxCoeff() : 0.0;
  return total / static_cast<double>(source.size());
}

double entropy(const Segmentation& seg) {
  if (seg.size() == 0) throw InvalidArgument("entropy of an empty segmentation");
  std::map<int, double> sizes;
  for (int t : seg.topic_of) sizes[t] += 1.0;
  const auto N = static_cast<double>(seg.size());
  double h = 0.0;
  for (const auto& [topic, n] : sizes) {
    const double p = n / N;
    h -= p * std::log2(p);
  }
  return h == 0.0 ? 0.0 : h;
}

Phrase analyze_phrase(std::string_view text, const TextProcessor& text_processor) {
  Phrase p;
  for (const auto& t : text_processor.tokenize(text)) {
    p.stems.push_back(t.stem);
    p.pos.push_back(t.pos);
  }
  return p;
}

SimilarityProvider::SimilarityProvider(std::map<std::pair<std::string, std::string>, double> table)
    : table_(std::move(table)) {
  for (const auto& [pair, value] : table_)
    if (!(value >= 0.0 && value <= 1.0)) throw InvalidArgument("similarity values must lie in [0, 1]");
}

double SimilarityProvider::operator()(const std::string& a, const std::string& b) const {
  if (a == b) return 1.0;
  auto it = table_.find({a, b});
  return it == table_.end() ? 0.0 : it->second;
}

SimilarityProvider parse_similarity_table(std::string_view tsv) {
  std::map<std::pair<std::string, std::string>, double> table;
  int line_no = 0;
  for (const auto& raw : split_lines(tsv)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const auto tab = line.find('\t', start);
      fields.emplace_back(trim(line.substr(start, tab == std::string_view::npos ? tab : tab - start)));
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    if (fields.size() != 3) throw ParseError("similarity table line " + std::to_string(line_no) + ": expected 3 fields");
    double value = 0.0;
    try {
      std::size_t used = 0;
      value = std::stod(fields[2], &used);
      if (used != fields[2].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ParseError("similarity table line " + std::to_string(line_no) + ": bad value '" + fields[2] + "'");
    }
    const std::string a = porter_stem(fields[0]);
    const std::string b = porter_stem(fields[1]);
    table[{a, b}] = value;
    table[{b, a}] = value;
  }
  return SimilarityProvider(std::move(table));
}

SimilarityProvider load_similarity_table(const std::string& path) { return parse_similarity_table(read_file(path)); }

double mutual_overlap(const Phrase& ref, const Phrase& cand) {
  const std::size_t denom = std::max(ref.stems.size(), cand.stems.size());
  if (denom == 0) return 0.0;
  std::map<std::string, int> pool;
  for (const auto& s : ref.stems) ++pool[s];
  std::size_t overlap = 0;
  for (const auto& s : cand.stems)
    if (auto it = pool.find(s); it != pool.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  return static_cast<double>(overlap) / static_cast<double>(denom);
}

double mutual_overlap(std::string_view ref, std::string_view cand, const TextProcessor& tp) {
  return mutual_overlap(analyze_phrase(ref, tp), analyze_phrase(cand, tp));
}

namespace {

void check_scores(const std::vector<ScoredPhrase>& cands) {
  double sum = 0.0;
  for (const auto& c : cands) sum += c.score;
  if (std::abs(sum - 1.0) > 1e-6) throw InvalidArgument("candidate scores must sum to 1");
}

std::vector<std::string> nouns(const Phrase& p) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < p.stems.size(); ++i)
    if (p.pos[i] == Pos::Noun) out.push_back(p.stems[i]);
  return out;
}

}  // namespace

double weighted_mutual_overlap(std::string_view ref, const std::vector<ScoredPhrase>& cands, const TextProcessor& tp) {
  check_scores(cands);
  const Phrase r = analyze_phrase(ref, tp);
  double total = 0.0;
  for (const auto& c : cands) total += mutual_overlap(r, analyze_phrase(c.text, tp)) * c.score;
  return total;
}

double semantic_overlap(const Phrase& ref, const Phrase& cand, const SimilarityProvider& sim) {
  const auto rn = nouns(ref);
  const auto cn = nouns(cand);
  const std::size_t denom = std::max(rn.size(), cn.size());
  if (denom == 0) return 0.0;
  double sum = 0.0;
  for (const auto& a : rn)
    for (const auto& b : cn) sum += sim(a, b);
  return sum / static_cast<double>(denom);
}

double weighted_semantic_mutual_overlap(std::string_view ref, const std::vector<ScoredPhrase>& cands,
                                        const SimilarityProvider& sim, const TextProcessor& tp) {
  check_scores(cands);
  const Phrase r = analyze_phrase(ref, tp);
  double total = 0.0;
  for (const auto& c : cands) total += semantic_overlap(r, analyze_phrase(c.text, tp), sim) * c.score;
  return total;
}

LabelAgreement end_to_end_label_agreement(const Segmentation& reference, const std::vector<std::string>& reference_labels,
                                          const Segmentation& system,
                                          const std::vector<std::vector<ScoredPhrase>>& system_labels, int k,
                                          const SimilarityProvider& sim, const TextProcessor& tp) {
  if (k < 1) throw InvalidArgument("label agreement: k must be at least 1");
  const Eigen::MatrixXd m = overlap_matrix(reference, system);
  const auto match = max_weight_matching(m);
  LabelAgreement out;
  int scored = 0;
  for (std::size_t r = 0; r < match.size(); ++r) {
    if (r >= reference_labels.size() || trim(reference_labels[r]).empty()) continue;
    if (m.row(static_cast<Eigen::Index>(r)).sum() == 0.0) continue;
    ++scored;
    const int c = match[r];
    if (c < 0 || m(static_cast<Eigen::Index>(r), c) == 0.0 || static_cast<std::size_t>(c) >= system_labels.size()) continue;
    std::vector<ScoredPhrase> top(system_labels[static_cast<std::size_t>(c)].begin(),
                                  system_labels[static_cast<std::size_t>(c)].begin() +
                                      std::min<std::ptrdiff_t>(k, static_cast<std::ptrdiff_t>(system_labels[static_cast<std::size_t>(c)].size())));
    if (top.empty()) continue;
    double sum = 0.0;
    for (const auto& p : top) sum += p.score;
    for (auto& p : top) p.score = sum > 0.0 ? p.score / sum : 1.0 / static_cast<double>(top.size());
    out.wmo += weighted_mutual_overlap(reference_labels[r], top, tp);
    out.wsmo += weighted_semantic_mutual_overlap(reference_labels[r], top, sim, tp);
  }
  if (scored > 0) {
    out.wmo /= scored;
    out.wsmo /= scored;
  }
  return out;
}

Summary summarize(const std::vector<double>& values) {
  Summary s;
  s.count = values.size();
  if (values.empty()) return s;
  s.max = *std::max_element(values.begin(), values.end());
  s.min = *std::min_element(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = std::clamp(sum / static_cast<double>(values.size()), s.min, s.max);
  return s;
}

}  // namespace convtopic
