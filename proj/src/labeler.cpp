#include "convtopic/labeler.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "convtopic/error.hpp"

namespace convtopic {

bool passes_filter(const Token& token, SyntacticFilter filter) {
  if (token.is_stopword) return false;
  switch (filter) {
    case SyntacticFilter::Nouns: return token.pos == Pos::Noun;
    case SyntacticFilter::NounsAdjectives: return token.pos == Pos::Noun || token.pos == Pos::Adj;
    case SyntacticFilter::NounsAdjectivesVerbs:
      return token.pos == Pos::Noun || token.pos == Pos::Adj || token.pos == Pos::Verb;
    case SyntacticFilter::ContentWords: return token.pos != Pos::Other;
    case SyntacticFilter::AllWords: return true;
  }
  return false;
}

std::vector<std::string> syntactic_filter(const std::vector<const Sentence*>& sentences, SyntacticFilter filter) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const Sentence* s : sentences)
    for (const auto& t : s->tokens)
      if (passes_filter(t, filter) && seen.insert(t.stem).second) out.push_back(t.stem);
  return out;
}

CooccurrenceCounts cooccurrences(const std::vector<const Sentence*>& sentences, int s, SyntacticFilter filter) {
  if (s < 2) throw InvalidArgument("co-occurrence window must be at least 2");
  CooccurrenceCounts counts;
  for (const Sentence* sentence : sentences) {
    std::vector<const Token*> seq;
    for (const auto& t : sentence->tokens)
      if (!t.is_stopword) seq.push_back(&t);
    for (std::size_t i = 0; i < seq.size(); ++i) {
      if (!passes_filter(*seq[i], filter)) continue;
      for (std::size_t j = i + 1; j < seq.size() && j - i < static_cast<std::size_t>(s); ++j) {
        if (!passes_filter(*seq[j], filter)) continue;
        const std::string& a = seq[i]->stem;
        const std::string& b = seq[j]->stem;
        if (a == b) continue;
        counts[a < b ? std::make_pair(a, b) : std::make_pair(b, a)] += 1.0;
      }
    }
  }
  return counts;
}

int WordGraph::index_of(const std::string& word) const {
  auto it = std::find(words.begin(), words.end(), word);
  return it == words.end() ? -1 : static_cast<int>(it - words.begin());
}

double discriminative_weight(double tf_in, double tf_out, int K) {
  if (K < 1) throw InvalidArgument("topic count must be at least 1");
  return std::max(0.0, tf_in * std::log(static_cast<double>(K) / (0.5 + tf_out)));
}

double leading_relevance(double tf_leading, double tf_segment) {
  return std::log(tf_leading + 1.0) * std::log(tf_segment + 1.0);
}

namespace {

std::map<std::string, double> candidate_counts(const std::vector<const Sentence*>& sentences, SyntacticFilter filter) {
  std::map<std::string, double> tf;
  for (const Sentence* s : sentences)
    for (const auto& t : s->tokens)
      if (passes_filter(t, filter)) tf[t.stem] += 1.0;
  return tf;
}

double lookup(const std::map<std::string, double>& m, const std::string& key) {
  auto it = m.find(key);
  return it == m.end() ? 0.0 : it->second;
}

double lookup(const CooccurrenceCounts& m, const std::pair<std::string, std::string>& key) {
  auto it = m.find(key);
  return it == m.end() ? 0.0 : it->second;
}

}  // namespace

WordGraph build_wcg(const std::vector<const Sentence*>& segment, const std::vector<const Sentence*>& others,
                    const std::vector<const Sentence*>& leading, int K, const WcgOptions& options) {
  WordGraph g;
  g.words = syntactic_filter(segment, options.filter);
  const auto n = static_cast<Eigen::Index>(g.words.size());
  const CooccurrenceCounts in = cooccurrences(segment, options.window, options.filter);
  const CooccurrenceCounts out = cooccurrences(others, options.window, options.filter);
  g.weights = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [pair, count] : in) {
    const int a = g.index_of(pair.first);
    const int b = g.index_of(pair.second);
    g.weights(a, b) = g.weights(b, a) = discriminative_weight(count, lookup(out, pair), K);
  }
  const auto tf_segment = candidate_counts(segment, options.filter);
  const auto tf_leading = candidate_counts(leading, options.filter);
  g.relevance.resize(n);
  for (Eigen::Index i = 0; i < n; ++i)
    g.relevance(i) = leading_relevance(lookup(tf_leading, g.words[i]), lookup(tf_segment, g.words[i]));
  return g;
}

WordGraph build_count_graph(const std::vector<const Sentence*>& sentences, const WcgOptions& options) {
  WordGraph g;
  g.words = syntactic_filter(sentences, options.filter);
  const auto n = static_cast<Eigen::Index>(g.words.size());
  g.weights = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [pair, count] : cooccurrences(sentences, options.window, options.filter)) {
    const int a = g.index_of(pair.first);
    const int b = g.index_of(pair.second);
    g.weights(a, b) = g.weights(b, a) = count;
  }
  g.relevance = Eigen::VectorXd::Zero(n);
  return g;
}

double RankVector::score_of(const std::string& item) const {
  auto it = std::find(items.begin(), items.end(), item);
  return it == items.end() ? 0.0 : scores(it - items.begin());
}

std::vector<std::string> RankVector::ordered() const {
  std::vector<int> idx(items.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (scores(a) != scores(b)) return scores(a) > scores(b);
    return items[a] < items[b];
  });
  std::vector<std::string> out;
  for (int i : idx) out.push_back(items[i]);
  return out;
}

Eigen::MatrixXd row_stochastic(const Eigen::MatrixXd& M) {
  Eigen::MatrixXd out = M;
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    const double sum = M.row(r).sum();
    if (sum > 0.0)
      out.row(r) /= sum;
    else
      out.row(r).setConstant(1.0 / static_cast<double>(M.cols()));
  }
  return out;
}

Eigen::MatrixXd with_teleport(const Eigen::MatrixXd& A, double d) {
  if (!(d >= 0.0 && d <= 1.0)) throw InvalidArgument("teleport damping must lie in [0, 1]");
  return (d * A).array() + (1.0 - d) / static_cast<double>(A.cols());
}

Eigen::VectorXd stationary(const Eigen::MatrixXd& M, double tolerance, int max_iterations) {
  if (M.rows() == 0 || M.rows() != M.cols()) throw InvalidArgument("stationary: need a non-empty square matrix");
  const Eigen::Index n = M.rows();
  Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  const Eigen::MatrixXd Mt = M.transpose();
  for (int it = 0; it < max_iterations; ++it) {
    Eigen::VectorXd next = Mt * x;
    next /= next.sum();
    const double change = (next - x).lpNorm<1>();
    x = std::move(next);
    if (change < tolerance) break;
  }
  return x;
}

namespace {

Eigen::MatrixXd relevance_rows(const WordGraph& graph) {
  const auto n = static_cast<Eigen::Index>(graph.words.size());
  Eigen::RowVectorXd q = graph.relevance.transpose();
  const double sum = q.sum();
  if (sum > 0.0)
    q /= sum;
  else
    q.setConstant(1.0 / static_cast<double>(n));
  return q.replicate(n, 1);
}

Eigen::MatrixXd word_walk(const WordGraph& graph, std::optional<double> lambda_bias) {
  if (graph.words.empty()) throw InvalidArgument("word graph is empty");
  const Eigen::MatrixXd R = row_stochastic(graph.weights);
  if (!lambda_bias) return R;
  const double l = *lambda_bias;
  if (!(l >= 0.0 && l <= 1.0)) throw InvalidArgument("bias must lie in [0, 1]");
  return l * relevance_rows(graph) + (1.0 - l) * R;
}

}  // namespace

Eigen::MatrixXd biased_transition(const WordGraph& graph, double lambda_bias, double d) {
  return with_teleport(word_walk(graph, lambda_bias), d);
}

RankVector biased_rank(const WordGraph& graph, double lambda_bias, double d) {
  return RankVector{graph.words, stationary(biased_transition(graph, lambda_bias, d))};
}

RankVector general_rank(const WordGraph& graph, double d) {
  return RankVector{graph.words, stationary(with_teleport(word_walk(graph, std::nullopt), d))};
}

Eigen::MatrixXd fragment_word_counts(const Conversation& conversation, const FragmentQuotationGraph& graph,
                                     const std::vector<std::string>& words, SyntacticFilter filter) {
  std::map<std::string, int> column;
  for (std::size_t i = 0; i < words.size(); ++i) column[words[i]] = static_cast<int>(i);
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(graph.size()),
                                                 static_cast<Eigen::Index>(words.size()));
  for (std::size_t r = 0; r < graph.nodes().size(); ++r)
    for (int sid : graph.nodes()[r].sentence_ids)
      for (const auto& t : conversation.sentences.at(static_cast<std::size_t>(sid)).tokens) {
        if (!passes_filter(t, filter)) continue;
        if (auto it = column.find(t.stem); it != column.end()) counts(static_cast<Eigen::Index>(r), it->second) += 1.0;
      }
  return counts;
}

CorankMatrices corank_matrices(const FragmentQuotationGraph& fragments, const WordGraph& words,
                               const Eigen::MatrixXd& counts, double d, std::optional<double> lambda_bias) {
  const auto nf = static_cast<Eigen::Index>(fragments.size());
  const auto nw = static_cast<Eigen::Index>(words.words.size());
  if (nf == 0) throw InvalidArgument("co-ranking needs a non-empty fragment graph");
  if (counts.rows() != nf || counts.cols() != nw) throw InvalidArgument("fragment-word count matrix has the wrong shape");
  Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(nf, nf);
  for (const auto& [from, to] : fragments.edges()) adj(fragments.index_of(from), fragments.index_of(to)) = 1.0;
  CorankMatrices m;
  m.F = with_teleport(row_stochastic(adj), d);
  m.W = with_teleport(word_walk(words, lambda_bias), d);
  m.FW = with_teleport(row_stochastic(counts), d);
  m.WF = with_teleport(row_stochastic(counts.transpose()), d);
  return m;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> corank_iterate(const CorankMatrices& m, double delta,
                                                           std::optional<Eigen::VectorXd> f0,
                                                           std::optional<Eigen::VectorXd> w0, double tolerance,
                                                           int max_iterations) {
  if (!(delta >= 0.0 && delta <= 1.0)) throw InvalidArgument("delta must lie in [0, 1]");
  const Eigen::Index nf = m.F.rows();
  const Eigen::Index nw = m.W.rows();
  Eigen::VectorXd f = f0 ? *f0 : Eigen::VectorXd::Constant(nf, 1.0 / static_cast<double>(nf));
  Eigen::VectorXd w = w0 ? *w0 : Eigen::VectorXd::Constant(nw, 1.0 / static_cast<double>(nw));
  if (f.size() != nf || w.size() != nw) throw InvalidArgument("co-ranking start vectors have the wrong size");
  f /= f.sum();
  w /= w.sum();
  const Eigen::MatrixXd Ft = m.F.transpose();
  const Eigen::MatrixXd Wt = m.W.transpose();
  const Eigen::MatrixXd FWt = m.FW.transpose();  // nw x nf
  const Eigen::MatrixXd WFt = m.WF.transpose();  // nf x nw
  for (int it = 0; it < max_iterations; ++it) {
    Eigen::VectorXd f_next = (1.0 - delta) * (Ft * f) + delta * (WFt * (FWt * (WFt * w)));
    Eigen::VectorXd w_next = (1.0 - delta) * (Wt * w) + delta * (FWt * (WFt * (FWt * f)));
    f_next /= f_next.sum();
    w_next /= w_next.sum();
    const double change = std::max((f_next - f).lpNorm<1>(), (w_next - w).lpNorm<1>());
    f = std::move(f_next);
    w = std::move(w_next);
    if (change < tolerance) break;
  }
  return {f, w};
}

std::pair<RankVector, RankVector> corank(const FragmentQuotationGraph& fragments, const WordGraph& words,
                                         const Eigen::MatrixXd& counts, double delta, double d,
                                         std::optional<double> lambda_bias) {
  if (words.words.empty()) throw InvalidArgument("word graph is empty");
  if (fragments.empty()) {
    RankVector w{words.words, stationary(with_teleport(word_walk(words, lambda_bias), d))};
    return {RankVector{}, w};
  }
  const auto [f, w] = corank_iterate(corank_matrices(fragments, words, counts, d, lambda_bias), delta);
  RankVector fr;
  for (const auto& node : fragments.nodes()) fr.items.push_back(std::to_string(node.id));
  fr.scores = f;
  return {fr, RankVector{words.words, w}};
}

namespace {

void sort_phrases(std::vector<Keyphrase>& phrases) {
  std::stable_sort(phrases.begin(), phrases.end(), [](const Keyphrase& a, const Keyphrase& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.text < b.text;
  });
}

void add_or_keep_max(std::vector<Keyphrase>& list, std::map<std::vector<std::string>, std::size_t>& index, Keyphrase p) {
  auto it = index.find(p.stems);
  if (it == index.end()) {
    index.emplace(p.stems, list.size());
    list.push_back(std::move(p));
  } else if (p.score > list[it->second].score) {
    list[it->second].score = p.score;
  }
}

}  // namespace

std::vector<Keyphrase> generate_phrases(const std::vector<const Sentence*>& sentences, const RankVector& rank,
                                        double fraction, PhraseOrigin origin) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw InvalidArgument("phrase fraction must lie in (0, 1]");
  const auto ordered = rank.ordered();
  const auto M = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(ordered.size()) - 1e-9));
  std::map<std::string, double> marked;
  for (std::size_t i = 0; i < M && i < ordered.size(); ++i) marked[ordered[i]] = rank.score_of(ordered[i]);

  std::vector<Keyphrase> out;
  std::map<std::vector<std::string>, std::size_t> index;
  for (const Sentence* s : sentences) {
    Keyphrase current;
    current.origin = origin;
    auto flush = [&] {
      if (!current.stems.empty()) add_or_keep_max(out, index, current);
      current = Keyphrase{};
      current.origin = origin;
    };
    for (const auto& t : s->tokens) {
      auto it = t.is_stopword ? marked.end() : marked.find(t.stem);
      if (it == marked.end()) {
        flush();
        continue;
      }
      if (!current.text.empty()) current.text += ' ';
      current.text += t.surface;
      current.stems.push_back(t.stem);
      current.score = std::max(current.score, it->second);
    }
    flush();
  }
  sort_phrases(out);
  return out;
}

std::vector<Keyphrase> rerank_conversation_phrases(const std::vector<Keyphrase>& phrases,
                                                   const RankVector& segment_rank) {
  std::vector<Keyphrase> out;
  for (Keyphrase p : phrases) {
    p.score = 0.0;
    for (const auto& stem : p.stems) p.score = std::max(p.score, segment_rank.score_of(stem));
    p.origin = PhraseOrigin::Conversation;
    out.push_back(std::move(p));
  }
  sort_phrases(out);
  return out;
}

std::vector<Keyphrase> merge_phrases(std::vector<Keyphrase> base, const std::vector<Keyphrase>& extra) {
  std::vector<Keyphrase> out;
  std::map<std::vector<std::string>, std::size_t> index;
  for (auto& p : base) add_or_keep_max(out, index, std::move(p));
  for (const auto& p : extra)
    if (p.score > 0.0) add_or_keep_max(out, index, p);
  sort_phrases(out);
  return out;
}

double phrase_similarity(const Keyphrase& candidate, const Keyphrase& selected) {
  if (selected.stems.empty()) return 0.0;
  std::map<std::string, int> pool;
  for (const auto& s : selected.stems) ++pool[s];
  int overlap = 0;
  for (const auto& s : candidate.stems)
    if (auto it = pool.find(s); it != pool.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  return static_cast<double>(overlap) / static_cast<double>(selected.stems.size());
}

std::vector<Label> select_labels_mmr(std::vector<Keyphrase> phrases, int k, double rho) {
  if (k < 1) throw InvalidArgument("MMR: k must be at least 1");
  if (!(rho >= 0.0 && rho <= 1.0)) throw InvalidArgument("MMR: rho must lie in [0, 1]");
  phrases = merge_phrases(std::move(phrases), {});
  double top = 0.0;
  for (const auto& p : phrases) top = std::max(top, p.score);
  if (top > 0.0)
    for (auto& p : phrases) p.score /= top;

  std::vector<char> used(phrases.size(), 0);
  std::vector<std::size_t> chosen;
  while (static_cast<int>(chosen.size()) < k && chosen.size() < phrases.size()) {
    std::size_t best = phrases.size();
    double best_value = 0.0;
    for (std::size_t i = 0; i < phrases.size(); ++i) {
      if (used[i]) continue;
      double redundancy = 0.0;
      for (std::size_t c : chosen) redundancy = std::max(redundancy, phrase_similarity(phrases[i], phrases[c]));
      const double value = rho * phrases[i].score - (1.0 - rho) * redundancy;
      // Phrases are sorted by score then text, so the first maximum wins ties.
      if (best == phrases.size() || value > best_value) {
        best = i;
        best_value = value;
      }
    }
    used[best] = 1;
    chosen.push_back(best);
  }

  std::vector<Label> out;
  double total = 0.0;
  for (std::size_t c : chosen) total += phrases[c].score;
  for (std::size_t c : chosen)
    out.push_back({phrases[c].text, total > 0.0 ? phrases[c].score / total : 1.0 / static_cast<double>(chosen.size())});
  return out;
}

Ranker parse_ranker(std::string_view name) {
  static const std::map<std::string, Ranker, std::less<>> names = {
      {"freq", Ranker::Freq},         {"lead", Ranker::Lead},       {"mt", Ranker::MT},
      {"bias", Ranker::Bias},         {"bias+", Ranker::BiasPlus},  {"corgen", Ranker::CorGen},
      {"corgen+", Ranker::CorGenPlus}, {"corbias", Ranker::CorBias}, {"corbias+", Ranker::CorBiasPlus}};
  auto it = names.find(to_lower(name));
  if (it == names.end()) throw InvalidArgument("unknown ranker '" + std::string(name) + "'");
  return it->second;
}

std::string_view ranker_name(Ranker ranker) {
  switch (ranker) {
    case Ranker::Freq: return "freq";
    case Ranker::Lead: return "lead";
    case Ranker::MT: return "mt";
    case Ranker::Bias: return "bias";
    case Ranker::BiasPlus: return "bias+";
    case Ranker::CorGen: return "corgen";
    case Ranker::CorGenPlus: return "corgen+";
    case Ranker::CorBias: return "corbias";
    case Ranker::CorBiasPlus: return "corbias+";
  }
  return "corbias+";
}

namespace {

bool is_plus(Ranker r) { return r == Ranker::BiasPlus || r == Ranker::CorGenPlus || r == Ranker::CorBiasPlus; }
bool is_corank(Ranker r) {
  return r == Ranker::CorGen || r == Ranker::CorGenPlus || r == Ranker::CorBias || r == Ranker::CorBiasPlus;
}
bool is_biased(Ranker r) {
  return r == Ranker::Bias || r == Ranker::BiasPlus || r == Ranker::CorBias || r == Ranker::CorBiasPlus;
}

RankVector normalized(std::vector<std::string> items, Eigen::VectorXd scores) {
  const double sum = scores.sum();
  if (sum > 0.0)
    scores /= sum;
  else
    scores.setConstant(1.0 / static_cast<double>(scores.size()));
  return RankVector{std::move(items), std::move(scores)};
}

}  // namespace

LabeledTopics label_topics(const Conversation& conversation, const Segmentation& segmentation,
                           const FragmentQuotationGraph& fqg, const LabelOptions& options) {
  if (segmentation.size() != conversation.sentences.size())
    throw InvalidArgument("segmentation does not cover the conversation");
  const auto clusters = segmentation.clusters();
  int K = 0;
  for (const auto& c : clusters) K += c.empty() ? 0 : 1;
  const WcgOptions wcg{options.window, options.filter};

  std::vector<const Sentence*> all;
  for (const auto& s : conversation.sentences) all.push_back(&s);

  std::vector<Keyphrase> conversation_phrases;
  if (is_plus(options.ranker)) {
    const WordGraph g = build_count_graph(all, wcg);
    if (!g.words.empty()) {
      RankVector rank = is_corank(options.ranker)
                            ? corank(fqg, g, fragment_word_counts(conversation, fqg, g.words, options.filter),
                                     options.delta, options.teleport)
                                  .second
                            : general_rank(g, options.teleport);
      conversation_phrases = generate_phrases(all, rank, options.phrase_fraction, PhraseOrigin::Conversation);
    }
  }

  LabeledTopics out(clusters.size());
  for (std::size_t k = 0; k < clusters.size(); ++k) {
    if (clusters[k].empty()) continue;
    std::vector<const Sentence*> segment;
    std::vector<const Sentence*> others;
    std::vector<const Sentence*> leading;
    for (int id : clusters[k]) segment.push_back(&conversation.sentences[static_cast<std::size_t>(id)]);
    for (const auto& s : conversation.sentences)
      if (segmentation.topic_of[static_cast<std::size_t>(s.id)] != static_cast<int>(k)) others.push_back(&s);
    for (std::size_t i = 0; i < segment.size() && static_cast<int>(i) < options.leading_sentences; ++i)
      leading.push_back(segment[i]);

    const WordGraph g = build_wcg(segment, others, leading, K, wcg);
    if (g.words.empty()) continue;
    RankVector rank;
    switch (options.ranker) {
      case Ranker::Freq: {
        Eigen::VectorXd tf = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.words.size()));
        for (const Sentence* s : segment)
          for (const auto& t : s->tokens)
            if (passes_filter(t, options.filter)) tf(g.index_of(t.stem)) += 1.0;
        rank = normalized(g.words, tf);
        break;
      }
      case Ranker::Lead: rank = normalized(g.words, g.relevance); break;
      case Ranker::MT: rank = general_rank(build_count_graph(segment, wcg), options.teleport); break;
      case Ranker::Bias:
      case Ranker::BiasPlus: rank = biased_rank(g, options.lambda_bias, options.teleport); break;
      default: {
        const std::set<int> ids(clusters[k].begin(), clusters[k].end());
        const FragmentQuotationGraph projected = project_fqg(fqg, ids);
        rank = corank(projected, g, fragment_word_counts(conversation, projected, g.words, options.filter),
                      options.delta, options.teleport,
                      is_biased(options.ranker) ? std::optional<double>(options.lambda_bias) : std::nullopt)
                   .second;
        break;
      }
    }
    auto phrases = generate_phrases(segment, rank, options.phrase_fraction);
    if (is_plus(options.ranker)) phrases = merge_phrases(std::move(phrases), rerank_conversation_phrases(conversation_phrases, rank));
    out[k] = select_labels_mmr(std::move(phrases), options.labels_k, options.rho);
  }
  return out;
}

std::string labels_to_json(const LabeledTopics& labels) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (std::size_t k = 0; k < labels.size(); ++k) {
    nlohmann::ordered_json list = nlohmann::ordered_json::array();
    for (const auto& l : labels[k]) list.push_back({{"label", l.text}, {"score", l.score}});
    j[std::to_string(k)] = list;
  }
  return j.dump(2) + "\n";
}

}  // namespace convtopic
