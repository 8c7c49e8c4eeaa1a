#include "convtopic/supervised.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include <Eigen/SVD>
#include <json.hpp>

#include "convtopic/error.hpp"
#include "convtopic/graphcut.hpp"

namespace convtopic {

int default_lsa_rank(const Conversation& conversation) {
  int V = 0;
  {
    WordSet seen;
    for (const auto& s : conversation.sentences)
      for (const auto& t : s.tokens)
        if (!t.is_stopword) seen.insert(t.stem);
    V = static_cast<int>(seen.size());
  }
  const int D = static_cast<int>(conversation.comments.size());
  const int k = std::max(1, D / 4);
  return std::max(1, std::min({k, V, D}));
}

LsaSpace compute_lsa(const Conversation& conversation, int rank) {
  if (conversation.sentences.empty()) throw InvalidArgument("LSA: conversation has no sentences");
  LsaSpace lsa;
  for (const auto& s : conversation.sentences)
    for (const auto& t : s.tokens)
      if (!t.is_stopword) lsa.vocab.add(t.stem);
  const int V = lsa.vocab.size();
  const int D = static_cast<int>(conversation.comments.size());
  if (V == 0) throw InvalidArgument("LSA: conversation has no content words");
  if (rank < 1 || rank > std::min(V, D))
    throw InvalidArgument("LSA: rank " + std::to_string(rank) + " outside [1, " + std::to_string(std::min(V, D)) + "]");

  Eigen::MatrixXd tf = Eigen::MatrixXd::Zero(V, D);
  for (const auto& s : conversation.sentences)
    for (const auto& t : s.tokens)
      if (!t.is_stopword) tf(lsa.vocab.find(t.stem), s.comment_index) += 1.0;
  lsa.W = tf;
  for (int i = 0; i < V; ++i) {
    const double df = static_cast<double>((tf.row(i).array() > 0.0).count());
    // Smoothed so that a word used in every comment keeps some weight.
    lsa.W.row(i) *= std::log((1.0 + D) / (1.0 + df)) + 1.0;
  }

  Eigen::BDCSVD<Eigen::MatrixXd> svd(lsa.W, Eigen::ComputeThinU | Eigen::ComputeThinV);
  lsa.rank = rank;
  lsa.U = svd.matrixU().leftCols(rank);
  lsa.V = svd.matrixV().leftCols(rank);
  lsa.sigma = svd.singularValues().head(rank);
  for (int c = 0; c < rank; ++c) {
    Eigen::Index pivot = 0;
    lsa.U.col(c).cwiseAbs().maxCoeff(&pivot);
    if (lsa.U(pivot, c) < 0.0) {
      lsa.U.col(c) *= -1.0;
      lsa.V.col(c) *= -1.0;
    }
  }
  lsa.word_vectors = lsa.U * lsa.sigma.asDiagonal();
  lsa.sentence_vectors = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(conversation.sentences.size()), rank);
  for (const auto& s : conversation.sentences)
    for (const auto& t : s.tokens)
      if (!t.is_stopword) lsa.sentence_vectors.row(s.id) += lsa.word_vectors.row(lsa.vocab.find(t.stem));
  return lsa;
}

PairContext build_pair_context(const Conversation& conversation, const PairContextOptions& options) {
  PairContext ctx;
  ctx.conversation = &conversation;
  const int n = static_cast<int>(conversation.sentences.size());
  if (n == 0) throw InvalidArgument("pair features: conversation has no sentences");
  const int K = std::clamp(options.K, 1, n);
  ctx.fqg = build_fqg(conversation);
  ctx.chains = build_chains(conversation.sentences, options.lcseg.hiatus);
  ctx.idf = sentence_idf(conversation.sentences);
  for (const auto& s : conversation.sentences) ctx.tf.push_back(term_frequencies(s));
  ctx.cue_words = options.cue_words;

  const bool has_content = comment_documents(conversation).vocab.size() > 0;
  if (has_content) {
    ctx.lsa = compute_lsa(conversation, default_lsa_rank(conversation));
    LdaOptions lda = options.lda;
    lda.K = K;
    ctx.lda = assign_sentence_topics(fit_lda(conversation, lda), conversation);
    ctx.lda_fqg = assign_sentence_topics(fit_lda_fqg(conversation, ctx.fqg, lda, options.lambda_reg), conversation);
  } else {
    Segmentation flat{std::vector<int>(static_cast<std::size_t>(n), 0), 1};
    ctx.lda = ctx.lda_fqg = flat;
  }
  ctx.lcseg = lcseg_segment(conversation, K, options.lcseg);
  ctx.lcseg_fqg = lcseg_fqg_segment(conversation, ctx.fqg, K, options.lcseg);
  return ctx;
}

namespace {

std::vector<std::string> lower_words(const Sentence& s) {
  std::vector<std::string> out;
  for (const auto& t : s.tokens) out.push_back(to_lower(t.surface));
  return out;
}

bool contains_word(const std::vector<std::string>& words, std::string_view w) {
  return std::find(words.begin(), words.end(), w) != words.end();
}

bool contains_phrase(const std::vector<std::string>& words, const std::vector<std::string>& phrase) {
  if (phrase.empty() || phrase.size() > words.size()) return false;
  return std::search(words.begin(), words.end(), phrase.begin(), phrase.end()) != words.end();
}

bool any_of_words(const std::vector<std::string>& words, std::initializer_list<std::string_view> list) {
  for (auto w : list)
    if (contains_word(words, w)) return true;
  return false;
}

std::string first_name(const std::string& author) {
  const auto parts = word_substrings(author);
  return parts.empty() ? std::string() : to_lower(parts.front());
}

}  // namespace

FeatureVector extract_pair_features(const PairContext& ctx, int x, int y) {
  if (!ctx.conversation) throw InvalidArgument("pair features: context has no conversation");
  const Conversation& conv = *ctx.conversation;
  const int n = static_cast<int>(conv.sentences.size());
  if (x < 0 || y >= n || x >= y)
    throw InvalidArgument("pair features need 0 <= x < y < " + std::to_string(n) + ", got (" + std::to_string(x) + ", " +
                          std::to_string(y) + ")");
  const Sentence& sx = conv.sentences[static_cast<std::size_t>(x)];
  const Sentence& sy = conv.sentences[static_cast<std::size_t>(y)];
  const auto wx = lower_words(sx);
  const auto wy = lower_words(sy);

  auto window_x = [&](int k) { return Window{std::max(0, x - (k - 1)), x}; };
  auto window_y = [&](int k) { return Window{y, std::min(n - 1, y + (k - 1))}; };
  auto tfidf = [&](int k) {
    TermVector a;
    TermVector b;
    const Window X = window_x(k);
    const Window Y = window_y(k);
    for (int i = X.from; i <= X.to; ++i)
      for (const auto& [t, v] : ctx.tf[static_cast<std::size_t>(i)]) a[t] += v;
    for (int i = Y.from; i <= Y.to; ++i)
      for (const auto& [t, v] : ctx.tf[static_cast<std::size_t>(i)]) b[t] += v;
    return cosine(weight_by(a, ctx.idf), weight_by(b, ctx.idf));
  };
  auto lsa = [&](int k) {
    if (ctx.lsa.rank == 0) return 0.0;
    const Window X = window_x(k);
    const Window Y = window_y(k);
    const Eigen::VectorXd a = ctx.lsa.sentence_vectors.middleRows(X.from, X.to - X.from + 1).colwise().sum();
    const Eigen::VectorXd b = ctx.lsa.sentence_vectors.middleRows(Y.from, Y.to - Y.from + 1).colwise().sum();
    return cosine(a, b);
  };
  auto same = [](const Segmentation& s, int a, int b) {
    return s.size() > 0 && s.same_topic(a, b) ? 1.0 : 0.0;
  };

  bool cue = false;
  for (const auto& c : ctx.cue_words) {
    const auto phrase = word_substrings(to_lower(c));
    if (contains_phrase(wx, phrase) || contains_phrase(wy, phrase)) {
      cue = true;
      break;
    }
  }
  const bool question = sx.text.find('?') != std::string::npos;
  const bool answer = any_of_words(wy, {"yes", "yeah", "okay", "ok", "no", "nope"});
  auto greets = [](const std::vector<std::string>& w) {
    return any_of_words(w, {"hi", "hello", "thanks", "thx", "tnx", "thank"});
  };

  const Comment& cx = conv.comments[static_cast<std::size_t>(sx.comment_index)];
  const Comment& cy = conv.comments[static_cast<std::size_t>(sy.comment_index)];
  const bool same_speaker = !cx.author.empty() && cx.author == cy.author;
  const bool same_reply = sx.comment_index == sy.comment_index || conv.parent_index(sy.comment_index) == sx.comment_index ||
                          conv.parent_index(sx.comment_index) == sy.comment_index;
  const std::string name_x = first_name(cx.author);
  const std::string name_y = first_name(cy.author);
  const bool name = (!name_y.empty() && contains_word(wx, name_y)) || (!name_x.empty() && contains_word(wy, name_x));

  const int fx = ctx.fqg.fragment_of_sentence(x);
  const int fy = ctx.fqg.fragment_of_sentence(y);
  const bool in_graph = fx >= 0 && fy >= 0;

  FeatureVector f;
  f << tfidf(1), tfidf(2), cue ? 1.0 : 0.0, question && answer ? 1.0 : 0.0, greets(wx) || greets(wy) ? 1.0 : 0.0,
      static_cast<double>(y - x), same_speaker ? 1.0 : 0.0, in_graph ? std::abs(fy - fx) : -1.0,
      in_graph ? ctx.fqg.directed_distance(fx, fy) : -1.0, in_graph ? ctx.fqg.undirected_distance(fx, fy) : -1.0,
      same_reply ? 1.0 : 0.0, name ? 1.0 : 0.0, lsa(1), lsa(2), same(ctx.lda, x, y), same(ctx.lda_fqg, x, y),
      same(ctx.lcseg, x, y), same(ctx.lcseg_fqg, x, y),
      lexcoh(Window{std::max(0, x - 1), x}, Window{y, std::min(n - 1, y + 1)}, ctx.chains);
  return f;
}

Eigen::MatrixXd extract_all_pair_features(const PairContext& ctx, int threads) {
  const int n = static_cast<int>(ctx.conversation->sentences.size());
  std::vector<std::pair<int, int>> pairs;
  for (int x = 0; x < n; ++x)
    for (int y = x + 1; y < n; ++y) pairs.emplace_back(x, y);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(pairs.size()), kFeatureCount);
  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(pairs.size())));
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = static_cast<std::size_t>(w); i < pairs.size(); i += static_cast<std::size_t>(workers))
          out.row(static_cast<Eigen::Index>(i)) = extract_pair_features(ctx, pairs[i].first, pairs[i].second).transpose();
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

std::vector<LabeledPair> pair_expansion(const std::vector<Segmentation>& annotations) {
  if (annotations.empty()) throw InvalidArgument("pair expansion needs at least one annotation");
  const std::size_t n = annotations.front().size();
  for (const auto& a : annotations)
    if (a.size() != n) throw InvalidArgument("annotations cover different sentence counts");
  std::vector<LabeledPair> out;
  out.reserve(n * (n - (n > 0 ? 1 : 0)) / 2);
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = x + 1; y < n; ++y) {
      std::size_t votes = 0;
      for (const auto& a : annotations) votes += a.topic_of[x] == a.topic_of[y] ? 1 : 0;
      out.push_back({static_cast<int>(x), static_cast<int>(y), 2 * votes > annotations.size()});
    }
  return out;
}

std::vector<LabeledPair> pair_expansion(const GoldStandard& gold) {
  std::vector<Segmentation> segs;
  for (const auto& a : gold.annotators) segs.push_back(a.segmentation);
  return pair_expansion(segs);
}

double logistic_objective(const Eigen::VectorXd& theta, const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double l2,
                          Eigen::VectorXd* gradient) {
  const Eigen::Index d = X.cols();
  if (theta.size() != d + 1) throw InvalidArgument("logistic objective: theta must hold weights and bias");
  const double m = static_cast<double>(X.rows());
  const Eigen::VectorXd w = theta.head(d);
  const double b = theta(d);
  const Eigen::VectorXd z = (X * w).array() + b;
  double nll = 0.0;
  Eigen::VectorXd residual(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const double zi = z(i);
    const double softplus = zi > 0.0 ? zi + std::log1p(std::exp(-zi)) : std::log1p(std::exp(zi));
    nll += softplus - y(i) * zi;
    const double p = zi >= 0.0 ? 1.0 / (1.0 + std::exp(-zi)) : std::exp(zi) / (1.0 + std::exp(zi));
    residual(i) = p - y(i);
  }
  if (gradient) {
    gradient->resize(d + 1);
    gradient->head(d) = X.transpose() * residual / m + l2 * w;
    (*gradient)(d) = residual.sum() / m;
  }
  return nll / m + 0.5 * l2 * w.squaredNorm();
}

LbfgsResult minimize_lbfgs(const Objective& f, Eigen::VectorXd x0, const LbfgsOptions& options) {
  LbfgsResult r;
  r.x = std::move(x0);
  Eigen::VectorXd g;
  r.value = f(r.x, &g);
  r.trace.push_back(r.value);
  r.gradient_norm = g.norm();
  std::vector<Eigen::VectorXd> S;
  std::vector<Eigen::VectorXd> Y;
  std::vector<double> rho;
  for (r.iterations = 0; r.iterations < options.max_iterations; ++r.iterations) {
    if (r.gradient_norm < options.gradient_tolerance) {
      r.converged = true;
      break;
    }
    // Two-loop recursion.
    Eigen::VectorXd q = g;
    std::vector<double> a(S.size());
    for (int i = static_cast<int>(S.size()) - 1; i >= 0; --i) {
      a[i] = rho[i] * S[i].dot(q);
      q -= a[i] * Y[i];
    }
    if (!S.empty()) q *= S.back().dot(Y.back()) / Y.back().squaredNorm();
    for (std::size_t i = 0; i < S.size(); ++i) {
      const double bcoef = rho[i] * Y[i].dot(q);
      q += (a[i] - bcoef) * S[i];
    }
    Eigen::VectorXd d = -q;
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      S.clear();
      Y.clear();
      rho.clear();
      d = -g;
      slope = g.dot(d);
    }
    double step = S.empty() ? std::min(1.0, 1.0 / std::max(1e-12, g.norm())) : 1.0;
    Eigen::VectorXd x_new;
    Eigen::VectorXd g_new;
    double f_new = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      x_new = r.x + step * d;
      f_new = f(x_new, &g_new);
      if (std::isfinite(f_new) && f_new <= r.value + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    Eigen::VectorXd s = x_new - r.x;
    Eigen::VectorXd yv = g_new - g;
    const double sy = s.dot(yv);
    if (sy > 1e-12) {
      S.push_back(std::move(s));
      Y.push_back(std::move(yv));
      rho.push_back(1.0 / sy);
      if (static_cast<int>(S.size()) > options.memory) {
        S.erase(S.begin());
        Y.erase(Y.begin());
        rho.erase(rho.begin());
      }
    }
    r.x = std::move(x_new);
    g = std::move(g_new);
    r.value = f_new;
    r.gradient_norm = g.norm();
    r.trace.push_back(r.value);
  }
  if (r.gradient_norm < options.gradient_tolerance) r.converged = true;
  return r;
}

namespace {

void standardization(const Eigen::MatrixXd& X, Eigen::VectorXd& means, Eigen::VectorXd& stds) {
  means = X.colwise().mean().transpose();
  stds.resize(X.cols());
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    const double var = (X.col(c).array() - means(c)).square().mean();
    stds(c) = var > 1e-24 ? std::sqrt(var) : 1.0;
  }
}

Eigen::MatrixXd standardize(const Eigen::MatrixXd& X, const Eigen::VectorXd& means, const Eigen::VectorXd& stds) {
  return (X.rowwise() - means.transpose()).array().rowwise() / stds.transpose().array();
}

}  // namespace

double ClassifierModel::predict(const Eigen::VectorXd& features) const {
  if (features.size() != weights.size()) throw InvalidArgument("classifier: feature count mismatch");
  const Eigen::VectorXd z = (features - means).cwiseQuotient(stds);
  const double s = z.dot(weights) + bias;
  return s >= 0.0 ? 1.0 / (1.0 + std::exp(-s)) : std::exp(s) / (1.0 + std::exp(s));
}

Eigen::VectorXd ClassifierModel::predict_all(const Eigen::MatrixXd& features) const {
  Eigen::VectorXd out(features.rows());
  for (Eigen::Index i = 0; i < features.rows(); ++i) out(i) = predict(features.row(i).transpose());
  return out;
}

std::vector<std::pair<std::string, double>> ClassifierModel::importance() const {
  std::vector<std::pair<std::string, double>> out;
  for (Eigen::Index i = 0; i < weights.size(); ++i)
    out.emplace_back(i < static_cast<Eigen::Index>(feature_names.size()) ? feature_names[static_cast<std::size_t>(i)]
                                                                          : "f" + std::to_string(i),
                     std::abs(weights(i)));
  return out;
}

ClassifierModel train_classifier(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double l2,
                                 const LbfgsOptions& options) {
  if (X.rows() != y.size() || X.rows() == 0) throw InvalidArgument("classifier: empty or mismatched training data");
  if (!(l2 >= 0.0)) throw InvalidArgument("classifier: l2 strength must be non-negative");
  const Eigen::Index positives = (y.array() > 0.5).count();
  if (positives == 0 || positives == y.size()) throw InvalidArgument("classifier: training data has a single class");
  ClassifierModel model;
  model.l2 = l2;
  standardization(X, model.means, model.stds);
  const Eigen::MatrixXd Xs = standardize(X, model.means, model.stds);
  const auto result = minimize_lbfgs(
      [&](const Eigen::VectorXd& theta, Eigen::VectorXd* grad) { return logistic_objective(theta, Xs, y, l2, grad); },
      Eigen::VectorXd::Zero(X.cols() + 1), options);
  model.weights = result.x.head(X.cols());
  model.bias = result.x(X.cols());
  if (X.cols() == kFeatureCount)
    for (auto n : kFeatureNames) model.feature_names.emplace_back(n);
  else
    for (Eigen::Index i = 0; i < X.cols(); ++i) model.feature_names.push_back("f" + std::to_string(i));
  return model;
}

double select_l2(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const std::vector<double>& grid, int folds,
                 std::uint64_t seed) {
  if (grid.empty()) throw InvalidArgument("select_l2: empty grid");
  const int n = static_cast<int>(X.rows());
  folds = std::max(2, std::min(folds, n));
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  for (int i = n - 1; i > 0; --i) std::swap(order[i], order[static_cast<int>(rng() % static_cast<std::uint64_t>(i + 1))]);

  double best = grid.front();
  double best_loss = std::numeric_limits<double>::infinity();
  for (double l2 : grid) {
    double loss = 0.0;
    int evaluated = 0;
    for (int f = 0; f < folds; ++f) {
      std::vector<int> train;
      std::vector<int> test;
      for (int i = 0; i < n; ++i) (i % folds == f ? test : train).push_back(order[i]);
      Eigen::MatrixXd Xt(static_cast<Eigen::Index>(train.size()), X.cols());
      Eigen::VectorXd yt(static_cast<Eigen::Index>(train.size()));
      for (std::size_t i = 0; i < train.size(); ++i) {
        Xt.row(static_cast<Eigen::Index>(i)) = X.row(train[i]);
        yt(static_cast<Eigen::Index>(i)) = y(train[i]);
      }
      ClassifierModel m;
      try {
        m = train_classifier(Xt, yt, l2);
      } catch (const InvalidArgument&) {
        continue;
      }
      for (int i : test) {
        const double p = std::clamp(m.predict(X.row(i).transpose()), 1e-12, 1.0 - 1e-12);
        loss -= y(i) > 0.5 ? std::log(p) : std::log(1.0 - p);
        ++evaluated;
      }
    }
    if (evaluated == 0) continue;
    loss /= evaluated;
    if (loss < best_loss) {
      best_loss = loss;
      best = l2;
    }
  }
  return best;
}

std::string classifier_to_json(const ClassifierModel& model) {
  auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  nlohmann::ordered_json j;
  j["feature_names"] = model.feature_names;
  j["weights"] = vec(model.weights);
  j["bias"] = model.bias;
  j["l2"] = model.l2;
  j["means"] = vec(model.means);
  j["stds"] = vec(model.stds);
  return j.dump(2) + "\n";
}

ClassifierModel classifier_from_json(std::string_view document) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(document);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("model file is not valid JSON: ") + e.what());
  }
  ClassifierModel m;
  try {
    auto vec = [&](const char* key) {
      const auto v = j.at(key).get<std::vector<double>>();
      return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
    };
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    m.weights = vec("weights");
    m.bias = j.at("bias").get<double>();
    m.l2 = j.at("l2").get<double>();
    m.means = vec("means");
    m.stds = vec("stds");
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model file: ") + e.what());
  }
  if (m.means.size() != m.weights.size() || m.stds.size() != m.weights.size() ||
      m.feature_names.size() != static_cast<std::size_t>(m.weights.size()))
    throw ParseError("model file: inconsistent vector lengths");
  return m;
}

Segmentation segment_from_probabilities(const Eigen::MatrixXd& probabilities, int K) {
  if (probabilities.rows() != probabilities.cols()) throw InvalidArgument("probability matrix is not square");
  Eigen::MatrixXd W = (0.5 * (probabilities + probabilities.transpose())).cwiseMax(0.0).cwiseMin(1.0);
  W.diagonal().setZero();
  const Partition p = partition_ncut(W, K);
  Segmentation seg = Segmentation::from_labels(p.cluster_of);
  seg.K = K;
  return seg;
}

Segmentation supervised_segment(const PairContext& ctx, const ClassifierModel& model, int K, int threads) {
  const int n = static_cast<int>(ctx.conversation->sentences.size());
  const Eigen::VectorXd p = model.predict_all(extract_all_pair_features(ctx, threads));
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  Eigen::Index row = 0;
  for (int x = 0; x < n; ++x)
    for (int y = x + 1; y < n; ++y) P(x, y) = P(y, x) = p(row++);
  return segment_from_probabilities(P, K);
}

}  // namespace convtopic
