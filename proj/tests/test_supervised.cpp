#include <doctest.h>

#include <random>

#include "convtopic/error.hpp"
#include "convtopic/supervised.hpp"
#include "helpers.hpp"

using namespace convtopic;

namespace {

enum { kQA = 3, kGreet = 4, kGap = 5, kSpeaker = 6, kSameReply = 10, kName = 11 };

Conversation small_thread() {
  return testing::conversation({{"c0", std::nullopt, "Alice Smith", "Is the build broken?"},
                                {"c1", std::string("c0"), "Bob", "Yes, since Monday."},
                                {"c2", std::nullopt, "Alice Smith", "Hello everyone."},
                                {"c3", std::string("c2"), "Carol", "Good to see you Alice."}});
}

PairContextOptions quick(int K) {
  PairContextOptions o;
  o.K = K;
  o.lda.iterations = 30;
  return o;
}

Segmentation seg(std::vector<int> t) { return Segmentation::from_labels(t); }

}  // namespace

TEST_CASE("pair features on a small thread") {
  const auto conv = small_thread();
  const auto ctx = build_pair_context(conv, quick(2));
  const auto f01 = extract_pair_features(ctx, 0, 1);
  CHECK(f01(kQA) == 1.0);
  CHECK(f01(kSameReply) == 1.0);
  CHECK(f01(kGap) == 1.0);
  CHECK(f01(kSpeaker) == 0.0);
  CHECK(f01(kGreet) == 0.0);
  const auto f02 = extract_pair_features(ctx, 0, 2);
  CHECK(f02(kSpeaker) == 1.0);
  CHECK(f02(kGreet) == 1.0);
  CHECK(f02(kSameReply) == 0.0);
  CHECK(f02(kGap) == 2.0);
  CHECK(f02(kQA) == 0.0);
  CHECK(extract_pair_features(ctx, 2, 3)(kName) == 1.0);
  CHECK_THROWS_AS(extract_pair_features(ctx, 1, 1), InvalidArgument);
  CHECK_THROWS_AS(extract_pair_features(ctx, 2, 1), InvalidArgument);

  const auto all = extract_all_pair_features(ctx, 2);
  CHECK(all.rows() == 6);
  CHECK(all.cols() == kFeatureCount);
  CHECK(all.row(0).transpose() == f01);
  CHECK(all.row(1).transpose() == f02);
  CHECK(extract_all_pair_features(ctx, 1) == all);
}

TEST_CASE("pair expansion") {
  std::vector<Segmentation> anns(1, seg({0, 0, 1, 1, 2, 2, 3, 3, 4, 4}));
  CHECK(pair_expansion(anns).size() == 45);
  const auto pairs = pair_expansion({seg({0, 0, 1}), seg({0, 1, 1}), seg({0, 0, 0})});
  REQUIRE(pairs.size() == 3);
  CHECK(pairs[0].x == 0);
  CHECK(pairs[0].y == 1);
  CHECK(pairs[0].same);        // 2 of 3
  CHECK_FALSE(pairs[1].same);  // (0,2): 1 of 3
  CHECK(pairs[2].same);        // (1,2): 2 of 3
  // two annotators split: no strict majority
  CHECK_FALSE(pair_expansion({seg({0, 0}), seg({0, 1})})[0].same);
}

TEST_CASE("logistic objective at zero") {
  Eigen::MatrixXd X(2, 1);
  X << 1, -1;
  Eigen::VectorXd y(2);
  y << 1, 0;
  Eigen::VectorXd g;
  CHECK(logistic_objective(Eigen::VectorXd::Zero(2), X, y, 0.0, &g) == doctest::Approx(std::log(2.0)));
  CHECK(g(1) == doctest::Approx(0.0));
  CHECK(g(0) < 0.0);
}

TEST_CASE("lbfgs on a quadratic") {
  const auto r = minimize_lbfgs(
      [](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
        if (g) *g = Eigen::Vector2d(2 * (x(0) - 3), 20 * (x(1) + 1));
        return (x(0) - 3) * (x(0) - 3) + 10 * (x(1) + 1) * (x(1) + 1);
      },
      Eigen::VectorXd::Zero(2));
  CHECK(r.converged);
  CHECK(r.x(0) == doctest::Approx(3.0).epsilon(1e-5));
  CHECK(r.x(1) == doctest::Approx(-1.0).epsilon(1e-5));
  for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i] <= r.trace[i - 1] + 1e-12);
}

TEST_CASE("separable data is classified perfectly") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> noise(0.0, 1.0);
  Eigen::MatrixXd X(60, kFeatureCount);
  Eigen::VectorXd y(60);
  for (int i = 0; i < 60; ++i) {
    for (int j = 0; j < kFeatureCount; ++j) X(i, j) = noise(rng);
    y(i) = i % 2;
    X(i, 3) = (i % 2 ? 2.0 : -2.0) + 0.3 * noise(rng);
  }
  const auto model = train_classifier(X, y, 0.01);
  const auto p = model.predict_all(X);
  for (int i = 0; i < 60; ++i) CHECK((p(i) > 0.5) == (y(i) == 1.0));
  CHECK(model.predict(X.row(0).transpose()) == doctest::Approx(p(0)));
  const auto imp = model.importance();
  REQUIRE(imp.size() == static_cast<std::size_t>(kFeatureCount));
  CHECK(imp[3].first == "QA");
  for (const auto& [name, w] : imp) CHECK(w <= imp[3].second);

  const auto back = classifier_from_json(classifier_to_json(model));
  CHECK(back.feature_names == model.feature_names);
  CHECK((back.predict_all(X) - p).cwiseAbs().maxCoeff() < 1e-12);

  const double l2 = select_l2(X, y, {0.01, 0.1, 1, 10}, 5);
  CHECK((l2 == 0.01 || l2 == 0.1 || l2 == 1 || l2 == 10));
  CHECK_THROWS_AS(classifier_from_json("{}"), Error);
}

TEST_CASE("segmentation from exact block probabilities") {
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(9, 9);
  const std::vector<int> truth = {0, 0, 0, 1, 1, 1, 2, 2, 2};
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 9; ++j)
      if (i != j && truth[i] == truth[j]) P(i, j) = 1.0;
  CHECK(same_partition(segment_from_probabilities(P, 3), seg(truth)));
}

TEST_CASE("segmentation from noisy block probabilities") {
  const std::vector<int> truth = {0, 1, 0, 2, 1, 2, 0, 1, 2, 0, 1, 2};
  for (std::uint64_t s = 1; s <= 20; ++s) {
    std::mt19937_64 rng(s);
    std::uniform_real_distribution<double> u(-0.1, 0.1);
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(12, 12);
    for (int i = 0; i < 12; ++i)
      for (int j = i + 1; j < 12; ++j) P(i, j) = P(j, i) = (truth[i] == truth[j] ? 0.8 : 0.2) + u(rng);
    CHECK(same_partition(segment_from_probabilities(P, 3), seg(truth)));
  }
}

TEST_CASE("full-rank LSA reconstructs the weighted matrix") {
  const auto conv = load_conversation(testing::corpus_file("wg-meeting.conv.json"));
  const int full = static_cast<int>(std::min<std::size_t>(conv.comments.size(), 1000));
  const auto lsa = compute_lsa(conv, full);
  const Eigen::MatrixXd R = lsa.U * lsa.sigma.asDiagonal() * lsa.V.transpose();
  CHECK((R - lsa.W).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(lsa.sentence_vectors.rows() == static_cast<Eigen::Index>(conv.size()));
  CHECK(default_lsa_rank(conv) == 1);
  CHECK_THROWS_AS(compute_lsa(conv, 0), InvalidArgument);
  CHECK_THROWS_AS(compute_lsa(conv, full + 1), InvalidArgument);
}

TEST_CASE("supervised segmentation end to end") {
  const auto conv = load_conversation(testing::corpus_file("daggerfall.conv.json"));
  const auto ctx = build_pair_context(conv, quick(3));
  const auto X = extract_all_pair_features(ctx);
  const auto gold = load_gold(testing::corpus_file("daggerfall.gold.json"));
  const auto pairs = pair_expansion(gold);
  Eigen::VectorXd y(static_cast<Eigen::Index>(pairs.size()));
  for (std::size_t i = 0; i < pairs.size(); ++i) y(static_cast<Eigen::Index>(i)) = pairs[i].same;
  const auto model = train_classifier(X, y, 1.0);
  const auto s = supervised_segment(ctx, model, 3);
  CHECK(s.size() == conv.size());
  CHECK(s.K == 3);
}

TEST_CASE("logistic training decreases monotonically to a small gradient") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd X(80, 4);
  Eigen::VectorXd y(80);
  for (int i = 0; i < 80; ++i) {
    for (int j = 0; j < 4; ++j) X(i, j) = g(rng);
    y(i) = X(i, 0) - 0.5 * X(i, 2) + 0.8 * g(rng) > 0 ? 1.0 : 0.0;
  }
  const auto r = minimize_lbfgs(
      [&](const Eigen::VectorXd& t, Eigen::VectorXd* grad) { return logistic_objective(t, X, y, 0.1, grad); },
      Eigen::VectorXd::Zero(5));
  CHECK(r.converged);
  CHECK(r.gradient_norm < 1e-6);
  for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i] <= r.trace[i - 1]);
}

TEST_CASE("oracle probabilities reconstruct gold partitions") {
  for (const char* name : {"daggerfall.gold.json", "wg-meeting.gold.json"}) {
    const auto gold = load_gold(testing::corpus_file(name));
    for (const auto& ann : gold.annotators) {
      const auto& s = ann.segmentation;
      const auto n = static_cast<Eigen::Index>(s.size());
      Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
          if (i != j && s.same_topic(static_cast<int>(i), static_cast<int>(j))) P(i, j) = 1.0;
      CHECK(same_partition(segment_from_probabilities(P, s.k_effective()), s));
    }
  }
}
