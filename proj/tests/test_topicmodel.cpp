#include <doctest.h>

#include <algorithm>
#include <random>

#include "convtopic/error.hpp"
#include "convtopic/fqg.hpp"
#include "convtopic/topicmodel.hpp"
#include "helpers.hpp"

using namespace convtopic;

namespace {

BagOfWords synthetic(std::uint64_t seed, int docs, int length, int vocab) {
  std::mt19937_64 rng(seed);
  BagOfWords bow;
  for (int w = 0; w < vocab; ++w) bow.vocab.add("w" + std::to_string(w));
  std::uniform_int_distribution<int> half(0, vocab / 2 - 1);
  for (int d = 0; d < docs; ++d) {
    std::vector<int> doc;
    for (int i = 0; i < length; ++i) doc.push_back(half(rng) + (d % 2) * (vocab / 2));
    bow.docs.push_back(doc);
  }
  return bow;
}

Vocabulary abcp() { return Vocabulary({"a", "b", "c", "p"}); }

WordNetwork chain_network() {
  WordNetwork net;
  net.link("a", "b");
  net.link("b", "c");
  return net;
}

}  // namespace

TEST_CASE("vocabulary") {
  Vocabulary v;
  CHECK(v.add("x") == 0);
  CHECK(v.add("y") == 1);
  CHECK(v.add("x") == 0);
  CHECK(v.find("z") == -1);
  CHECK(v.size() == 2);
}

TEST_CASE("word network is undirected") {
  WordNetwork net;
  net.link("b", "a");
  CHECK(net.linked("a", "b"));
  CHECK(net.linked("b", "a"));
  net.link("a", "b");
  CHECK(net.size() == 1);
  net.link("a", "a");
  CHECK(net.size() == 1);
}

TEST_CASE("word network from fragments") {
  const auto conv = testing::conversation({{"a", std::nullopt, "x", "Server crashed."},
                                           {"b", std::string("a"), "y", "Reboot fixed."}});
  const auto net = build_word_network(conv, build_fqg(conv));
  CHECK(net.linked("server", "crash"));
  CHECK(net.linked("server", "reboot"));
  CHECK(net.linked("reboot", "fix"));
}

TEST_CASE("Dirichlet tree of a linked component and a lone word") {
  const double beta = 0.01;
  const auto tree = build_dirichlet_tree(chain_network(), abcp(), beta, 20.0);
  const auto& root = tree.node(0);
  REQUIRE(root.children.size() == 2);
  std::vector<double> weights;
  for (int c : root.children) weights.push_back(tree.node(c).weight);
  std::sort(weights.begin(), weights.end());
  CHECK(weights[0] == doctest::Approx(beta));
  CHECK(weights[1] == doctest::Approx(3 * beta));
  const auto internal = tree.internal_nodes();
  REQUIRE(internal.size() == 1);
  CHECK(tree.node(internal[0]).children.size() == 3);
  CHECK(tree.delta(internal[0]) == doctest::Approx(3 * beta - 60 * beta));
  CHECK(tree.path(3).size() == 1);
  CHECK(tree.path(0).size() == 2);

  const auto balanced = build_dirichlet_tree(chain_network(), abcp(), beta, 1.0);
  CHECK(balanced.delta(balanced.internal_nodes()[0]) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("flat tree") {
  const DirichletTree flat(5, 0.1);
  CHECK(flat.internal_nodes().empty());
  CHECK(flat.child_weight(0) == doctest::Approx(0.5));
  for (int w = 0; w < 5; ++w) CHECK(flat.path(w).size() == 1);
}

TEST_CASE("K = 1 puts every token in topic 0") {
  const auto bow = synthetic(5, 6, 10, 8);
  LdaOptions o;
  o.K = 1;
  o.iterations = 20;
  const auto m = fit_lda(bow, o);
  for (const auto& zd : m.z)
    for (int z : zd) CHECK(z == 0);
}

TEST_CASE("same seed, same sample; flat tree matches the plain sampler") {
  const auto bow = synthetic(7, 10, 20, 12);
  LdaOptions o;
  o.K = 3;
  o.iterations = 50;
  o.seed = 9;
  const auto a = fit_lda(bow, o);
  const auto b = fit_lda(bow, o);
  CHECK(a.z == b.z);
  const DirichletTree flat(bow.vocab.size(), o.beta);
  CHECK(fit_lda(bow, o, &flat).z == a.z);
  o.seed = 10;
  CHECK(fit_lda(bow, o).z != a.z);
}

TEST_CASE("sampler counts stay consistent with assignments") {
  const auto bow = synthetic(3, 8, 15, 10);
  LdaOptions o;
  o.K = 4;
  o.iterations = 15;
  const auto tree = build_dirichlet_tree(
      [] {
        WordNetwork n;
        n.link("w0", "w1");
        n.link("w1", "w7");
        return n;
      }(),
      bow.vocab, o.beta, 20.0);
  int checked = 0;
  fit_lda(bow, o, &tree, [&](const GibbsState& s) {
    Eigen::MatrixXi dk = Eigen::MatrixXi::Zero(s.doc_topic_counts.rows(), s.doc_topic_counts.cols());
    Eigen::MatrixXi kw = Eigen::MatrixXi::Zero(s.topic_word_counts.rows(), s.topic_word_counts.cols());
    for (std::size_t d = 0; d < s.z.size(); ++d)
      for (std::size_t i = 0; i < s.z[d].size(); ++i) {
        ++dk(static_cast<Eigen::Index>(d), s.z[d][i]);
        ++kw(s.z[d][i], bow.docs[d][i]);
      }
    CHECK(dk == s.doc_topic_counts);
    CHECK(kw == s.topic_word_counts);
    CHECK(s.topic_counts == kw.rowwise().sum());
    ++checked;
  });
  CHECK(checked == 15);
}

TEST_CASE("model distributions are normalized") {
  const auto bow = synthetic(1, 6, 12, 10);
  LdaOptions o;
  o.K = 3;
  o.iterations = 30;
  const auto m = fit_lda(bow, o);
  for (int k = 0; k < 3; ++k) CHECK(m.topic_word.row(k).sum() == doctest::Approx(1.0));
  for (Eigen::Index d = 0; d < m.doc_topic.rows(); ++d) CHECK(m.doc_topic.row(d).sum() == doctest::Approx(1.0));
  for (const auto& doc : m.token_posterior)
    for (const auto& p : doc) {
      CHECK(p.sum() == doctest::Approx(1.0));
      CHECK(p.minCoeff() >= 0.0);
    }
  CHECK(o.effective_alpha() == doctest::Approx(50.0 / 3));
}

TEST_CASE("sentence topic") {
  Eigen::VectorXd a(3), b(3);
  a << 0.5, 0.5, 0.0;
  b << 0.5, 0.5, 0.0;
  CHECK(sentence_topic({a, b}) == 0);
  b << 0.1, 0.8, 0.1;
  CHECK(sentence_topic({b}) == 1);
  CHECK(sentence_topic({}) == -1);
}

TEST_CASE("sentence topics cover a conversation") {
  const auto conv = load_conversation(testing::corpus_file("wg-meeting.conv.json"));
  LdaOptions o;
  o.K = 3;
  o.iterations = 40;
  const auto seg = assign_sentence_topics(fit_lda_fqg(conv, build_fqg(conv), o), conv);
  CHECK(seg.size() == conv.size());
  CHECK(seg.K == 3);
  for (int t : seg.topic_of) {
    CHECK(t >= 0);
    CHECK(t < 3);
  }
  CHECK_FALSE(lda_to_json(fit_lda(conv, o)).empty());
}

TEST_CASE("sentence topic ignores token order") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Eigen::VectorXd> ps;
    for (int i = 0; i < 5; ++i) {
      Eigen::VectorXd p(4);
      for (int k = 0; k < 4; ++k) p(k) = u(rng);
      ps.push_back(p / p.sum());
    }
    const int want = sentence_topic(ps);
    std::shuffle(ps.begin(), ps.end(), rng);
    CHECK(sentence_topic(ps) == want);
  }
}

TEST_CASE("stronger must-links pull linked words together") {
  // r0 and r1 occur once each, in documents of different topics; frequent
  // words are fixed by their counts and barely feel the prior
  auto bow = synthetic(2024, 20, 30, 20);
  const int r0 = bow.vocab.add("r0"), r1 = bow.vocab.add("r1");
  bow.docs[0].push_back(r0);
  bow.docs[1].push_back(r1);
  WordNetwork net;
  net.link("r0", "r1");
  std::vector<double> mean;
  for (double lambda : {1.0, 5.0, 20.0}) {
    double total = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      LdaOptions o;
      o.K = 2;
      o.iterations = 300;
      o.seed = seed;
      const auto tree = build_dirichlet_tree(net, bow.vocab, o.beta, lambda);
      const auto m = fit_lda(bow, o, &tree);
      total += (m.topic_word.col(r0) - m.topic_word.col(r1)).cwiseAbs().sum();
    }
    mean.push_back(total / 10);
  }
  MESSAGE("mean L1 distance for lambda 1, 5, 20: " << mean[0] << " " << mean[1] << " " << mean[2]);
  CHECK(mean[1] <= mean[0] + 1e-12);
  CHECK(mean[2] <= mean[1] + 1e-12);
}
