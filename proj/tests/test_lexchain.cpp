#include <doctest.h>

#include <cmath>
#include <random>

#include "convtopic/fqg.hpp"
#include "convtopic/lexchain.hpp"
#include "convtopic/similarity.hpp"
#include "helpers.hpp"

using namespace convtopic;

namespace {

std::vector<Sentence> sentences_of(const std::vector<std::string>& texts) { return testing::flat(texts).sentences; }

const LexicalChain* find_chain(const std::vector<LexicalChain>& chains, const std::string& stem, int first) {
  for (const auto& c : chains)
    if (c.stem == stem && c.first == first) return &c;
  return nullptr;
}

std::vector<std::string> two_blocks() {
  std::vector<std::string> t;
  for (int i = 0; i < 6; ++i) t.push_back("Apple banana cherry harvest.");
  for (int i = 0; i < 6; ++i) t.push_back("Rocket planet orbit launch.");
  return t;
}

}  // namespace

TEST_CASE("chain over close repetitions") {
  std::vector<std::string> t(5, "Nothing relevant.");
  t[1] = t[2] = t[3] = "The server crashed.";
  const auto chains = build_chains(sentences_of(t));
  const auto* c = find_chain(chains, "server", 1);
  REQUIRE(c);
  CHECK(c->occurrences == std::vector<int>{1, 2, 3});
  CHECK(c->freq == 3);
  // 3 * ln(5 / 3)
  CHECK(c->score == doctest::Approx(3 * std::log(5.0 / 3.0)));
}

TEST_CASE("hiatus splits a chain") {
  std::vector<std::string> t(25, "Nothing relevant.");
  t[1] = "The server crashed.";
  t[20] = "The server crashed.";
  const auto chains = build_chains(sentences_of(t), 11);
  CHECK(find_chain(chains, "server", 1));
  CHECK(find_chain(chains, "server", 20));
  const auto merged = build_chains(sentences_of(t), 30);
  REQUIRE(find_chain(merged, "server", 1));
  CHECK(find_chain(merged, "server", 1)->last == 20);
}

TEST_CASE("stopwords form no chains") {
  const auto chains = build_chains(sentences_of({"the the", "the", "the of"}));
  CHECK(chains.empty());
}

TEST_CASE("dense cosine") {
  Eigen::VectorXd a(3), b(3);
  a << 2, 1, 0;
  b << 2, 0, 1;
  CHECK(cosine(a, b) == doctest::Approx(0.8));
  CHECK(cosine(a, Eigen::VectorXd::Zero(3)) == 0.0);
}

TEST_CASE("sparse cosine") {
  TermVector a{{"x", 2}, {"y", 1}}, b{{"x", 1}, {"y", 2}};
  CHECK(cosine(a, b) == doctest::Approx(0.8));
  CHECK(cosine(a, TermVector{}) == 0.0);
  const auto s = sentences_of({"Server crashed again.", "Server crashed."});
  CHECK(cosine_tf(s[0], s[0]) == doctest::Approx(1.0));
}

TEST_CASE("idf weighting zeroes words present everywhere") {
  const auto s = sentences_of({"Server crashed.", "Server rebooted."});
  const auto idf = sentence_idf(s);
  CHECK(idf.at("server") == doctest::Approx(0.0));
  CHECK(idf.at("crash") == doctest::Approx(std::log(2.0)));
  CHECK(cosine_tfidf(s[0], s[1], idf) == doctest::Approx(0.0));
}

TEST_CASE("lcseg finds the block boundary") {
  const auto s = sentences_of(two_blocks());
  const auto chains = build_chains(s);
  CHECK(lcseg_boundaries(12, chains, 2) == std::vector<int>{6});
  const auto cohesion = lcseg_cohesion(12, chains);
  CHECK(cohesion.size() == 11);
  const auto seg = lcseg_segment(testing::flat(two_blocks()), 2);
  CHECK(seg.topic_of == std::vector<int>{0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1});
}

TEST_CASE("lcseg with K = 1 is a single segment") {
  const auto seg = lcseg_segment(testing::flat(two_blocks()), 1);
  CHECK(seg.K == 1);
  CHECK(seg.k_effective() == 1);
  CHECK(lcseg_boundaries(12, build_chains(sentences_of(two_blocks())), 1).empty());
}

TEST_CASE("lcseg boundaries are ascending and K-1 of them") {
  std::vector<std::string> t;
  const char* words[] = {"apple", "rocket", "violin", "glacier", "pepper"};
  for (int i = 0; i < 30; ++i) t.push_back(std::string(words[(i / 3) % 5]) + " " + words[(i / 7) % 5] + " thing.");
  const auto chains = build_chains(sentences_of(t));
  for (int K = 1; K <= 8; ++K) {
    const auto b = lcseg_boundaries(30, chains, K);
    CHECK(static_cast<int>(b.size()) == K - 1);
    for (std::size_t i = 0; i < b.size(); ++i) {
      CHECK(b[i] >= 1);
      CHECK(b[i] <= 29);
      if (i > 0) CHECK(b[i - 1] < b[i]);
    }
  }
}

TEST_CASE("lcseg over the fragment graph") {
  const auto conv = load_conversation(testing::corpus_file("daggerfall.conv.json"));
  const auto g = build_fqg(conv);
  const auto paths = path_sentences(g);
  CHECK(paths.size() == extract_paths(g).size());
  for (int K = 1; K <= 4; ++K) {
    const auto seg = lcseg_fqg_segment(conv, g, K);
    CHECK(seg.size() == conv.size());
    CHECK(seg.k_effective() <= K);
    for (int t : seg.topic_of) {
      CHECK(t >= 0);
      CHECK(t < K);
    }
  }
}

TEST_CASE("consolidation graph counts co-segment paths") {
  const auto conv = testing::flat({"Alpha beta.", "Gamma delta.", "Alpha beta."});
  const std::vector<std::vector<int>> paths = {{0, 1}, {0, 1, 2}};
  std::vector<Segmentation> segs(2);
  segs[0].topic_of = {0, 0};
  segs[0].K = 1;
  segs[1].topic_of = {0, 0, 1};
  segs[1].K = 2;
  const auto W = consolidation_graph(conv, paths, segs);
  CHECK(W(0, 1) == doctest::Approx(2.0));
  CHECK(W(1, 0) == doctest::Approx(2.0));
  // never co-segmented: falls back to cosine
  CHECK(W(0, 2) == doctest::Approx(1.0));
  CHECK(W(1, 2) == doctest::Approx(0.0));
}

namespace {

std::vector<std::string> random_texts(std::mt19937_64& rng, int n) {
  const char* words[] = {"apple", "rocket", "violin", "glacier", "pepper", "engine", "harbor", "lantern"};
  std::uniform_int_distribution<int> pick(0, 7), len(1, 4);
  std::vector<std::string> t;
  for (int i = 0; i < n; ++i) {
    std::string s;
    for (int j = len(rng); j > 0; --j) s += std::string(words[pick(rng)]) + " ";
    t.push_back(s + "done.");
  }
  return t;
}

}  // namespace

TEST_CASE("lexcoh is symmetric and bounded") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const auto chains = build_chains(sentences_of(random_texts(rng, 20)));
    std::uniform_int_distribution<int> pos(0, 18);
    const int a = pos(rng), b = pos(rng);
    const Window x{a, a + 1}, y{b, b + 1};
    const double v = lexcoh(x, y, chains);
    CHECK(v == doctest::Approx(lexcoh(y, x, chains)));
    CHECK(v >= 0.0);
    CHECK(v <= 1.0 + 1e-12);
  }
}

TEST_CASE("lcseg yields exactly K contiguous segments") {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 8 + trial;
    const auto conv = testing::flat(random_texts(rng, n));
    for (int K : {1, 2, 3, 5}) {
      const auto s = lcseg_segment(conv, K);
      CHECK(s.k_effective() == K);
      CHECK(s.topic_of.front() == 0);
      for (int i = 1; i < n; ++i) {
        const int step = s.topic_of[i] - s.topic_of[i - 1];
        CHECK((step == 0 || step == 1));
      }
    }
  }
}

TEST_CASE("lcseg boundaries ignore a uniform rescaling of chain scores") {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 20; ++trial) {
    auto chains = build_chains(sentences_of(random_texts(rng, 25)));
    const auto before = lcseg_boundaries(25, chains, 4);
    for (auto& c : chains) c.score *= 7.5;
    CHECK(lcseg_boundaries(25, chains, 4) == before);
  }
}

TEST_CASE("single-path graph reduces to plain lcseg") {
  std::mt19937_64 rng(34);
  const auto texts = random_texts(rng, 12);
  std::vector<testing::C> cs;
  for (std::size_t i = 0; i < texts.size(); ++i)
    cs.push_back({"c" + std::to_string(i), i ? std::optional<std::string>("c" + std::to_string(i - 1)) : std::nullopt, "u",
                  texts[i]});
  const auto conv = testing::conversation(cs);
  const auto g = build_fqg(conv);
  REQUIRE(extract_paths(g).size() == 1);
  for (int K : {2, 3})
    CHECK(same_partition(lcseg_fqg_segment(conv, g, K), lcseg_segment(conv, K)));
}

TEST_CASE("consolidation weights are symmetric and non-negative") {
  for (const char* name : {"daggerfall.conv.json", "wg-meeting.conv.json"}) {
    const auto conv = load_conversation(testing::corpus_file(name));
    const auto g = build_fqg(conv);
    const auto paths = path_sentences(g);
    std::vector<Segmentation> segs;
    for (const auto& p : paths) {
      std::vector<const Sentence*> s;
      for (int id : p) s.push_back(&conv.sentences[static_cast<std::size_t>(id)]);
      segs.push_back(lcseg_segment(s, std::min<int>(2, static_cast<int>(s.size()))));
    }
    const auto W = consolidation_graph(conv, paths, segs);
    CHECK((W - W.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(W.minCoeff() >= 0.0);
  }
}
