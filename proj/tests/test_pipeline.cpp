#include <doctest.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "convtopic/error.hpp"
#include "convtopic/metrics.hpp"
#include "convtopic/pipeline.hpp"
#include "helpers.hpp"

using namespace convtopic;

namespace {

Conversation twelve() {
  std::vector<std::string> t;
  for (int i = 0; i < 12; ++i) t.push_back("Sentence number " + std::to_string(i) + ".");
  return testing::flat(t);
}

PipelineConfig quick() {
  PipelineConfig c;
  c.lda_iterations = 30;
  c.ranker = "bias";
  return c;
}

}  // namespace

TEST_CASE("topic count policy") {
  CHECK(topic_count_policy({3, 3, 5}) == 3);
  CHECK(topic_count_policy({2, 3, 5}) == 3);
  CHECK(topic_count_policy({2, 2, 5, 5}) == 3);
  CHECK(topic_count_policy({2, 3, 5}, 4) == 4);
  CHECK_THROWS_AS(topic_count_policy(std::vector<int>{}), ConfigError);
  const auto gold = load_gold(testing::corpus_file("wg-meeting.gold.json"));
  CHECK(topic_count_policy(&gold) == 5);
}

TEST_CASE("baselines") {
  const auto conv = twelve();
  const auto blocks = run_baseline("blocks-5", conv);
  CHECK(blocks.topic_of == std::vector<int>{0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 2, 2});
  CHECK(entropy(run_baseline("all-same", conv)) == 0.0);
  CHECK(entropy(run_baseline("all-different", conv)) == doctest::Approx(std::log2(12.0)));
  // k is the block size
  CHECK(run_baseline("blocks", conv, 4).k_effective() == 3);
  CHECK(is_baseline("speaker"));
  CHECK_FALSE(is_baseline("lcseg"));
  CHECK_THROWS(run_baseline("blocks", conv));

  const auto thread = testing::conversation({{"a", std::nullopt, "ann", "One."},
                                             {"b", std::string("a"), "bob", "Two."},
                                             {"c", std::string("b"), "ann", "Three."},
                                             {"d", std::string("c"), "", "Four."},
                                             {"e", std::string("d"), "", "Five."}});
  const auto sp = run_baseline("speaker", thread);
  CHECK(sp.same_topic(0, 2));
  CHECK_FALSE(sp.same_topic(0, 1));
  CHECK_FALSE(sp.same_topic(3, 4));
}

TEST_CASE("config text round trip") {
  PipelineConfig c;
  c.segmenter = "mb";
  c.topics = 4;
  c.rho = 0.5;
  c.seed = 99;
  c.filter = "nouns";
  c.similarity_table = "sim table.tsv";
  const auto back = parse_config(config_to_text(c));
  CHECK(config_to_text(back) == config_to_text(c));
  CHECK(back.topics == 4);
  CHECK(back.similarity_table == "sim table.tsv");
  CHECK_FALSE(parse_config(config_to_text(PipelineConfig{})).topics.has_value());
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(parse_config("no_such_key = 1"), ConfigError);
  CHECK_THROWS_AS(parse_config("rho = lots"), ConfigError);
  CHECK_THROWS_AS(parse_config("labels_k = 0"), ConfigError);
  CHECK_THROWS_AS(parse_config("this is not a setting"), ConfigError);
  const auto c = parse_config("# comment\nsegmenter = \"mb\"\n\nworkers = 3\n");
  CHECK(c.segmenter == "mb");
  CHECK(c.workers == 3);
  CHECK(parse_filter(filter_name(SyntacticFilter::Nouns)) == SyntacticFilter::Nouns);
}

TEST_CASE("seed from the environment") {
  PipelineConfig c;
  setenv("CONVTOPIC_SEED", "77", 1);
  apply_environment(c);
  unsetenv("CONVTOPIC_SEED");
  CHECK(c.seed == 77);
  apply_environment(c);
  CHECK(c.seed == 77);
}

TEST_CASE("supervised without a model is a configuration error") {
  auto c = quick();
  c.segmenter = "supervised";
  const auto corpus = load_corpus(CONVTOPIC_CORPUS_DIR);
  CHECK_THROWS_AS(run_pipeline(c, corpus), ConfigError);
  c.segmenter = "nope";
  CHECK_THROWS_AS(run_pipeline(c, corpus), ConfigError);
}

TEST_CASE("corpus loading") {
  const auto corpus = load_corpus(CONVTOPIC_CORPUS_DIR);
  REQUIRE(corpus.size() == 2);
  CHECK(corpus[0].id == "daggerfall");
  CHECK(corpus[1].id == "wg-meeting");
  CHECK(corpus[0].gold.has_value());
}

TEST_CASE("segmentation JSON round trip") {
  Segmentation s{{0, 2, 1, 2}, 3};
  const auto back = segmentation_from_json(segmentation_to_json("x", s, "mb"));
  CHECK(back == s);
}

TEST_CASE("each segmenter produces a valid segmentation") {
  const auto conv = load_conversation(testing::corpus_file("daggerfall.conv.json"));
  const auto fqg = build_fqg(conv);
  for (const char* name : {"lcseg", "lcseg-fqg", "lda", "lda-fqg", "mb", "mb-tfidf", "speaker", "blocks-5"}) {
    auto c = quick();
    c.segmenter = name;
    const auto s = run_segmenter(c, conv, fqg, 3);
    CHECK(s.size() == conv.size());
    for (int t : s.topic_of) CHECK(t >= 0);
  }
}

TEST_CASE("pipeline over the bundled corpus") {
  const auto corpus = load_corpus(CONVTOPIC_CORPUS_DIR);
  const auto result = run_pipeline(quick(), corpus);
  REQUIRE(result.conversations.size() == 2);
  CHECK(result.failures() == 0);
  for (const auto& r : result.conversations) {
    REQUIRE(r.scores.has_value());
    CHECK(r.labels.size() == static_cast<std::size_t>(r.segmentation.K));
    for (double v : r.scores->one_to_one) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
  CHECK(result.conversations[1].K == 5);
  const auto tsv = report_tsv(result);
  CHECK(tsv.find("CORPUS_mean") != std::string::npos);
  CHECK(report_json(result).front() == '{');

  const auto dir = std::filesystem::temp_directory_path() / "convtopic_unit_pipeline";
  std::filesystem::remove_all(dir);
  auto c = quick();
  c.out = dir.string();
  write_pipeline_outputs(c, result);
  CHECK(std::filesystem::exists(dir / "daggerfall.seg.json"));
  CHECK(std::filesystem::exists(dir / "wg-meeting.labels.json"));
  CHECK(std::filesystem::exists(dir / "report.tsv"));
  std::ifstream in(dir / "effective.conf");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(config_to_text(parse_config(text)) == config_to_text(c));
  std::filesystem::remove_all(dir);
}

TEST_CASE("annotation report") {
  const auto tsv = annotation_report_tsv(load_corpus(CONVTOPIC_CORPUS_DIR));
  CHECK(tsv.find("blocks-5") != std::string::npos);
  CHECK(tsv.find("blocks-10") != std::string::npos);
}

TEST_CASE("parallel_for visits each index once") {
  std::vector<std::atomic<int>> hits(100);
  parallel_for(100, 4, [&](std::size_t i) { ++hits[i]; });
  for (const auto& h : hits) CHECK(h.load() == 1);
  parallel_for(0, 4, [](std::size_t) { FAIL("called"); });
}

TEST_CASE("effective configuration reproduces the run") {
  const auto corpus = load_corpus(CONVTOPIC_CORPUS_DIR);
  auto c = quick();
  c.segmenter = "lda-fqg";
  c.seed = 5;
  const auto first = run_pipeline(c, corpus);
  const auto again = run_pipeline(parse_config(config_to_text(c)), corpus);
  CHECK(report_json(first) == report_json(again));
  for (std::size_t i = 0; i < first.conversations.size(); ++i)
    CHECK(first.conversations[i].segmentation == again.conversations[i].segmentation);
}
