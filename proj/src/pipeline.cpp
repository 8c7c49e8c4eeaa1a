#include "convtopic/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <thread>

#include <json.hpp>

#include "convtopic/error.hpp"
#include "convtopic/graphcut.hpp"
#include "convtopic/topicmodel.hpp"

namespace convtopic {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

std::string unquote(std::string_view v) {
  v = trim(v);
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return std::string(v.substr(1, v.size() - 2));
  return std::string(v);
}

int to_int(std::string_view key, std::string_view value) {
  int out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw ConfigError("'" + std::string(key) + "' needs an integer, got '" + std::string(value) + "'");
  return out;
}

std::uint64_t to_u64(std::string_view key, std::string_view value) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw ConfigError("'" + std::string(key) + "' needs a non-negative integer, got '" + std::string(value) + "'");
  return out;
}

double to_double(std::string_view key, std::string_view value) {
  const std::string s(value);
  try {
    std::size_t used = 0;
    const double d = std::stod(s, &used);
    if (used == s.size() && std::isfinite(d)) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError("'" + std::string(key) + "' needs a number, got '" + s + "'");
}

void require(bool ok, std::string_view key, std::string_view what) {
  if (!ok) throw ConfigError("'" + std::string(key) + "' must be " + std::string(what));
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

void apply_setting(PipelineConfig& c, std::string_view raw_key, std::string_view raw_value) {
  const std::string key(trim(raw_key));
  const std::string value = unquote(raw_value);
  if (key == "segmenter") {
    c.segmenter = value;
  } else if (key == "ranker") {
    c.ranker = value;
  } else if (key == "topics") {
    if (value.empty() || value == "auto") {
      c.topics.reset();
    } else {
      c.topics = to_int(key, value);
      require(*c.topics >= 1, key, "at least 1");
    }
  } else if (key == "lcseg_window") {
    c.lcseg_window = to_int(key, value);
    require(c.lcseg_window >= 1, key, "at least 1");
  } else if (key == "lcseg_hiatus") {
    c.lcseg_hiatus = to_int(key, value);
    require(c.lcseg_hiatus >= 1, key, "at least 1");
  } else if (key == "lcseg_smoothing") {
    c.lcseg_smoothing = to_int(key, value);
    require(c.lcseg_smoothing >= 1, key, "at least 1");
  } else if (key == "lda_iterations") {
    c.lda_iterations = to_int(key, value);
    require(c.lda_iterations >= 1, key, "at least 1");
  } else if (key == "lda_alpha") {
    c.lda_alpha = to_double(key, value);
  } else if (key == "lda_beta") {
    c.lda_beta = to_double(key, value);
    require(c.lda_beta > 0.0, key, "positive");
  } else if (key == "lda_lambda") {
    c.lda_lambda = to_double(key, value);
    require(c.lda_lambda >= 1.0, key, "at least 1");
  } else if (key == "lambda_bias") {
    c.lambda_bias = to_double(key, value);
    require(c.lambda_bias >= 0.0 && c.lambda_bias <= 1.0, key, "in [0, 1]");
  } else if (key == "delta") {
    c.delta = to_double(key, value);
    require(c.delta >= 0.0 && c.delta <= 1.0, key, "in [0, 1]");
  } else if (key == "window") {
    c.window = to_int(key, value);
    require(c.window >= 2, key, "at least 2");
  } else if (key == "phrase_fraction") {
    c.phrase_fraction = to_double(key, value);
    require(c.phrase_fraction > 0.0 && c.phrase_fraction <= 1.0, key, "in (0, 1]");
  } else if (key == "rho") {
    c.rho = to_double(key, value);
    require(c.rho >= 0.0 && c.rho <= 1.0, key, "in [0, 1]");
  } else if (key == "labels_k") {
    c.labels_k = to_int(key, value);
    require(c.labels_k >= 1, key, "at least 1");
  } else if (key == "teleport") {
    c.teleport = to_double(key, value);
    require(c.teleport >= 0.0 && c.teleport <= 1.0, key, "in [0, 1]");
  } else if (key == "leading_sentences") {
    c.leading_sentences = to_int(key, value);
    require(c.leading_sentences >= 0, key, "non-negative");
  } else if (key == "filter") {
    parse_filter(value);
    c.filter = value;
  } else if (key == "seed") {
    c.seed = to_u64(key, value);
  } else if (key == "workers") {
    c.workers = to_int(key, value);
    require(c.workers >= 1, key, "at least 1");
  } else if (key == "corpus") {
    c.corpus = value;
  } else if (key == "out") {
    c.out = value;
  } else if (key == "model") {
    c.model = value;
  } else if (key == "similarity_table") {
    c.similarity_table = value;
  } else {
    throw ConfigError("unknown configuration key '" + key + "'");
  }
}

PipelineConfig parse_config(std::string_view text, PipelineConfig base) {
  int line_no = 0;
  for (const auto& raw : split_lines(text)) {
    ++line_no;
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    apply_setting(base, line.substr(0, eq), line.substr(eq + 1));
  }
  return base;
}

PipelineConfig load_config(const std::string& path, PipelineConfig base) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return parse_config(text, std::move(base));
}

void apply_environment(PipelineConfig& config) {
  if (const char* seed = std::getenv("CONVTOPIC_SEED"); seed && *seed) apply_setting(config, "seed", seed);
}

std::string config_to_text(const PipelineConfig& c) {
  std::string out;
  auto kv = [&](std::string_view k, const std::string& v) {
    out += std::string(k) + " = " + v + "\n";
  };
  auto quoted = [](const std::string& s) { return "\"" + s + "\""; };
  kv("segmenter", quoted(c.segmenter));
  kv("ranker", quoted(c.ranker));
  kv("topics", c.topics ? std::to_string(*c.topics) : quoted("auto"));
  kv("lcseg_window", std::to_string(c.lcseg_window));
  kv("lcseg_hiatus", std::to_string(c.lcseg_hiatus));
  kv("lcseg_smoothing", std::to_string(c.lcseg_smoothing));
  kv("lda_iterations", std::to_string(c.lda_iterations));
  kv("lda_alpha", fmt(c.lda_alpha));
  kv("lda_beta", fmt(c.lda_beta));
  kv("lda_lambda", fmt(c.lda_lambda));
  kv("lambda_bias", fmt(c.lambda_bias));
  kv("delta", fmt(c.delta));
  kv("window", std::to_string(c.window));
  kv("phrase_fraction", fmt(c.phrase_fraction));
  kv("rho", fmt(c.rho));
  kv("labels_k", std::to_string(c.labels_k));
  kv("teleport", fmt(c.teleport));
  kv("leading_sentences", std::to_string(c.leading_sentences));
  kv("filter", quoted(c.filter));
  kv("seed", std::to_string(c.seed));
  kv("workers", std::to_string(c.workers));
  kv("corpus", quoted(c.corpus));
  kv("out", quoted(c.out));
  kv("model", quoted(c.model));
  kv("similarity_table", quoted(c.similarity_table));
  return out;
}

LcsegParams lcseg_params(const PipelineConfig& c) {
  LcsegParams p;
  p.window = c.lcseg_window;
  p.hiatus = c.lcseg_hiatus;
  p.smoothing = c.lcseg_smoothing;
  return p;
}

LdaOptions lda_options(const PipelineConfig& c, int K) {
  LdaOptions o;
  o.K = K;
  o.alpha = c.lda_alpha;
  o.beta = c.lda_beta;
  o.iterations = c.lda_iterations;
  o.seed = c.seed;
  return o;
}

SyntacticFilter parse_filter(std::string_view name) {
  const std::string n = to_lower(name);
  if (n == "nouns") return SyntacticFilter::Nouns;
  if (n == "nouns-adjectives") return SyntacticFilter::NounsAdjectives;
  if (n == "nouns-adjectives-verbs") return SyntacticFilter::NounsAdjectivesVerbs;
  if (n == "content-words") return SyntacticFilter::ContentWords;
  if (n == "all-words") return SyntacticFilter::AllWords;
  throw ConfigError("unknown syntactic filter '" + std::string(name) + "'");
}

std::string_view filter_name(SyntacticFilter f) {
  switch (f) {
    case SyntacticFilter::Nouns: return "nouns";
    case SyntacticFilter::NounsAdjectives: return "nouns-adjectives";
    case SyntacticFilter::NounsAdjectivesVerbs: return "nouns-adjectives-verbs";
    case SyntacticFilter::ContentWords: return "content-words";
    case SyntacticFilter::AllWords: return "all-words";
  }
  return "nouns-adjectives";
}

LabelOptions label_options(const PipelineConfig& c) {
  LabelOptions o;
  try {
    o.ranker = parse_ranker(c.ranker);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  o.filter = parse_filter(c.filter);
  o.lambda_bias = c.lambda_bias;
  o.delta = c.delta;
  o.window = c.window;
  o.teleport = c.teleport;
  o.phrase_fraction = c.phrase_fraction;
  o.rho = c.rho;
  o.labels_k = c.labels_k;
  o.leading_sentences = c.leading_sentences;
  return o;
}

std::vector<CorpusEntry> load_corpus(const std::string& dir, const TextProcessor& text) {
  if (!fs::is_directory(dir)) throw ConfigError("corpus directory not found: " + dir);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (e.is_regular_file() && name.size() > 10 && name.ends_with(".conv.json")) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<CorpusEntry> out;
  for (const auto& f : files) {
    CorpusEntry entry;
    const std::string name = f.filename().string();
    entry.id = name.substr(0, name.size() - 10);
    entry.path = f.string();
    entry.conversation = load_conversation(entry.path, text);
    const fs::path gold = f.parent_path() / (entry.id + ".gold.json");
    if (fs::exists(gold)) {
      entry.gold = load_gold(gold.string());
      for (const auto& a : entry.gold->annotators)
        if (a.segmentation.size() != entry.conversation.size())
          throw StructuralError("gold file " + gold.string() + ": annotator '" + a.annotator + "' covers " +
                                std::to_string(a.segmentation.size()) + " sentences, conversation has " +
                                std::to_string(entry.conversation.size()));
    }
    out.push_back(std::move(entry));
  }
  return out;
}

int topic_count_policy(const std::vector<int>& counts, std::optional<int> override_count) {
  if (override_count) {
    if (*override_count < 1) throw InvalidArgument("topic count must be at least 1");
    return *override_count;
  }
  if (counts.empty()) throw ConfigError("no topic count: give --topics or a gold annotation");
  std::map<int, int> freq;
  for (int c : counts) ++freq[c];
  for (const auto& [count, n] : freq)
    if (2 * n > static_cast<int>(counts.size())) return count;
  long sum = 0;
  for (int c : counts) sum += c;
  return std::max(1, static_cast<int>(sum / static_cast<long>(counts.size())));
}

int topic_count_policy(const GoldStandard* gold, std::optional<int> override_count) {
  std::vector<int> counts;
  if (gold)
    for (const auto& a : gold->annotators) counts.push_back(a.segmentation.k_effective());
  return topic_count_policy(counts, override_count);
}

namespace {

std::optional<int> blocks_size(std::string_view name) {
  if (!name.starts_with("blocks-")) return std::nullopt;
  const auto digits = name.substr(7);
  int k = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
  if (ec != std::errc() || ptr != digits.data() + digits.size() || k < 1) return std::nullopt;
  return k;
}

}  // namespace

bool is_baseline(std::string_view name) {
  return name == "all-different" || name == "all-same" || name == "speaker" || name == "blocks" ||
         blocks_size(name).has_value();
}

Segmentation run_baseline(std::string_view name, const Conversation& conv, std::optional<int> k) {
  const std::size_t n = conv.size();
  std::vector<int> labels(n, 0);
  if (name == "all-different") {
    for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i);
  } else if (name == "all-same") {
  } else if (name == "speaker") {
    // Anonymous comments each count as their own speaker.
    std::map<std::string, int> ids;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& s = conv.sentences[i];
      const auto& author = conv.comments[static_cast<std::size_t>(s.comment_index)].author;
      const std::string key = trim(author).empty() ? "\x01" + std::to_string(s.comment_index) : author;
      auto it = ids.try_emplace(key, static_cast<int>(ids.size())).first;
      labels[i] = it->second;
    }
  } else if (auto b = name == "blocks" ? k : blocks_size(name)) {
    if (*b < 1) throw InvalidArgument("block size must be at least 1");
    for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i) / *b;
  } else {
    throw InvalidArgument("unknown baseline '" + std::string(name) + "'");
  }
  return Segmentation::from_labels(labels);
}

namespace {

const std::set<std::string, std::less<>>& model_segmenters() {
  static const std::set<std::string, std::less<>> names = {"lcseg", "lcseg-fqg", "lda",       "lda-fqg",
                                                           "mb",    "mb-tfidf",  "supervised"};
  return names;
}

bool known_segmenter(std::string_view name) { return model_segmenters().count(name) > 0 || is_baseline(name); }

}  // namespace

Segmentation run_segmenter(const PipelineConfig& config, const Conversation& conv, const FragmentQuotationGraph& fqg,
                           int K, const ClassifierModel* model) {
  const std::string& name = config.segmenter;
  if (is_baseline(name)) return run_baseline(name, conv, K);
  if (name == "lcseg") return lcseg_segment(conv, K, lcseg_params(config));
  if (name == "lcseg-fqg") return lcseg_fqg_segment(conv, fqg, K, lcseg_params(config));
  if (name == "lda") return assign_sentence_topics(fit_lda(conv, lda_options(config, K)), conv);
  if (name == "lda-fqg") return assign_sentence_topics(fit_lda_fqg(conv, fqg, lda_options(config, K), config.lda_lambda), conv);
  if (name == "mb") return mb_segment(conv, K, TermWeighting::Tf);
  if (name == "mb-tfidf") return mb_segment(conv, K, TermWeighting::TfIdf);
  if (name == "supervised") {
    if (!model) throw ConfigError("the supervised segmenter needs a model file");
    PairContextOptions o;
    o.K = K;
    o.lda = lda_options(config, K);
    o.lambda_reg = config.lda_lambda;
    o.lcseg = lcseg_params(config);
    const PairContext ctx = build_pair_context(conv, o);
    return supervised_segment(ctx, *model, K);
  }
  throw ConfigError("unknown segmenter '" + name + "'");
}

std::string segmentation_to_json(const std::string& conversation_id, const Segmentation& seg, std::string_view segmenter) {
  ojson j;
  j["conversation_id"] = conversation_id;
  j["segmenter"] = segmenter;
  j["K"] = seg.K;
  j["assignment"] = seg.topic_of;
  return j.dump(2) + "\n";
}

Segmentation segmentation_from_json(std::string_view document) {
  try {
    const auto j = nlohmann::json::parse(document);
    Segmentation seg;
    seg.topic_of = j.at("assignment").get<std::vector<int>>();
    seg.K = j.contains("K") ? j.at("K").get<int>() : 0;
    for (int t : seg.topic_of) {
      if (t < 0) throw ParseError("segmentation: negative topic id");
      seg.K = std::max(seg.K, t + 1);
    }
    return seg;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("segmentation: ") + e.what());
  }
}

LabeledTopics labels_from_json(std::string_view document) {
  try {
    const auto j = nlohmann::json::parse(document);
    if (!j.is_object()) throw ParseError("labels: expected an object");
    std::map<int, std::vector<Label>> byid;
    int top = -1;
    for (const auto& [key, list] : j.items()) {
      int id = 0;
      auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), id);
      if (ec != std::errc() || ptr != key.data() + key.size() || id < 0)
        throw ParseError("labels: bad topic id '" + key + "'");
      auto& out = byid[id];
      for (const auto& l : list) out.push_back({l.at("label").get<std::string>(), l.at("score").get<double>()});
      top = std::max(top, id);
    }
    LabeledTopics out(static_cast<std::size_t>(top + 1));
    for (auto& [id, labels] : byid) out[static_cast<std::size_t>(id)] = std::move(labels);
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("labels: ") + e.what());
  }
}

ConversationScores score_against_gold(const Conversation& conv, const GoldStandard& gold, const Segmentation& seg,
                                      const LabeledTopics* labels, const SimilarityProvider& sim,
                                      const TextProcessor& text) {
  if (seg.size() != conv.size()) throw InvalidArgument("segmentation does not cover the conversation");
  const auto excluded = excluded_sentences(gold);
  const Segmentation sys = without(seg, excluded);
  std::vector<std::vector<ScoredPhrase>> sys_labels;
  if (labels)
    for (const auto& topic : *labels) {
      std::vector<ScoredPhrase> list;
      for (const auto& l : topic) list.push_back({l.text, l.score});
      sys_labels.push_back(std::move(list));
    }
  ConversationScores s;
  for (const auto& a : gold.annotators) {
    const Segmentation ref = without(a.segmentation, excluded);
    s.one_to_one.push_back(one_to_one(ref, sys));
    s.loc3.push_back(loc_k(ref, sys, 3));
    if (labels) {
      std::vector<std::string> ref_labels = a.labels;
      for (auto& l : ref_labels)
        if (is_excluded_label(l)) l.clear();
      const auto at1 = end_to_end_label_agreement(ref, ref_labels, sys, sys_labels, 1, sim, text);
      const auto at5 = end_to_end_label_agreement(ref, ref_labels, sys, sys_labels, 5, sim, text);
      s.wmo1.push_back(at1.wmo);
      s.wsmo1.push_back(at1.wsmo);
      s.wmo5.push_back(at5.wmo);
      s.wsmo5.push_back(at5.wsmo);
    }
  }
  return s;
}

std::size_t PipelineResult::failures() const {
  return static_cast<std::size_t>(
      std::count_if(conversations.begin(), conversations.end(), [](const auto& c) { return !c.ok; }));
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  const auto width = static_cast<std::size_t>(std::max(1, workers));
  if (width == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < std::min(width, n); ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  for (auto& th : pool) th.join();
}

TrainingSet build_training_set(const std::vector<const CorpusEntry*>& entries, const PipelineConfig& config) {
  std::vector<Eigen::MatrixXd> blocks(entries.size());
  std::vector<Eigen::VectorXd> labels(entries.size());
  std::vector<std::string> errors(entries.size());
  parallel_for(entries.size(), config.workers, [&](std::size_t i) {
    const CorpusEntry& e = *entries[i];
    try {
      if (!e.gold) throw ConfigError("conversation '" + e.id + "' has no gold annotation");
      const int K = topic_count_policy(&*e.gold, config.topics);
      PairContextOptions o;
      o.K = K;
      o.lda = lda_options(config, K);
      o.lambda_reg = config.lda_lambda;
      o.lcseg = lcseg_params(config);
      const PairContext ctx = build_pair_context(e.conversation, o);
      blocks[i] = extract_all_pair_features(ctx);
      const auto pairs = pair_expansion(*e.gold);
      labels[i].resize(static_cast<Eigen::Index>(pairs.size()));
      for (std::size_t p = 0; p < pairs.size(); ++p) labels[i](static_cast<Eigen::Index>(p)) = pairs[p].same ? 1.0 : 0.0;
    } catch (const std::exception& ex) {
      errors[i] = e.id + ": " + ex.what();
    }
  });
  for (const auto& err : errors)
    if (!err.empty()) throw Error("training data: " + err);
  TrainingSet set;
  Eigen::Index rows = 0;
  for (const auto& b : blocks) rows += b.rows();
  set.X.resize(rows, kFeatureCount);
  set.y.resize(rows);
  Eigen::Index at = 0;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    set.X.middleRows(at, blocks[i].rows()) = blocks[i];
    set.y.segment(at, blocks[i].rows()) = labels[i];
    at += blocks[i].rows();
  }
  return set;
}

ClassifierModel train_model(const std::vector<const CorpusEntry*>& entries, const PipelineConfig& config) {
  const TrainingSet set = build_training_set(entries, config);
  if (set.X.rows() < 2) throw InvalidArgument("not enough training pairs");
  const int folds = static_cast<int>(std::min<Eigen::Index>(10, set.X.rows()));
  const double l2 = select_l2(set.X, set.y, {0.01, 0.1, 1, 10}, folds, config.seed);
  return train_classifier(set.X, set.y, l2);
}

PipelineResult run_pipeline(const PipelineConfig& config, const std::vector<CorpusEntry>& corpus) {
  if (!known_segmenter(config.segmenter)) throw ConfigError("unknown segmenter '" + config.segmenter + "'");
  const LabelOptions labeling = label_options(config);
  std::optional<ClassifierModel> model;
  if (config.segmenter == "supervised") {
    if (config.model.empty()) throw ConfigError("the supervised segmenter needs a model file (model = PATH)");
    if (!fs::exists(config.model)) throw ConfigError("model file not found: " + config.model);
    try {
      model = classifier_from_json(read_file(config.model));
    } catch (const Error& e) {
      throw ConfigError("model file " + config.model + ": " + e.what());
    }
  }
  if (!config.topics)
    for (const auto& e : corpus)
      if (!e.gold) throw ConfigError("conversation '" + e.id + "' has no gold annotation; set topics");
  SimilarityProvider sim;
  if (!config.similarity_table.empty()) {
    try {
      sim = load_similarity_table(config.similarity_table);
    } catch (const Error& e) {
      throw ConfigError("similarity table: " + std::string(e.what()));
    }
  }

  PipelineResult result;
  result.conversations.resize(corpus.size());
  parallel_for(corpus.size(), config.workers, [&](std::size_t i) {
    const CorpusEntry& e = corpus[i];
    ConversationResult& r = result.conversations[i];
    r.id = e.id;
    try {
      r.K = topic_count_policy(e.gold ? &*e.gold : nullptr, config.topics);
      const FragmentQuotationGraph fqg = build_fqg(e.conversation);
      r.segmentation = run_segmenter(config, e.conversation, fqg, r.K, model ? &*model : nullptr);
      r.labels = label_topics(e.conversation, r.segmentation, fqg, labeling);
      if (e.gold) r.scores = score_against_gold(e.conversation, *e.gold, r.segmentation, &r.labels, sim);
      r.ok = true;
    } catch (const std::exception& ex) {
      r.ok = false;
      r.error = ex.what();
    }
  });
  return result;
}

namespace {

struct Column {
  std::string name;
  std::function<const std::vector<double>*(const ConversationScores&)> values;
};

const std::vector<Column>& score_columns() {
  static const std::vector<Column> cols = {
      {"one_to_one", [](const ConversationScores& s) { return &s.one_to_one; }},
      {"loc3", [](const ConversationScores& s) { return &s.loc3; }},
      {"wmo_k1", [](const ConversationScores& s) { return &s.wmo1; }},
      {"wmo_k5", [](const ConversationScores& s) { return &s.wmo5; }},
      {"wsmo_k1", [](const ConversationScores& s) { return &s.wsmo1; }},
      {"wsmo_k5", [](const ConversationScores& s) { return &s.wsmo5; }},
  };
  return cols;
}

std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  return s;
}

}  // namespace

std::string report_tsv(const PipelineResult& result) {
  std::string out = "conversation\tstatus\tK\ttopics\tentropy";
  for (const auto& c : score_columns()) out += "\t" + c.name;
  out += "\tmessage\n";
  std::map<std::string, std::vector<double>> corpus_values;
  for (const auto& r : result.conversations) {
    out += r.id + "\t" + (r.ok ? "ok" : "error") + "\t" + std::to_string(r.K);
    if (!r.ok) {
      out += "\t-\t-";
      for (std::size_t i = 0; i < score_columns().size(); ++i) out += "\t-";
      out += "\t" + sanitize(r.error) + "\n";
      continue;
    }
    const double h = entropy(r.segmentation);
    out += "\t" + std::to_string(r.segmentation.k_effective()) + "\t" + fixed4(h);
    corpus_values["entropy"].push_back(h);
    for (const auto& c : score_columns()) {
      if (!r.scores || c.values(*r.scores)->empty()) {
        out += "\t-";
        continue;
      }
      const double mean = summarize(*c.values(*r.scores)).mean;
      corpus_values[c.name].push_back(mean);
      out += "\t" + fixed4(mean);
    }
    out += "\t\n";
  }
  for (const char* stat : {"mean", "max", "min"}) {
    out += std::string("CORPUS_") + stat + "\t-\t-\t-";
    std::vector<std::string> names = {"entropy"};
    for (const auto& c : score_columns()) names.push_back(c.name);
    for (const auto& name : names) {
      const auto it = corpus_values.find(name);
      if (it == corpus_values.end() || it->second.empty()) {
        out += "\t-";
        continue;
      }
      const Summary s = summarize(it->second);
      const std::string_view st = stat;
      out += "\t" + fixed4(st == "mean" ? s.mean : st == "max" ? s.max : s.min);
    }
    out += "\t\n";
  }
  return out;
}

std::string report_json(const PipelineResult& result) {
  auto stats = [](const std::vector<double>& v) {
    const Summary s = summarize(v);
    return ojson{{"mean", s.mean}, {"max", s.max}, {"min", s.min}, {"count", s.count}};
  };
  ojson j;
  j["conversations"] = ojson::array();
  std::map<std::string, std::vector<double>> corpus_values;
  for (const auto& r : result.conversations) {
    ojson c;
    c["id"] = r.id;
    c["status"] = r.ok ? "ok" : "error";
    if (!r.ok) {
      c["error"] = r.error;
      j["conversations"].push_back(c);
      continue;
    }
    c["K"] = r.K;
    c["topics"] = r.segmentation.k_effective();
    c["entropy"] = entropy(r.segmentation);
    corpus_values["entropy"].push_back(entropy(r.segmentation));
    if (r.scores) {
      ojson m = ojson::object();
      for (const auto& col : score_columns()) {
        const auto* v = col.values(*r.scores);
        if (v->empty()) continue;
        m[col.name] = stats(*v);
        corpus_values[col.name].push_back(summarize(*v).mean);
      }
      c["metrics"] = m;
    }
    j["conversations"].push_back(c);
  }
  ojson corpus = ojson::object();
  std::vector<std::string> names = {"entropy"};
  for (const auto& c : score_columns()) names.push_back(c.name);
  for (const auto& name : names)
    if (auto it = corpus_values.find(name); it != corpus_values.end()) corpus[name] = stats(it->second);
  j["corpus"] = corpus;
  j["failures"] = result.failures();
  return j.dump(2) + "\n";
}

void write_pipeline_outputs(const PipelineConfig& config, const PipelineResult& result) {
  if (config.out.empty()) throw ConfigError("no output directory (out = DIR)");
  fs::create_directories(config.out);
  const fs::path dir(config.out);
  for (const auto& r : result.conversations) {
    if (!r.ok) continue;
    write_file((dir / (r.id + ".seg.json")).string(), segmentation_to_json(r.id, r.segmentation, config.segmenter));
    write_file((dir / (r.id + ".labels.json")).string(), labels_to_json(r.labels));
  }
  write_file((dir / "report.tsv").string(), report_tsv(result));
  write_file((dir / "report.json").string(), report_json(result));
  write_file((dir / "effective.conf").string(), config_to_text(config));
}

std::string annotation_report_tsv(const std::vector<CorpusEntry>& corpus) {
  const std::vector<std::string> baselines = {"all-different", "all-same", "speaker", "blocks-5", "blocks-10"};
  std::string out = "conversation\tcomments\tsentences\tannotators\ttopics_mean\tentropy_mean\t"
                    "human_one_to_one\thuman_loc3\thuman_many_to_one";
  for (const auto& b : baselines) out += "\t" + b + "_one_to_one\t" + b + "_loc3";
  out += "\n";
  for (const auto& e : corpus) {
    out += e.id + "\t" + std::to_string(e.conversation.comments.size()) + "\t" +
           std::to_string(e.conversation.size());
    if (!e.gold || e.gold->annotators.empty()) {
      out += "\t0";
      for (std::size_t i = 0; i < 5 + 2 * baselines.size(); ++i) out += "\t-";
      out += "\n";
      continue;
    }
    const auto excluded = excluded_sentences(*e.gold);
    std::vector<Segmentation> refs;
    std::vector<double> topics, h, o2o, loc, m2o;
    for (const auto& a : e.gold->annotators) {
      refs.push_back(without(a.segmentation, excluded));
      topics.push_back(a.segmentation.k_effective());
      if (refs.back().size() > 0) h.push_back(entropy(refs.back()));
    }
    for (std::size_t i = 0; i < refs.size(); ++i)
      for (std::size_t j = 0; j < refs.size(); ++j) {
        if (i == j) continue;
        m2o.push_back(many_to_one(refs[i], refs[j]));
        if (i < j) {
          o2o.push_back(one_to_one(refs[i], refs[j]));
          loc.push_back(loc_k(refs[i], refs[j], 3));
        }
      }
    auto cell = [&](const std::vector<double>& v) { return v.empty() ? std::string("-") : fixed4(summarize(v).mean); };
    out += "\t" + std::to_string(refs.size()) + "\t" + cell(topics) + "\t" + cell(h) + "\t" + cell(o2o) + "\t" +
           cell(loc) + "\t" + cell(m2o);
    for (const auto& b : baselines) {
      const Segmentation sys = without(run_baseline(b, e.conversation), excluded);
      std::vector<double> bo, bl;
      for (const auto& r : refs) {
        bo.push_back(one_to_one(r, sys));
        bl.push_back(loc_k(r, sys, 3));
      }
      out += "\t" + cell(bo) + "\t" + cell(bl);
    }
    out += "\n";
  }
  return out;
}

}  // namespace convtopic
