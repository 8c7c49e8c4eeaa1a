#ifndef CONVTOPIC_PIPELINE_HPP
#define CONVTOPIC_PIPELINE_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "convtopic/annotations.hpp"
#include "convtopic/corpus.hpp"
#include "convtopic/fqg.hpp"
#include "convtopic/labeler.hpp"
#include "convtopic/lexchain.hpp"
#include "convtopic/metrics.hpp"
#include "convtopic/segmentation.hpp"
#include "convtopic/supervised.hpp"

namespace convtopic {

struct PipelineConfig {
  /// lcseg, lcseg-fqg, lda, lda-fqg, mb, mb-tfidf, supervised, or a
  /// baseline (all-different, all-same, speaker, blocks-<k>).
  std::string segmenter = "lcseg-fqg";
  std::string ranker = "corbias+";
  /// Fixed topic count; otherwise taken from the gold annotations.
  std::optional<int> topics;

  int lcseg_window = 2;
  int lcseg_hiatus = 11;
  int lcseg_smoothing = 3;

  int lda_iterations = 2000;
  /// Non-positive means 50 / K.
  double lda_alpha = 0.0;
  double lda_beta = 0.01;
  double lda_lambda = 20.0;

  double lambda_bias = 0.85;
  double delta = 0.4;
  int window = 2;
  double phrase_fraction = 0.25;
  double rho = 0.35;
  int labels_k = 5;
  double teleport = 0.85;
  int leading_sentences = 2;
  std::string filter = "nouns-adjectives";

  std::uint64_t seed = 1;
  int workers = 1;

  std::string corpus;
  std::string out;
  std::string model;
  std::string similarity_table;
};

/// Sets one key from its text form. Throws ConfigError on an unknown key or
/// a bad value.
void apply_setting(PipelineConfig& config, std::string_view key, std::string_view value);

/// `key = value` lines; `#` starts a comment; values may be double-quoted.
PipelineConfig parse_config(std::string_view text, PipelineConfig base = {});
PipelineConfig load_config(const std::string& path, PipelineConfig base = {});
/// CONVTOPIC_SEED replaces the seed when set.
void apply_environment(PipelineConfig& config);
/// Every key with its effective value; parse_config reads it back.
std::string config_to_text(const PipelineConfig& config);

LcsegParams lcseg_params(const PipelineConfig& config);
LdaOptions lda_options(const PipelineConfig& config, int K);
LabelOptions label_options(const PipelineConfig& config);
SyntacticFilter parse_filter(std::string_view name);
std::string_view filter_name(SyntacticFilter filter);

struct CorpusEntry {
  std::string id;
  std::string path;
  Conversation conversation;
  std::optional<GoldStandard> gold;
};

/// `<id>.conv.json` files of a directory in name order, each with its
/// `<id>.gold.json` when present.
std::vector<CorpusEntry> load_corpus(const std::string& dir, const TextProcessor& text = TextProcessor());

/// Majority annotator topic count, else floor of the mean. The override
/// wins when given.
int topic_count_policy(const std::vector<int>& annotator_counts, std::optional<int> override_count = std::nullopt);
int topic_count_policy(const GoldStandard* gold, std::optional<int> override_count = std::nullopt);

bool is_baseline(std::string_view name);
Segmentation run_baseline(std::string_view name, const Conversation& conversation, std::optional<int> k = std::nullopt);

/// Runs a named segmenter. `model` is required for the supervised one.
Segmentation run_segmenter(const PipelineConfig& config, const Conversation& conversation,
                           const FragmentQuotationGraph& fqg, int K, const ClassifierModel* model = nullptr);

std::string segmentation_to_json(const std::string& conversation_id, const Segmentation& seg, std::string_view segmenter);
Segmentation segmentation_from_json(std::string_view document);
LabeledTopics labels_from_json(std::string_view document);

/// Scores of one system output against every annotator of a gold file.
struct ConversationScores {
  std::vector<double> one_to_one;
  std::vector<double> loc3;
  std::vector<double> wmo1, wmo5, wsmo1, wsmo5;
};

ConversationScores score_against_gold(const Conversation& conversation, const GoldStandard& gold,
                                      const Segmentation& seg, const LabeledTopics* labels,
                                      const SimilarityProvider& sim = {}, const TextProcessor& text = TextProcessor());

struct ConversationResult {
  std::string id;
  bool ok = false;
  std::string error;
  int K = 0;
  Segmentation segmentation;
  LabeledTopics labels;
  std::optional<ConversationScores> scores;
};

struct PipelineResult {
  std::vector<ConversationResult> conversations;
  std::size_t failures() const;
};

/// Training data of one corpus: feature rows of every gold pair.
struct TrainingSet {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
};

TrainingSet build_training_set(const std::vector<const CorpusEntry*>& entries, const PipelineConfig& config);
ClassifierModel train_model(const std::vector<const CorpusEntry*>& entries, const PipelineConfig& config);

/// Segments, labels and (with gold) scores every conversation. Throws
/// ConfigError before doing any work if the configuration is unusable.
PipelineResult run_pipeline(const PipelineConfig& config, const std::vector<CorpusEntry>& corpus);

/// Per-conversation rows plus corpus mean/max/min.
std::string report_tsv(const PipelineResult& result);
std::string report_json(const PipelineResult& result);

/// Writes segmentations, labels, report.tsv, report.json and
/// effective.conf under config.out.
void write_pipeline_outputs(const PipelineConfig& config, const PipelineResult& result);

/// Corpus statistics and inter-annotator agreement, plus the baselines
/// scored against the gold annotations.
std::string annotation_report_tsv(const std::vector<CorpusEntry>& corpus);

/// Runs `fn(i)` for i in [0, n) on up to `workers` threads.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace convtopic

#endif  // CONVTOPIC_PIPELINE_HPP
