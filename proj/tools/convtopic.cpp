#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "convtopic/annotations.hpp"
#include "convtopic/corpus.hpp"
#include "convtopic/error.hpp"
#include "convtopic/fqg.hpp"
#include "convtopic/labeler.hpp"
#include "convtopic/metrics.hpp"
#include "convtopic/pipeline.hpp"
#include "convtopic/supervised.hpp"

namespace fs = std::filesystem;
using namespace convtopic;

namespace {

using Settings = std::vector<std::pair<std::string, std::string>>;

struct Common {
  std::string config_file;
  Settings settings;
};

// Flags that map straight onto config keys. Applied after the config file
// and the environment.
void add_config_flags(CLI::App* app, Common& c, bool labeling, bool segmenting) {
  app->add_option("--config", c.config_file, "key = value configuration file");
  app->add_option_function<std::vector<std::string>>(
      "--set",
      [&c](const std::vector<std::string>& items) {
        for (const auto& kv : items) {
          const auto eq = kv.find('=');
          if (eq == std::string::npos) throw CLI::ValidationError("--set", "expected key=value, got '" + kv + "'");
          c.settings.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
        }
      },
      "override a configuration key (key=value)");
  auto flag = [&](const std::string& name, const std::string& key, const std::string& help) {
    app->add_option_function<std::string>(name, [&c, key](const std::string& v) { c.settings.emplace_back(key, v); },
                                          help);
  };
  flag("--seed", "seed", "random seed");
  flag("--workers", "workers", "worker threads");
  if (segmenting) {
    flag("--segmenter", "segmenter", "lcseg|lcseg-fqg|lda|lda-fqg|mb|mb-tfidf|supervised|all-same|all-different|speaker|blocks-K");
    flag("--topics", "topics", "number of topics (overrides the gold count)");
    flag("--lcseg-window", "lcseg_window", "LCSeg analysis window");
    flag("--lcseg-hiatus", "lcseg_hiatus", "LCSeg chain hiatus");
    flag("--lda-iters", "lda_iterations", "Gibbs sweeps");
    flag("--lda-seed", "seed", "Gibbs sampler seed");
    flag("--lda-lambda", "lda_lambda", "must-link strength of the word network prior");
    flag("--model", "model", "classifier model for the supervised segmenter");
  }
  if (labeling) {
    flag("--ranker", "ranker", "freq|lead|mt|bias|bias+|corgen|corgen+|corbias|corbias+");
    flag("--labels-k", "labels_k", "labels per topic");
    flag("--filter", "filter", "nouns|nouns-adjectives|nouns-adjectives-verbs|content-words|all-words");
  }
}

PipelineConfig make_config(const Common& c) {
  PipelineConfig config;
  if (!c.config_file.empty()) config = load_config(c.config_file);
  apply_environment(config);
  for (const auto& [k, v] : c.settings) apply_setting(config, k, v);
  return config;
}

void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-")
    std::cout << content;
  else
    write_file(path, content);
}

std::vector<const CorpusEntry*> gold_entries(const std::vector<CorpusEntry>& corpus) {
  std::vector<const CorpusEntry*> out;
  for (const auto& e : corpus)
    if (e.gold) out.push_back(&e);
  return out;
}

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Topic segmentation and labeling of asynchronous conversations"};
  app.require_subcommand(1);

  // parse
  std::string parse_input, parse_out;
  bool parse_record = false;
  auto* parse = app.add_subcommand("parse", "Parse a conversation and print its normalized form");
  parse->add_option("--input,input", parse_input, "conversation JSON")->required();
  parse->add_option("--out", parse_out, "output file (default stdout)");
  parse->add_flag("--record", parse_record, "print the input record format instead");

  // fqg dump
  std::string fqg_input, fqg_out;
  bool fqg_dot = false;
  auto* fqg = app.add_subcommand("fqg", "Fragment quotation graph tools");
  fqg->require_subcommand(1);
  auto* fqg_dump = fqg->add_subcommand("dump", "Print the fragment quotation graph");
  fqg_dump->add_option("--input,input", fqg_input, "conversation JSON")->required();
  fqg_dump->add_option("--out", fqg_out, "output file (default stdout)");
  fqg_dump->add_flag("--dot", fqg_dot, "Graphviz DOT instead of JSON");

  // segment
  Common seg_common;
  std::string seg_input, seg_gold, seg_out, seg_lda;
  auto* segment = app.add_subcommand("segment", "Segment one conversation");
  segment->add_option("--input,input", seg_input, "conversation JSON")->required();
  segment->add_option("--gold", seg_gold, "gold annotation (for the topic count)");
  segment->add_option("--out", seg_out, "output file (default stdout)");
  segment->add_option("--lda-out", seg_lda, "also write the fitted topic model (lda and lda-fqg only)");
  add_config_flags(segment, seg_common, false, true);

  // label
  Common label_common;
  std::string label_input, label_seg, label_out;
  auto* label = app.add_subcommand("label", "Label the topics of a segmented conversation");
  label->add_option("--input,input", label_input, "conversation JSON")->required();
  label->add_option("--segmentation", label_seg, "segmentation JSON")->required();
  label->add_option("--out", label_out, "output file (default stdout)");
  add_config_flags(label, label_common, true, false);

  // train
  Common train_common;
  std::string train_corpus, train_out, train_importance;
  bool train_loo = false;
  int train_subset = 0;
  auto* train = app.add_subcommand("train", "Train the pairwise same-topic classifier");
  train->add_option("--corpus", train_corpus, "corpus directory")->required();
  train->add_option("--out", train_out, "model JSON");
  train->add_option("--importance", train_importance, "feature importance TSV");
  train->add_option("--train-subset", train_subset, "use only the first N annotated conversations");
  train->add_flag("--loo", train_loo, "leave-one-out: train on the rest, score each conversation");
  add_config_flags(train, train_common, false, true);

  // evaluate
  Common eval_common;
  std::string eval_corpus, eval_system, eval_sim, eval_out;
  auto* evaluate = app.add_subcommand("evaluate", "Score system outputs against the gold annotations");
  evaluate->add_option("--corpus", eval_corpus, "corpus directory")->required();
  evaluate->add_option("--system", eval_system, "directory with <id>.seg.json and <id>.labels.json")->required();
  evaluate->add_option("--similarity", eval_sim, "noun similarity TSV");
  evaluate->add_option("--out", eval_out, "report TSV (default stdout)");

  // pipeline
  Common pipe_common;
  std::string pipe_corpus, pipe_out, pipe_sim;
  auto* pipeline = app.add_subcommand("pipeline", "Segment, label and evaluate a corpus");
  pipeline->add_option_function<std::string>("--corpus", [&](const std::string& v) { pipe_common.settings.emplace_back("corpus", v); },
                                             "corpus directory");
  pipeline->add_option_function<std::string>("--out", [&](const std::string& v) { pipe_common.settings.emplace_back("out", v); },
                                             "output directory");
  pipeline->add_option_function<std::string>(
      "--similarity", [&](const std::string& v) { pipe_common.settings.emplace_back("similarity_table", v); },
      "noun similarity TSV");
  add_config_flags(pipeline, pipe_common, true, true);

  // report
  std::string report_corpus, report_out;
  auto* report = app.add_subcommand("report", "Annotation statistics, agreement and baseline scores");
  report->add_option("--corpus", report_corpus, "corpus directory")->required();
  report->add_option("--out", report_out, "report TSV (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*parse) {
      const Conversation conv = load_conversation(parse_input);
      emit(parse_out, parse_record ? conversation_to_record(conv) : conversation_to_normalized_json(conv));
    } else if (*fqg_dump) {
      const Conversation conv = load_conversation(fqg_input);
      const FragmentQuotationGraph g = build_fqg(conv);
      if (fqg_dot) {
        emit(fqg_out, g.to_dot());
      } else {
        nlohmann::ordered_json j;
        j["conversation_id"] = conv.id;
        j["fragments"] = nlohmann::ordered_json::array();
        for (const auto& f : g.nodes())
          j["fragments"].push_back({{"id", f.id}, {"sentence_ids", f.sentence_ids}, {"text", f.text}});
        j["edges"] = nlohmann::ordered_json::array();
        for (const auto& [a, b] : g.edges()) j["edges"].push_back({a, b});
        j["paths"] = extract_paths(g);
        emit(fqg_out, j.dump(2) + "\n");
      }
    } else if (*segment) {
      const PipelineConfig config = make_config(seg_common);
      const Conversation conv = load_conversation(seg_input);
      std::optional<GoldStandard> gold;
      if (!seg_gold.empty()) gold = load_gold(seg_gold);
      std::optional<ClassifierModel> model;
      if (config.segmenter == "supervised") {
        if (config.model.empty() || !fs::exists(config.model))
          throw ConfigError("the supervised segmenter needs an existing --model file");
        model = classifier_from_json(read_file(config.model));
      }
      const int K = topic_count_policy(gold ? &*gold : nullptr, config.topics);
      const FragmentQuotationGraph fqg = build_fqg(conv);
      const Segmentation seg = run_segmenter(config, conv, fqg, K, model ? &*model : nullptr);
      emit(seg_out, segmentation_to_json(conv.id, seg, config.segmenter));
      if (!seg_lda.empty()) {
        if (config.segmenter == "lda")
          emit(seg_lda, lda_to_json(fit_lda(conv, lda_options(config, K))));
        else if (config.segmenter == "lda-fqg")
          emit(seg_lda, lda_to_json(fit_lda_fqg(conv, fqg, lda_options(config, K), config.lda_lambda)));
        else
          throw ConfigError("--lda-out needs the lda or lda-fqg segmenter");
      }
    } else if (*label) {
      const PipelineConfig config = make_config(label_common);
      const Conversation conv = load_conversation(label_input);
      const Segmentation seg = segmentation_from_json(read_file(label_seg));
      emit(label_out, labels_to_json(label_topics(conv, seg, build_fqg(conv), label_options(config))));
    } else if (*train) {
      const PipelineConfig config = make_config(train_common);
      const auto corpus = load_corpus(train_corpus);
      auto entries = gold_entries(corpus);
      if (train_subset > 0 && static_cast<std::size_t>(train_subset) < entries.size()) entries.resize(train_subset);
      if (entries.empty()) throw ConfigError("no annotated conversations in " + train_corpus);
      if (train_loo) {
        std::string out = "conversation\tone_to_one\tloc3\n";
        for (std::size_t i = 0; i < entries.size(); ++i) {
          std::vector<const CorpusEntry*> rest;
          for (std::size_t j = 0; j < entries.size(); ++j)
            if (j != i) rest.push_back(entries[j]);
          if (rest.empty()) throw ConfigError("leave-one-out needs at least two annotated conversations");
          const ClassifierModel model = train_model(rest, config);
          const CorpusEntry& e = *entries[i];
          const int K = topic_count_policy(&*e.gold, config.topics);
          PipelineConfig sup = config;
          sup.segmenter = "supervised";
          const Segmentation seg = run_segmenter(sup, e.conversation, build_fqg(e.conversation), K, &model);
          const auto s = score_against_gold(e.conversation, *e.gold, seg, nullptr);
          out += e.id + "\t" + fixed4(summarize(s.one_to_one).mean) + "\t" + fixed4(summarize(s.loc3).mean) + "\n";
        }
        emit(train_out.empty() ? "-" : train_out, out);
      } else {
        if (train_out.empty()) throw ConfigError("train needs --out for the model file");
        const ClassifierModel model = train_model(entries, config);
        write_file(train_out, classifier_to_json(model));
        if (!train_importance.empty()) {
          std::string tsv = "feature\timportance\n";
          for (const auto& [name, w] : model.importance()) tsv += name + "\t" + fixed4(w) + "\n";
          write_file(train_importance, tsv);
        }
      }
    } else if (*evaluate) {
      const auto corpus = load_corpus(eval_corpus);
      SimilarityProvider sim;
      if (!eval_sim.empty()) sim = load_similarity_table(eval_sim);
      PipelineResult result;
      for (const auto& e : corpus) {
        ConversationResult r;
        r.id = e.id;
        try {
          if (!e.gold) throw ConfigError("no gold annotation");
          const fs::path dir(eval_system);
          r.segmentation = segmentation_from_json(read_file((dir / (e.id + ".seg.json")).string()));
          r.K = r.segmentation.K;
          const fs::path labels = dir / (e.id + ".labels.json");
          if (fs::exists(labels)) r.labels = labels_from_json(read_file(labels.string()));
          r.scores = score_against_gold(e.conversation, *e.gold, r.segmentation,
                                        fs::exists(labels) ? &r.labels : nullptr, sim);
          r.ok = true;
        } catch (const std::exception& ex) {
          r.error = ex.what();
        }
        result.conversations.push_back(std::move(r));
      }
      emit(eval_out, report_tsv(result));
      if (!result.conversations.empty() && result.failures() == result.conversations.size()) return 1;
    } else if (*pipeline) {
      const PipelineConfig config = make_config(pipe_common);
      if (config.corpus.empty()) throw ConfigError("pipeline needs a corpus directory (--corpus or corpus = DIR)");
      if (config.out.empty()) throw ConfigError("pipeline needs an output directory (--out or out = DIR)");
      const auto corpus = load_corpus(config.corpus);
      const PipelineResult result = run_pipeline(config, corpus);
      for (const auto& r : result.conversations)
        if (!r.ok) std::cerr << "convtopic: " << r.id << ": " << r.error << "\n";
      write_pipeline_outputs(config, result);
      if (result.conversations.empty() || result.failures() == result.conversations.size()) return 1;
    } else if (*report) {
      emit(report_out, annotation_report_tsv(load_corpus(report_corpus)));
    }
  } catch (const ConfigError& e) {
    std::cerr << "convtopic: configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "convtopic: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
