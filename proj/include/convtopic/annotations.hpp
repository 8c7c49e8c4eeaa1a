#ifndef CONVTOPIC_ANNOTATIONS_HPP
#define CONVTOPIC_ANNOTATIONS_HPP

#include <string>
#include <string_view>
#include <vector>

#include "convtopic/segmentation.hpp"

namespace convtopic {

/// One annotator's topic assignment. Topic ids are dense in order of first
/// appearance; labels[k] is the label text of topic k (possibly empty).
struct Annotation {
  std::string annotator;
  Segmentation segmentation;
  std::vector<std::string> labels;

  bool operator==(const Annotation&) const = default;
};

struct GoldStandard {
  std::string conversation_id;
  std::vector<Annotation> annotators;

  bool operator==(const GoldStandard&) const = default;
};

/// Gold JSON: {conversation_id, annotators:[{id, labels:{topic_id: text},
/// assignment:[topic_id per sentence]}]}. An assignment entry may be a list
/// of topic ids, in which case only the first is kept.
GoldStandard parse_gold(std::string_view document);
GoldStandard load_gold(const std::string& path);
std::string gold_to_json(const GoldStandard& gold);

/// INTRO and END (case-insensitive) mark sentences left out of evaluation.
bool is_excluded_label(std::string_view label);

/// Sentences any annotator put in an INTRO or END topic.
std::vector<char> excluded_sentences(const GoldStandard& gold);

}  // namespace convtopic

#endif  // CONVTOPIC_ANNOTATIONS_HPP
