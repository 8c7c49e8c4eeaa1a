#include "convtopic/annotations.hpp"

#include <map>

#include <json.hpp>

#include "convtopic/error.hpp"
#include "convtopic/text.hpp"

namespace convtopic {

using nlohmann::json;

namespace {

int topic_id_from(const json& v, const std::string& where) {
  if (v.is_number_integer()) return v.get<int>();
  if (v.is_string()) {
    try {
      std::size_t used = 0;
      const int id = std::stoi(v.get<std::string>(), &used);
      if (used == v.get<std::string>().size()) return id;
    } catch (const std::exception&) {
    }
  }
  throw ParseError(where + ": topic id must be an integer");
}

}  // namespace

GoldStandard parse_gold(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("gold file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("gold file must be a JSON object");
  GoldStandard gold;
  if (!doc.contains("conversation_id") || !doc["conversation_id"].is_string())
    throw ParseError("gold file: missing string field 'conversation_id'");
  gold.conversation_id = doc["conversation_id"].get<std::string>();
  if (!doc.contains("annotators") || !doc["annotators"].is_array())
    throw ParseError("gold file: missing array field 'annotators'");

  std::size_t expected = 0;
  for (std::size_t a = 0; a < doc["annotators"].size(); ++a) {
    const json& entry = doc["annotators"][a];
    const std::string where = "annotator #" + std::to_string(a);
    if (!entry.is_object()) throw ParseError(where + " is not an object");
    Annotation ann;
    ann.annotator = entry.contains("id") && entry["id"].is_string() ? entry["id"].get<std::string>() : where;
    if (!entry.contains("assignment") || !entry["assignment"].is_array())
      throw ParseError(where + ": missing array field 'assignment'");
    std::vector<int> raw;
    for (const auto& v : entry["assignment"]) {
      if (v.is_array()) {
        if (v.empty()) throw ParseError(where + ": empty topic list in assignment");
        raw.push_back(topic_id_from(v.front(), where));
      } else {
        raw.push_back(topic_id_from(v, where));
      }
    }
    if (a == 0) expected = raw.size();
    if (raw.size() != expected) throw ParseError(where + ": assignment length differs from the first annotator");
    ann.segmentation = Segmentation::from_labels(raw);

    std::map<int, std::string> text;
    if (entry.contains("labels")) {
      if (!entry["labels"].is_object()) throw ParseError(where + ": 'labels' must be an object");
      for (const auto& [key, value] : entry["labels"].items()) {
        if (!value.is_string()) throw ParseError(where + ": label of topic " + key + " is not a string");
        text[topic_id_from(json(key), where)] = value.get<std::string>();
      }
    }
    ann.labels.assign(static_cast<std::size_t>(ann.segmentation.K), "");
    for (std::size_t i = 0; i < raw.size(); ++i) {
      auto it = text.find(raw[i]);
      if (it != text.end()) ann.labels[static_cast<std::size_t>(ann.segmentation.topic_of[i])] = it->second;
    }
    gold.annotators.push_back(std::move(ann));
  }
  return gold;
}

GoldStandard load_gold(const std::string& path) {
  try {
    return parse_gold(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::string gold_to_json(const GoldStandard& gold) {
  nlohmann::ordered_json doc;
  doc["conversation_id"] = gold.conversation_id;
  doc["annotators"] = nlohmann::ordered_json::array();
  for (const auto& ann : gold.annotators) {
    nlohmann::ordered_json entry;
    entry["id"] = ann.annotator;
    nlohmann::ordered_json labels = nlohmann::ordered_json::object();
    for (std::size_t k = 0; k < ann.labels.size(); ++k) labels[std::to_string(k)] = ann.labels[k];
    entry["labels"] = labels;
    entry["assignment"] = ann.segmentation.topic_of;
    doc["annotators"].push_back(entry);
  }
  return doc.dump(2) + "\n";
}

bool is_excluded_label(std::string_view label) {
  const std::string l = to_lower(trim(label));
  return l == "intro" || l == "end";
}

std::vector<char> excluded_sentences(const GoldStandard& gold) {
  std::vector<char> out;
  for (const auto& ann : gold.annotators) {
    out.resize(ann.segmentation.size(), 0);
    for (std::size_t i = 0; i < ann.segmentation.size(); ++i) {
      const int t = ann.segmentation.topic_of[i];
      if (is_excluded_label(ann.labels[static_cast<std::size_t>(t)])) out[i] = 1;
    }
  }
  return out;
}

}  // namespace convtopic
