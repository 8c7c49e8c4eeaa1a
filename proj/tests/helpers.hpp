#ifndef CONVTOPIC_TESTS_HELPERS_HPP
#define CONVTOPIC_TESTS_HELPERS_HPP

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "convtopic/corpus.hpp"

namespace testing {

struct C {
  std::string id;
  std::optional<std::string> parent;
  std::string author;
  std::string body;
};

inline std::string record(const std::vector<C>& comments, const std::string& id = "t") {
  nlohmann::json j;
  j["id"] = id;
  j["comments"] = nlohmann::json::array();
  for (const auto& c : comments) {
    nlohmann::json o;
    o["id"] = c.id;
    o["parent_id"] = c.parent ? nlohmann::json(*c.parent) : nlohmann::json(nullptr);
    o["author"] = c.author;
    o["title"] = "";
    o["timestamp"] = nullptr;
    o["body"] = c.body;
    j["comments"].push_back(o);
  }
  return j.dump();
}

inline convtopic::Conversation conversation(const std::vector<C>& comments) {
  return convtopic::parse_conversation(record(comments));
}

// One comment per line of text, each replying to nothing.
inline convtopic::Conversation flat(const std::vector<std::string>& bodies) {
  std::vector<C> cs;
  for (std::size_t i = 0; i < bodies.size(); ++i) cs.push_back({"c" + std::to_string(i), std::nullopt, "u", bodies[i]});
  return conversation(cs);
}

inline std::string corpus_file(const std::string& name) { return std::string(CONVTOPIC_CORPUS_DIR) + "/" + name; }

}  // namespace testing

#endif
