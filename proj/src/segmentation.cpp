#include "convtopic/segmentation.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace convtopic {

int Segmentation::k_effective() const {
  return static_cast<int>(std::set<int>(topic_of.begin(), topic_of.end()).size());
}

std::vector<std::vector<int>> Segmentation::clusters() const {
  int k = K;
  for (int t : topic_of) k = std::max(k, t + 1);
  std::vector<std::vector<int>> out(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < topic_of.size(); ++i) out[static_cast<std::size_t>(topic_of[i])].push_back(static_cast<int>(i));
  return out;
}

Segmentation Segmentation::from_labels(const std::vector<int>& labels) {
  Segmentation seg;
  std::map<int, int> remap;
  seg.topic_of.reserve(labels.size());
  for (int l : labels) {
    auto [it, fresh] = remap.emplace(l, static_cast<int>(remap.size()));
    seg.topic_of.push_back(it->second);
  }
  seg.K = static_cast<int>(remap.size());
  return seg;
}

bool same_partition(const Segmentation& a, const Segmentation& b) {
  return a.size() == b.size() && a.canonical().topic_of == b.canonical().topic_of;
}

}  // namespace convtopic
