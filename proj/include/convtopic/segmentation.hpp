#ifndef CONVTOPIC_SEGMENTATION_HPP
#define CONVTOPIC_SEGMENTATION_HPP

#include <string>
#include <vector>

namespace convtopic {

/// Sentence -> topic assignment, the common output of every segmenter.
struct Segmentation {
  std::vector<int> topic_of;
  /// Number of topics the model was asked for. Ids lie in [0, K).
  int K = 0;

  std::size_t size() const { return topic_of.size(); }
  /// Number of topic ids actually used.
  int k_effective() const;
  /// Sentence ids per topic id (K lists, possibly empty).
  std::vector<std::vector<int>> clusters() const;
  bool same_topic(int a, int b) const { return topic_of.at(a) == topic_of.at(b); }

  /// Relabels arbitrary ids densely by order of first appearance.
  static Segmentation from_labels(const std::vector<int>& labels);
  /// Dense relabeling of this segmentation (K becomes k_effective()).
  Segmentation canonical() const { return from_labels(topic_of); }

  bool operator==(const Segmentation&) const = default;
};

/// True if the two segmentations induce the same partition.
bool same_partition(const Segmentation& a, const Segmentation& b);

}  // namespace convtopic

#endif  // CONVTOPIC_SEGMENTATION_HPP
