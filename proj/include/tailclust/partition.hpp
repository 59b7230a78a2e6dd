#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tailclust {

// A partition of the group ids 0..d-1 into disjoint clusters. Clusters and
// members are kept sorted so that equal partitions compare equal.
struct Partition {
  std::vector<std::vector<int>> clusters;
  int d = 0;

  // Provenance, carried into serialized output.
  std::string algorithm;
  std::optional<double> tau;
  std::optional<int> K;

  int cluster_count() const { return static_cast<int>(clusters.size()); }

  // Cluster label of each group id, 0-based cluster positions.
  std::vector<int> labels() const {
    std::vector<int> lab(static_cast<std::size_t>(d), -1);
    for (std::size_t c = 0; c < clusters.size(); ++c)
      for (int g : clusters[c]) lab[static_cast<std::size_t>(g)] =
          static_cast<int>(c);
    return lab;
  }

  void normalize() {
    for (auto& c : clusters) std::sort(c.begin(), c.end());
    std::sort(clusters.begin(), clusters.end());
  }

  friend bool operator==(const Partition& a, const Partition& b) {
    return a.d == b.d && a.clusters == b.clusters;
  }
};

// Checks that the clusters are nonempty and cover 0..d-1 exactly once.
inline void validate_partition(const Partition& p) {
  if (p.d < 1) throw std::invalid_argument("partition has no groups");
  std::vector<int> seen(static_cast<std::size_t>(p.d), 0);
  if (p.clusters.empty())
    throw std::invalid_argument("partition has no clusters");
  for (std::size_t c = 0; c < p.clusters.size(); ++c) {
    if (p.clusters[c].empty())
      throw std::invalid_argument("cluster " + std::to_string(c) +
                                  " is empty");
    for (int g : p.clusters[c]) {
      if (g < 0 || g >= p.d)
        throw std::invalid_argument("group id " + std::to_string(g) +
                                    " is out of range for d=" +
                                    std::to_string(p.d));
      if (seen[static_cast<std::size_t>(g)]++)
        throw std::invalid_argument("group id " + std::to_string(g) +
                                    " appears in more than one cluster");
    }
  }
  for (int g = 0; g < p.d; ++g)
    if (!seen[static_cast<std::size_t>(g)])
      throw std::invalid_argument("group id " + std::to_string(g) +
                                  " is missing from the partition");
}

}  // namespace tailclust
