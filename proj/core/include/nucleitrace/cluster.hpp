#pragma once

#include <span>
#include <vector>

#include "nucleitrace/image.hpp"

namespace nucleitrace {

/// Half the mean distance from every point to its 3rd..8th nearest
/// neighbors. With fewer than 9 points the ranks stop at n-1; with fewer
/// than 4 points `fallback` is returned.
double adaptive_cutoff(std::span<const Point> points, double fallback);

struct WardMerge {
  int a = 0;  // smallest member of the first cluster
  int b = 0;  // smallest member of the second cluster, a < b
  double height = 0.0;

  bool operator==(const WardMerge&) const = default;
};

struct Clustering {
  /// Cluster index per point; clusters are numbered by their smallest member.
  std::vector<int> assignment;
  std::vector<WardMerge> merges;
  int count = 0;

  /// Point indices of every cluster, in cluster order.
  std::vector<std::vector<int>> members() const;
};

/// Agglomerative Ward clustering, stopped before the first merge whose
/// height exceeds `cutoff`.
///
/// The height of two clusters is sqrt(2 na nb / (na + nb)) times the
/// distance of their centroids, so two single points merge iff their
/// Euclidean distance is <= cutoff. Among equal heights the pair with the
/// lowest (smallest member, other smallest member) merges first.
Clustering ward_cluster(std::span<const Point> points, double cutoff);

}  // namespace nucleitrace
