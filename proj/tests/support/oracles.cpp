#include "support/oracles.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace waste_radar::testing {

namespace {

int rank_of(Priority p) {
  switch (p) {
    case Priority::High: return 3;
    case Priority::Medium: return 2;
    case Priority::Low: return 1;
    case Priority::Unspecified: return 0;
  }
  return 0;
}

}  // namespace

InversionOracleCounts count_inversions_brute(std::span<const IssueRecord> issues) {
  InversionOracleCounts counts;
  for (const auto& issue : issues) {
    if (issue.closed_at) ++counts.closed;
  }
  for (const auto& older : issues) {
    const int older_rank = rank_of(older.priority);
    if (older_rank == 0) continue;
    for (const auto& newer : issues) {
      const int newer_rank = rank_of(newer.priority);
      if (newer_rank == 0 || older_rank <= newer_rank) continue;
      if (!(older.created_at < newer.created_at)) continue;
      if (!newer.closed_at) continue;
      const bool older_open_at_close =
          !older.closed_at || *older.closed_at > *newer.closed_at;
      if (!older_open_at_close) continue;
      if (older_rank == 3 && newer_rank == 1) ++counts.high_low;
      if (older_rank == 3 && newer_rank == 2) ++counts.high_medium;
      if (older_rank == 2 && newer_rank == 1) ++counts.medium_low;
    }
  }
  return counts;
}

KMeansResult kmeans_two_brute(std::span<const double> values) {
  KMeansResult result;
  result.iterations = 1;
  result.converged = true;
  const std::size_t n = values.size();
  result.assignments.assign(n, 0);
  if (n == 0) return result;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  const double lowest = values[order.front()];
  const double highest = values[order.back()];
  if (lowest == highest || n == 1) {
    result.centroids = {lowest, lowest};
    return result;
  }

  long double best_sse = 0;
  std::size_t best_split = 0;
  for (std::size_t split = 1; split < n; ++split) {
    long double mean_low = 0;
    long double mean_high = 0;
    for (std::size_t i = 0; i < split; ++i) mean_low += values[order[i]];
    for (std::size_t i = split; i < n; ++i) mean_high += values[order[i]];
    mean_low /= static_cast<long double>(split);
    mean_high /= static_cast<long double>(n - split);
    long double sse = 0;
    for (std::size_t i = 0; i < split; ++i) {
      const long double d = values[order[i]] - mean_low;
      sse += d * d;
    }
    for (std::size_t i = split; i < n; ++i) {
      const long double d = values[order[i]] - mean_high;
      sse += d * d;
    }
    if (best_split == 0 || sse < best_sse) {
      best_sse = sse;
      best_split = split;
    }
  }

  long double mean_low = 0;
  long double mean_high = 0;
  for (std::size_t i = 0; i < best_split; ++i) mean_low += values[order[i]];
  for (std::size_t i = best_split; i < n; ++i) mean_high += values[order[i]];
  mean_low /= static_cast<long double>(best_split);
  mean_high /= static_cast<long double>(n - best_split);
  for (std::size_t i = best_split; i < n; ++i) result.assignments[order[i]] = 1;
  result.centroids = {static_cast<double>(mean_low),
                      static_cast<double>(mean_high)};
  return result;
}

}  // namespace waste_radar::testing
