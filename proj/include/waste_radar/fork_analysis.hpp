#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "waste_radar/snapshot.hpp"

namespace waste_radar {

/// Every fork falls into exactly one class.
enum class ForkClass { Backup, Active, PotentiallyStale, Stale };

std::string to_string(ForkClass c);
std::optional<ForkClass> fork_class_from_string(const std::string& s);

/// Counts and percentages per class. percentages is empty when total == 0.
struct ForkDistribution {
  std::map<ForkClass, std::int64_t> counts;
  std::map<ForkClass, double> percentages;
  std::int64_t total = 0;

  bool operator==(const ForkDistribution&) const = default;
};

/// Builds a distribution straight from per-class counts (percentage
/// arithmetic only; used when counts come from an external table).
ForkDistribution make_fork_distribution(std::int64_t active, std::int64_t backup,
                                        std::int64_t potentially_stale,
                                        std::int64_t stale);

struct KMeansResult {
  std::vector<int> assignments;       // 0 or 1 per input value, input order
  std::array<double, 2> centroids{};  // ascending
  int iterations = 0;
  bool converged = false;
};

/// Two-cluster 1-D k-means. Computes the optimal threshold partition of the
/// values (the global minimum of within-cluster sum of squares; in one
/// dimension the optimum is always a split of the sorted values). Equal-cost
/// splits resolve to the lower threshold. All-equal inputs put every point
/// in cluster 0 with both centroids equal. Deterministic.
/// tol and max_iter are validated for contract compatibility; the direct
/// scan needs no iteration.
KMeansResult kmeans_two(std::span<const double> values, double tol = 1e-6,
                        int max_iter = 100);

/// A fork that was never pushed after creation preserves a point-in-time
/// copy of the parent.
bool is_backup(const ForkRecord& fork);

/// A fork counts as active when its last push trails the parent's by
/// strictly less than the window (default 90 days, in seconds). A fork
/// pushed after the parent is active.
bool is_active(const ForkRecord& fork, Timestamp parent_pushed_at,
               int window_days = 90);

struct ForkClassifyOptions {
  int active_window_days = 90;
  double kmeans_tol = 1e-6;
  int kmeans_max_iter = 100;
};

struct ForkClassInfo {
  ForkClass cls = ForkClass::Backup;
  std::int64_t gap_seconds = 0;  // parent_pushed_at - fork.pushed_at
};

struct ForkClassification {
  ForkDistribution distribution;
  std::map<std::string, ForkClassInfo> per_fork;  // keyed by full_name
};

/// Splits all forks of a snapshot into the four classes:
/// backups first, then actives by window, then the remainder clustered on
/// push gap (in fractional days); the smaller-centroid cluster is
/// PotentiallyStale, the larger Stale. A remainder smaller than two forks is
/// conservatively PotentiallyStale.
ForkClassification classify_forks(const RepoSnapshot& snapshot,
                                  const ForkClassifyOptions& options = {});

/// Contributing vs. independently developed split of the active forks.
struct DiversificationReport {
  std::int64_t contributing = 0;
  std::int64_t independent = 0;

  bool operator==(const DiversificationReport&) const = default;

  /// contributing / independent; undefined when independent == 0.
  std::optional<double> pdi() const {
    if (independent == 0) return std::nullopt;
    return static_cast<double>(contributing) / static_cast<double>(independent);
  }
};

/// A fork is Contributing when some pull request names it as head repo, or,
/// for pulls whose head fork was deleted, when the pull author matches the
/// fork owner. Everything else is Independent.
DiversificationReport split_contribution(const RepoSnapshot& snapshot,
                                         std::span<const ForkRecord> active_forks);

/// The alternative fork-independence rules (description contains "fork of"
/// and at least one year between creation and last push). Comparison output
/// only; returns matching full_names sorted ascending.
std::vector<std::string> zhou_independent_forks(const RepoSnapshot& snapshot);

/// CSV export of a classification: header `full_name,class,gap_days`,
/// rows sorted by full_name, gap rendered as truncated fractional days.
std::string fork_classes_csv(const ForkClassification& classification);

}  // namespace waste_radar
