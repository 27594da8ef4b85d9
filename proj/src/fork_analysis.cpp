#include "waste_radar/fork_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "waste_radar/errors.hpp"
#include "waste_radar/numeric_format.hpp"

namespace waste_radar {

namespace {

constexpr std::array<ForkClass, 4> kAllClasses = {
    ForkClass::Backup, ForkClass::Active, ForkClass::PotentiallyStale,
    ForkClass::Stale};

}  // namespace

std::string to_string(ForkClass c) {
  switch (c) {
    case ForkClass::Backup: return "backup";
    case ForkClass::Active: return "active";
    case ForkClass::PotentiallyStale: return "potentially_stale";
    case ForkClass::Stale: return "stale";
  }
  return "backup";
}

std::optional<ForkClass> fork_class_from_string(const std::string& s) {
  if (s == "backup") return ForkClass::Backup;
  if (s == "active") return ForkClass::Active;
  if (s == "potentially_stale") return ForkClass::PotentiallyStale;
  if (s == "stale") return ForkClass::Stale;
  return std::nullopt;
}

ForkDistribution make_fork_distribution(std::int64_t active, std::int64_t backup,
                                        std::int64_t potentially_stale,
                                        std::int64_t stale) {
  ForkDistribution d;
  d.counts[ForkClass::Active] = active;
  d.counts[ForkClass::Backup] = backup;
  d.counts[ForkClass::PotentiallyStale] = potentially_stale;
  d.counts[ForkClass::Stale] = stale;
  d.total = active + backup + potentially_stale + stale;
  if (d.total > 0) {
    for (ForkClass c : kAllClasses) {
      d.percentages[c] =
          100.0 * static_cast<double>(d.counts[c]) / static_cast<double>(d.total);
    }
  }
  return d;
}

KMeansResult kmeans_two(std::span<const double> values, double tol, int max_iter) {
  if (values.empty()) throw ValidationError("kmeans_two: empty input");
  if (!(tol > 0)) throw ValidationError("kmeans_two: tol must be positive");
  if (max_iter < 1) throw ValidationError("kmeans_two: max_iter must be positive");

  const std::size_t n = values.size();
  KMeansResult result;
  result.assignments.assign(n, 0);
  result.iterations = 1;
  result.converged = true;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&values](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  if (values[order.front()] == values[order.back()]) {
    // Degenerate: identical values, one effective cluster.
    result.centroids = {values[order.front()], values[order.front()]};
    return result;
  }

  // Prefix sums over the sorted values; segment cost is
  // sum(x^2) - (sum x)^2 / len. long double keeps the split ranking stable.
  std::vector<long double> prefix(n + 1, 0.0L), prefix_sq(n + 1, 0.0L);
  for (std::size_t i = 0; i < n; ++i) {
    const long double v = values[order[i]];
    prefix[i + 1] = prefix[i] + v;
    prefix_sq[i + 1] = prefix_sq[i] + v * v;
  }
  auto segment_cost = [&](std::size_t begin, std::size_t end) {
    const long double s = prefix[end] - prefix[begin];
    const long double s2 = prefix_sq[end] - prefix_sq[begin];
    return s2 - s * s / static_cast<long double>(end - begin);
  };

  // Scan every split "first k sorted values left"; strict < keeps the lowest
  // threshold on cost ties.
  std::size_t best_k = 1;
  long double best_cost = segment_cost(0, 1) + segment_cost(1, n);
  for (std::size_t k = 2; k < n; ++k) {
    const long double cost = segment_cost(0, k) + segment_cost(k, n);
    if (cost < best_cost) {
      best_cost = cost;
      best_k = k;
    }
  }

  for (std::size_t i = best_k; i < n; ++i) result.assignments[order[i]] = 1;
  result.centroids = {
      static_cast<double>(prefix[best_k] / static_cast<long double>(best_k)),
      static_cast<double>((prefix[n] - prefix[best_k]) /
                          static_cast<long double>(n - best_k))};
  return result;
}

bool is_backup(const ForkRecord& fork) { return fork.pushed_at < fork.created_at; }

bool is_active(const ForkRecord& fork, Timestamp parent_pushed_at, int window_days) {
  const std::int64_t gap =
      to_unix_seconds(parent_pushed_at) - to_unix_seconds(fork.pushed_at);
  return gap < static_cast<std::int64_t>(window_days) * kSecondsPerDay;
}

ForkClassification classify_forks(const RepoSnapshot& snapshot,
                                  const ForkClassifyOptions& options) {
  ForkClassification out;

  std::vector<const ForkRecord*> remainder;
  for (const auto& fork : snapshot.forks) {
    const std::int64_t gap =
        to_unix_seconds(snapshot.parent_pushed_at) - to_unix_seconds(fork.pushed_at);
    if (is_backup(fork)) {
      out.per_fork[fork.full_name] = {ForkClass::Backup, gap};
    } else if (is_active(fork, snapshot.parent_pushed_at, options.active_window_days)) {
      out.per_fork[fork.full_name] = {ForkClass::Active, gap};
    } else {
      remainder.push_back(&fork);
    }
  }

  if (remainder.size() < 2) {
    for (const ForkRecord* fork : remainder) {
      const std::int64_t gap =
          to_unix_seconds(snapshot.parent_pushed_at) - to_unix_seconds(fork->pushed_at);
      out.per_fork[fork->full_name] = {ForkClass::PotentiallyStale, gap};
    }
  } else {
    std::vector<double> gaps_days;
    gaps_days.reserve(remainder.size());
    for (const ForkRecord* fork : remainder) {
      const std::int64_t gap =
          to_unix_seconds(snapshot.parent_pushed_at) - to_unix_seconds(fork->pushed_at);
      gaps_days.push_back(static_cast<double>(gap) /
                          static_cast<double>(kSecondsPerDay));
    }
    const KMeansResult clusters =
        kmeans_two(gaps_days, options.kmeans_tol, options.kmeans_max_iter);
    for (std::size_t i = 0; i < remainder.size(); ++i) {
      const ForkRecord* fork = remainder[i];
      const std::int64_t gap =
          to_unix_seconds(snapshot.parent_pushed_at) - to_unix_seconds(fork->pushed_at);
      // Centroids are ascending, so cluster 0 is the smaller gap.
      const ForkClass cls = clusters.assignments[i] == 0 ? ForkClass::PotentiallyStale
                                                         : ForkClass::Stale;
      out.per_fork[fork->full_name] = {cls, gap};
    }
  }

  std::map<ForkClass, std::int64_t> counts;
  for (ForkClass c : kAllClasses) counts[c] = 0;
  for (const auto& [_, info] : out.per_fork) ++counts[info.cls];
  out.distribution = make_fork_distribution(
      counts[ForkClass::Active], counts[ForkClass::Backup],
      counts[ForkClass::PotentiallyStale], counts[ForkClass::Stale]);
  return out;
}

DiversificationReport split_contribution(const RepoSnapshot& snapshot,
                                         std::span<const ForkRecord> active_forks) {
  std::set<std::string> head_repos;
  std::set<std::string> headless_authors;
  for (const auto& pull : snapshot.pulls) {
    if (pull.head_repo_full_name) {
      head_repos.insert(*pull.head_repo_full_name);
    } else {
      headless_authors.insert(pull.author);
    }
  }

  DiversificationReport report;
  for (const auto& fork : active_forks) {
    const bool contributing = head_repos.count(fork.full_name) > 0 ||
                              headless_authors.count(fork.owner) > 0;
    if (contributing) {
      ++report.contributing;
    } else {
      ++report.independent;
    }
  }
  return report;
}

std::vector<std::string> zhou_independent_forks(const RepoSnapshot& snapshot) {
  constexpr std::int64_t kYearSeconds = 365 * kSecondsPerDay;
  std::vector<std::string> names;
  for (const auto& fork : snapshot.forks) {
    std::string desc = fork.description;
    std::transform(desc.begin(), desc.end(), desc.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    const bool marked = desc.find("fork of") != std::string::npos;
    const std::int64_t activity =
        to_unix_seconds(fork.pushed_at) - to_unix_seconds(fork.created_at);
    if (marked && activity >= kYearSeconds) names.push_back(fork.full_name);
  }
  std::sort(names.begin(), names.end());
  return names;
}

std::string fork_classes_csv(const ForkClassification& classification) {
  std::ostringstream out;
  out << "full_name,class,gap_days\n";
  for (const auto& [full_name, info] : classification.per_fork) {
    out << full_name << ',' << to_string(info.cls) << ','
        << format_fixed4(info.gap_seconds, kSecondsPerDay) << '\n';
  }
  return out.str();
}

}  // namespace waste_radar
