#include "waste_radar/backlog_analysis.hpp"

#include <algorithm>
#include <limits>
#include <map>

#include "waste_radar/errors.hpp"

namespace waste_radar {

namespace {

// Fenwick tree over compressed closure times; supports "how many inserted
// values are <= x".
class Fenwick {
public:
  explicit Fenwick(std::size_t size) : tree_(size + 1, 0) {}

  void add(std::size_t index) {
    for (std::size_t i = index + 1; i < tree_.size(); i += i & (~i + 1)) ++tree_[i];
  }

  std::int64_t count_up_to(std::size_t index) const {
    std::int64_t sum = 0;
    for (std::size_t i = index + 1; i > 0; i -= i & (~i + 1)) sum += tree_[i];
    return sum;
  }

private:
  std::vector<std::int64_t> tree_;
};

struct RankedIssue {
  std::int64_t created;
  std::int64_t closed;  // sentinel max() when open
  bool open;
};

constexpr std::int64_t kOpenSentinel = std::numeric_limits<std::int64_t>::max();

// Counts pairs (a in high, b in low) with a.created < b.created, b closed,
// and (a open or a.closed > b.closed). O((|A|+|B|) log |A|) sweep over
// creation order: queries for b happen before insertions of a at the same
// creation instant, so the strict created(a) < created(b) holds.
std::int64_t count_inversions(const std::vector<RankedIssue>& high,
                              const std::vector<RankedIssue>& low) {
  if (high.empty()) return 0;

  std::vector<std::int64_t> closed_values;
  closed_values.reserve(high.size());
  for (const auto& a : high) closed_values.push_back(a.closed);
  std::sort(closed_values.begin(), closed_values.end());
  closed_values.erase(std::unique(closed_values.begin(), closed_values.end()),
                      closed_values.end());
  auto closed_rank = [&closed_values](std::int64_t value) {
    // index of the last element <= value, or npos when none
    auto it = std::upper_bound(closed_values.begin(), closed_values.end(), value);
    return static_cast<std::ptrdiff_t>(it - closed_values.begin()) - 1;
  };

  std::vector<const RankedIssue*> inserts;
  inserts.reserve(high.size());
  for (const auto& a : high) inserts.push_back(&a);
  std::sort(inserts.begin(), inserts.end(),
            [](const RankedIssue* x, const RankedIssue* y) { return x->created < y->created; });

  std::vector<const RankedIssue*> queries;
  for (const auto& b : low) {
    if (!b.open) queries.push_back(&b);
  }
  std::sort(queries.begin(), queries.end(),
            [](const RankedIssue* x, const RankedIssue* y) { return x->created < y->created; });

  Fenwick closed_counts(closed_values.size());
  std::int64_t inserted = 0;
  std::int64_t total = 0;
  std::size_t next_insert = 0;
  for (const RankedIssue* b : queries) {
    while (next_insert < inserts.size() && inserts[next_insert]->created < b->created) {
      const std::ptrdiff_t rank = closed_rank(inserts[next_insert]->closed);
      closed_counts.add(static_cast<std::size_t>(rank));
      ++inserted;
      ++next_insert;
    }
    // a qualifies unless it closed at or before b's closure
    const std::ptrdiff_t rank = closed_rank(b->closed);
    const std::int64_t closed_no_later =
        rank >= 0 ? closed_counts.count_up_to(static_cast<std::size_t>(rank)) : 0;
    total += inserted - closed_no_later;
  }
  return total;
}

}  // namespace

PrRejectionReport pr_rejection_rate(std::span<const PullRecord> pulls) {
  PrRejectionReport report;
  for (const auto& pull : pulls) {
    if (!pull.closed_at) continue;  // open PRs are ignored
    if (pull.merged_at) {
      ++report.merged;
    } else {
      ++report.unmerged;
    }
  }
  return report;
}

BacklogInversionReport backlog_inversion(std::span<const IssueRecord> issues) {
  std::map<Priority, std::vector<RankedIssue>> ranked;
  BacklogInversionReport report;
  for (const auto& issue : issues) {
    if (issue.closed_at) ++report.total_closed_issues;
    if (issue.priority == Priority::Unspecified) continue;
    ranked[issue.priority].push_back(
        {to_unix_seconds(issue.created_at),
         issue.closed_at ? to_unix_seconds(*issue.closed_at) : kOpenSentinel,
         !issue.closed_at.has_value()});
  }

  report.high_low = count_inversions(ranked[Priority::High], ranked[Priority::Low]);
  report.high_medium = count_inversions(ranked[Priority::High], ranked[Priority::Medium]);
  report.medium_low = count_inversions(ranked[Priority::Medium], ranked[Priority::Low]);

  if (report.total_closed_issues > 0) {
    report.bi_index = static_cast<double>(report.events()) /
                      (3.0 * static_cast<double>(report.total_closed_issues));
  } else {
    report.bi_index = 0.0;
    report.degenerate_denominator = true;
  }
  return report;
}

std::pair<int, int> ffr_bin_edges(FfrBin bin) {
  switch (bin) {
    case FfrBin::Days0To5: return {0, 5};
    case FfrBin::Days5To30: return {5, 30};
    case FfrBin::Days30To90: return {30, 90};
    case FfrBin::Days90To180: return {90, 180};
  }
  return {0, 5};
}

std::string to_string(FfrBin bin) {
  const auto [lo, hi] = ffr_bin_edges(bin);
  return std::to_string(lo) + "-" + std::to_string(hi);
}

std::optional<FfrBin> ffr_bin_from_string(const std::string& s) {
  for (FfrBin bin : kAllFfrBins) {
    if (to_string(bin) == s) return bin;
  }
  return std::nullopt;
}

std::vector<FfrBinSeries> ffr_bins(std::span<const IssueRecord> issues) {
  // (bin, kind) -> age -> count
  std::map<std::pair<int, IssueKind>, std::map<int, std::int64_t>> buckets;

  for (const auto& issue : issues) {
    if (!issue.closed_at) continue;
    if (issue.kind != IssueKind::Bug && issue.kind != IssueKind::Feature) continue;
    const std::int64_t age_days =
        (to_unix_seconds(*issue.closed_at) - to_unix_seconds(issue.created_at)) /
        kSecondsPerDay;
    int bin_index = -1;
    for (std::size_t i = 0; i < kAllFfrBins.size(); ++i) {
      const auto [lo, hi] = ffr_bin_edges(kAllFfrBins[i]);
      if (age_days >= lo && age_days < hi) {
        bin_index = static_cast<int>(i);
        break;
      }
    }
    if (bin_index < 0) continue;  // 180 days or older
    ++buckets[{bin_index, issue.kind}][static_cast<int>(age_days)];
  }

  std::vector<FfrBinSeries> series;
  for (std::size_t i = 0; i < kAllFfrBins.size(); ++i) {
    for (IssueKind kind : {IssueKind::Bug, IssueKind::Feature}) {
      FfrBinSeries s;
      s.bin = kAllFfrBins[i];
      s.kind = kind;
      const auto& counts = buckets[{static_cast<int>(i), kind}];
      for (const auto& [_, count] : counts) s.total += count;
      for (const auto& [age, count] : counts) {
        s.points.push_back({age, count,
                            static_cast<double>(count) / static_cast<double>(s.total)});
      }
      series.push_back(std::move(s));
    }
  }
  return series;
}

std::vector<SprintFlow> inflow_outflow(std::span<const IssueRecord> issues,
                                       Timestamp anchor, int sprint_days, int sprints) {
  if (sprint_days < 1) throw ValidationError("inflow_outflow: sprint_days must be >= 1");
  if (sprints < 1) throw ValidationError("inflow_outflow: sprints must be >= 1");

  const std::int64_t anchor_s = to_unix_seconds(anchor);
  const std::int64_t window_s = static_cast<std::int64_t>(sprint_days) * kSecondsPerDay;

  std::vector<SprintFlow> flows(static_cast<std::size_t>(sprints));
  for (int index = 0; index < sprints; ++index) {
    const std::int64_t k = sprints - index;
    auto& flow = flows[static_cast<std::size_t>(index)];
    flow.sprint_index = index;
    flow.window_start = from_unix_seconds(anchor_s - k * window_s);
    flow.window_end = from_unix_seconds(anchor_s - (k - 1) * window_s);
  }

  for (const auto& issue : issues) {
    if (issue.kind != IssueKind::Bug && issue.kind != IssueKind::Feature) continue;
    const std::int64_t created = to_unix_seconds(issue.created_at);
    const std::optional<std::int64_t> closed =
        issue.closed_at ? std::optional(to_unix_seconds(*issue.closed_at)) : std::nullopt;

    for (auto& flow : flows) {
      auto& kind_flow = issue.kind == IssueKind::Bug ? flow.bug : flow.feature;
      const std::int64_t start = to_unix_seconds(flow.window_start);
      const std::int64_t end = to_unix_seconds(flow.window_end);
      if (created >= start && created < end) ++kind_flow.inflow;
      if (closed && *closed >= start && *closed < end) ++kind_flow.outflow;
      // carried over: born in the previous window, still open at this one's start
      if (created >= start - window_s && created < start &&
          (!closed || *closed >= start)) {
        ++kind_flow.spillover;
      }
    }
  }
  return flows;
}

}  // namespace waste_radar
