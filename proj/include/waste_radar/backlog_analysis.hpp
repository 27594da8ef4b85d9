#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "waste_radar/snapshot.hpp"

namespace waste_radar {

/// Merged vs. closed-without-merge split of the closed pull requests.
struct PrRejectionReport {
  std::int64_t merged = 0;
  std::int64_t unmerged = 0;

  bool operator==(const PrRejectionReport&) const = default;

  /// unmerged / merged; undefined when merged == 0.
  std::optional<double> ratio() const {
    if (merged == 0) return std::nullopt;
    return static_cast<double>(unmerged) / static_cast<double>(merged);
  }
};

/// Open PRs in the input are ignored; a closed PR is merged iff merged_at is
/// present.
PrRejectionReport pr_rejection_rate(std::span<const PullRecord> pulls);

struct BacklogInversionReport {
  std::int64_t high_low = 0;
  std::int64_t high_medium = 0;
  std::int64_t medium_low = 0;
  std::int64_t total_closed_issues = 0;
  double bi_index = 0.0;
  bool degenerate_denominator = false;  // no closed issues at all

  bool operator==(const BacklogInversionReport&) const = default;

  std::int64_t events() const { return high_low + high_medium + medium_low; }
};

/// Counts ordered pairs (I1, I2) with ranked priorities P(I1) > P(I2), I1
/// created strictly before I2, I2 closed, and I1 still open when I2 closed
/// (never closed, or closed strictly later). The index divides the event
/// total by three times the number of closed issues of any priority.
BacklogInversionReport backlog_inversion(std::span<const IssueRecord> issues);

/// Closure-age bins, left-inclusive / right-exclusive.
enum class FfrBin { Days0To5, Days5To30, Days30To90, Days90To180 };

inline constexpr std::array<FfrBin, 4> kAllFfrBins = {
    FfrBin::Days0To5, FfrBin::Days5To30, FfrBin::Days30To90, FfrBin::Days90To180};

/// Lower (inclusive) and upper (exclusive) edge in whole days.
std::pair<int, int> ffr_bin_edges(FfrBin bin);
/// Label used in CSV and chart output, e.g. "0-5".
std::string to_string(FfrBin bin);
std::optional<FfrBin> ffr_bin_from_string(const std::string& s);

struct FfrPoint {
  int age_days = 0;
  std::int64_t count = 0;
  double normalized = 0.0;  // count / series total, sums to 1 per non-empty series

  bool operator==(const FfrPoint&) const = default;
};

struct FfrBinSeries {
  FfrBin bin = FfrBin::Days0To5;
  IssueKind kind = IssueKind::Bug;  // Bug or Feature only
  std::int64_t total = 0;
  std::vector<FfrPoint> points;  // ascending age_days

  bool operator==(const FfrBinSeries&) const = default;
};

/// Bins the closed Bug/Feature issues by whole-day closure age (floor of the
/// open duration). Ages of 180 days or more are excluded. Returns all eight
/// (bin, kind) series in fixed order (bins ascending, Bug before Feature);
/// empty series have no points.
std::vector<FfrBinSeries> ffr_bins(std::span<const IssueRecord> issues);

struct SprintKindFlow {
  std::int64_t inflow = 0;     // created in the window
  std::int64_t spillover = 0;  // created in the previous window, open at window start
  std::int64_t outflow = 0;    // closed in the window

  bool operator==(const SprintKindFlow&) const = default;

  /// outflow / (inflow + spillover); absent on zero denominator.
  std::optional<double> ratio() const {
    const std::int64_t denom = inflow + spillover;
    if (denom == 0) return std::nullopt;
    return static_cast<double>(outflow) / static_cast<double>(denom);
  }
};

struct SprintFlow {
  int sprint_index = 0;  // 0..sprints-1, highest index is the most recent
  Timestamp window_start{};
  Timestamp window_end{};
  SprintKindFlow bug;
  SprintKindFlow feature;

  bool operator==(const SprintFlow&) const = default;
};

/// Sprint windows tile contiguously and end at the anchor:
/// [anchor - k*sprint_days, anchor - (k-1)*sprint_days) for k = sprints..1.
/// Tracks Bug and Feature issues only.
std::vector<SprintFlow> inflow_outflow(std::span<const IssueRecord> issues,
                                       Timestamp anchor, int sprint_days = 14,
                                       int sprints = 60);

}  // namespace waste_radar
