#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include <json.hpp>

#include "waste_radar/backlog_analysis.hpp"
#include "waste_radar/fork_analysis.hpp"
#include "waste_radar/snapshot.hpp"
#include "waste_radar/time_util.hpp"

namespace waste_radar {

struct AnalysisParams {
  int sprint_days = 14;
  int sprint_count = 60;
  int active_window_days = 90;
  std::optional<Timestamp> anchor;  // default: snapshot fetched_at, day-truncated

  bool operator==(const AnalysisParams&) const = default;
};

void validate(const AnalysisParams& params);

/// Everything the report stage needs for one repository. Derived values
/// (percentages, ratios, the summary row) are recomputed from the counts
/// here, never stored.
struct AnalysisBundle {
  RepoRef repo;
  Timestamp anchor{};
  int sprint_days = 14;
  int sprint_count = 60;
  int active_window_days = 90;
  ForkDistribution distribution;
  DiversificationReport diversification;
  PrRejectionReport pr_rejection;
  BacklogInversionReport backlog;
  std::vector<FfrBinSeries> ffr;
  std::vector<SprintFlow> flows;

  bool operator==(const AnalysisBundle&) const = default;
};

/// Runs all five measures over one snapshot.
AnalysisBundle analyze_snapshot(const RepoSnapshot& snapshot,
                                const AnalysisParams& params = {});

/// Deterministic JSON form: fixed key order, counts as integers, reals as
/// shortest round-trip literals. bundle_from_json(bundle_to_json(b)) == b.
nlohmann::ordered_json bundle_to_json(const AnalysisBundle& bundle);
AnalysisBundle bundle_from_json(const nlohmann::json& doc);

void save_bundle(const AnalysisBundle& bundle, const std::filesystem::path& path);
AnalysisBundle load_bundle(const std::filesystem::path& path);

}  // namespace waste_radar
