#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "waste_radar/snapshot.hpp"
#include "waste_radar/time_util.hpp"

namespace waste_radar {

enum class OutputFormat { Table, Csv, Json, Svg };

std::string to_string(OutputFormat format);
std::optional<OutputFormat> output_format_from_string(const std::string& s);

/// Splits a comma-separated format list ("table,csv"). Unknown tokens raise
/// UsageError before any rendering happens; duplicates collapse.
std::vector<OutputFormat> parse_format_list(const std::string& spec);

/// Optional per-measure warning levels. All empty by default: the measures
/// have no universal targets, so thresholds come from the user's own
/// baselines. Warnings go to stderr and never affect outputs or exit codes.
struct WarningThresholds {
  std::optional<double> stale_pct_above;        // stale + potentially stale %
  std::optional<double> pdi_below;              // low PDI: forks drift away
  std::optional<double> unmerged_merged_above;  // PR rejection ratio
  std::optional<double> bi_index_above;

  bool operator==(const WarningThresholds&) const = default;
};

struct RunConfig {
  std::vector<RepoRef> repos;
  std::filesystem::path snapshot_dir = "snapshots";
  std::filesystem::path out_dir = "reports";
  LabelMapping label_mapping = default_label_mapping();
  std::optional<Timestamp> anchor_date;  // midnight UTC; default per-repo fetched_at
  int sprint_days = 14;
  int sprint_count = 60;
  int active_window_days = 90;
  std::vector<OutputFormat> output_formats = {OutputFormat::Table};
  std::vector<std::string> allow_owners;  // empty means no restriction
  std::vector<std::string> deny_owners;
  WarningThresholds thresholds;
};

/// Throws UsageError on out-of-range values.
void validate(const RunConfig& config);

/// Loads a JSON config document. Every field is optional; absent fields keep
/// their defaults. Problems raise UsageError naming the field.
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace waste_radar
