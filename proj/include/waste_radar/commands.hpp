#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "waste_radar/analysis_bundle.hpp"
#include "waste_radar/github_ingest.hpp"
#include "waste_radar/run_config.hpp"

namespace waste_radar {

struct FetchCommandOptions {
  RunConfig config;
  AuthContext auth;
  bool refresh = false;
  bool fail_fast = false;
  std::optional<std::string> fixture_dir;  // replay directory instead of live API
  FetchLimits limits;
  int concurrency = 4;
  HttpClient* client_override = nullptr;  // used by tests
  std::function<void(const std::string&)> log;
};

struct FetchOutcome {
  std::vector<std::filesystem::path> written;
  std::vector<std::filesystem::path> skipped;  // cache hits, no request made
  std::vector<std::string> failures;           // "owner/name: reason"

  bool ok() const { return failures.empty(); }
};

/// Fetches a snapshot per configured repo into config.snapshot_dir. Existing
/// snapshots are kept untouched (and unqueried) unless refresh is set. One
/// repo failing does not stop the others.
FetchOutcome cmd_fetch(const FetchCommandOptions& options);

struct AnalyzeOutcome {
  std::vector<std::filesystem::path> bundle_paths;  // config repo order
  std::vector<AnalysisBundle> bundles;
};

/// Analyzes the snapshot of every configured repo (all snapshots in
/// snapshot_dir when config.repos is empty) and writes one bundle JSON per
/// repo under out_dir/analysis. Deterministic: same snapshots and config give
/// byte-identical bundles. Throws on missing or invalid snapshots.
AnalyzeOutcome cmd_analyze(const RunConfig& config, int jobs = 1);

struct ReportOutcome {
  std::string table;  // non-empty when the table format was requested
  std::vector<std::filesystem::path> files;
  std::vector<std::string> warnings;
};

/// Renders the requested formats from bundles into out_dir. Formats must be
/// pre-validated (parse_format_list); an empty list is a usage error.
ReportOutcome cmd_report(std::span<const AnalysisBundle> bundles,
                         std::span<const OutputFormat> formats,
                         const std::filesystem::path& out_dir,
                         const WarningThresholds& thresholds = {});

/// Loads the bundles previously written by cmd_analyze, in config repo order,
/// or every bundle under out_dir/analysis (sorted by file name) when
/// config.repos is empty.
std::vector<AnalysisBundle> load_bundles(const RunConfig& config);

/// Snapshot path for one repo under the configured snapshot directory.
std::filesystem::path snapshot_path(const RunConfig& config, const RepoRef& repo);

}  // namespace waste_radar
