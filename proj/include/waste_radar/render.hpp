#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "waste_radar/analysis_bundle.hpp"
#include "waste_radar/run_config.hpp"

namespace waste_radar {

/// One summary-table row. Carries the integer counts; every rendered value
/// is recomputed from them so the table stays a pure function of the
/// underlying reports.
struct WasteSummaryRow {
  RepoRef repo;
  std::int64_t stale_plus_potentially_stale = 0;
  std::int64_t fork_total = 0;
  std::int64_t contributing = 0;
  std::int64_t independent = 0;
  std::int64_t merged = 0;
  std::int64_t unmerged = 0;
  std::int64_t inversion_events = 0;
  std::int64_t closed_issues = 0;

  std::string stale_pct_text() const;
  std::string pdi_text() const;    // "undefined" when independent == 0
  std::string ratio_text() const;  // "undefined" when merged == 0
  std::string bi_text() const;     // "0" when no closed issues
};

WasteSummaryRow summary_row(const AnalysisBundle& bundle);

/// Aligned text table over all bundles; headers-only when empty.
std::string render_summary_table(std::span<const AnalysisBundle> bundles);

std::string summary_csv(std::span<const AnalysisBundle> bundles);

/// Per-repo CSV exports.
std::string fork_distribution_csv(const AnalysisBundle& bundle);
std::string diversification_csv(const AnalysisBundle& bundle);
std::string prr_csv(const AnalysisBundle& bundle);
std::string bi_csv(const AnalysisBundle& bundle);
std::string ffr_csv(const AnalysisBundle& bundle);
std::string flow_csv(const AnalysisBundle& bundle);

/// Whole-run JSON document: summary rows plus the full bundles, each
/// round-trippable through bundle_from_json.
nlohmann::ordered_json report_json(std::span<const AnalysisBundle> bundles);

/// Feature-vs-bug closure-age profile for one bin. Deterministic bytes.
std::string ffr_chart_svg(const AnalysisBundle& bundle, FfrBin bin);

/// Inflow-outflow ratio series per sprint with a reference line at 1.
std::string flow_chart_svg(const AnalysisBundle& bundle);

/// Messages for measures crossing the configured thresholds; empty when no
/// thresholds are set (the default).
std::vector<std::string> threshold_warnings(const AnalysisBundle& bundle,
                                            const WarningThresholds& thresholds);

}  // namespace waste_radar
