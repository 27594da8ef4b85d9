#include <doctest.h>

#include <vector>

#include "support/fixture_builders.hpp"
#include "waste_radar/analysis_bundle.hpp"
#include "waste_radar/errors.hpp"
#include "waste_radar/render.hpp"
#include "waste_radar/run_config.hpp"

using namespace waste_radar;
using namespace waste_radar::testing;

namespace {

/// One fork per class, one merged and one unmerged pull, issues with an
/// inversion and two closable kinds.
RepoSnapshot sample_snapshot() {
  auto snapshot = make_snapshot();
  const auto parent = snapshot.parent_pushed_at;

  auto gap_fork = [&parent](std::string name, int gap_days) {
    ForkRecord fork;
    fork.full_name = std::move(name);
    fork.owner = fork.full_name.substr(0, fork.full_name.find('/'));
    fork.pushed_at = parent - std::chrono::seconds(
                                  static_cast<std::int64_t>(gap_days) *
                                  kSecondsPerDay);
    fork.created_at = fork.pushed_at - std::chrono::seconds(30 * kSecondsPerDay);
    return fork;
  };
  snapshot.forks.push_back(
      make_fork("bak/widget", "2024-01-10T00:00:00Z", "2024-01-09T00:00:00Z"));
  snapshot.forks.push_back(gap_fork("amy/widget", 5));
  snapshot.forks.push_back(gap_fork("bob/widget", 8));
  snapshot.forks.push_back(gap_fork("pot/widget", 100));
  snapshot.forks.push_back(gap_fork("sta/widget", 900));
  snapshot.fork_count = 5;

  snapshot.pulls.push_back(make_pull(1, "2024-02-01T00:00:00Z",
                                     std::string("2024-02-03T00:00:00Z"),
                                     std::string("2024-02-03T00:00:00Z"),
                                     "amy", std::string("amy/widget")));
  snapshot.pulls.push_back(make_pull(2, "2024-02-02T00:00:00Z",
                                     std::string("2024-02-05T00:00:00Z"),
                                     std::nullopt, "rando"));

  // issue 32 closes while both the older High and the older Medium are open:
  // one high_low event and one medium_low event, nothing else pairs
  snapshot.issues.push_back(make_issue(31, "2024-04-03T00:00:00Z", std::nullopt,
                                       Priority::High, IssueKind::Bug));
  snapshot.issues.push_back(make_issue(32, "2024-04-05T00:00:00Z",
                                       std::string("2024-04-07T12:00:00Z"),
                                       Priority::Low, IssueKind::Bug));
  snapshot.issues.push_back(make_issue(33, "2024-04-01T00:00:00Z",
                                       std::string("2024-04-09T00:00:00Z"),
                                       Priority::Medium, IssueKind::Feature));
  return snapshot;
}

}  // namespace

TEST_CASE("analyze_snapshot runs all measures") {
  const auto snapshot = sample_snapshot();
  const auto bundle = analyze_snapshot(snapshot);

  CHECK(bundle.repo == snapshot.repo);
  // default anchor: fetched_at truncated to its day
  CHECK(bundle.anchor == ts("2024-04-30T00:00:00Z"));
  CHECK(bundle.distribution.total == 5);
  CHECK(bundle.distribution.counts.at(ForkClass::Backup) == 1);
  CHECK(bundle.distribution.counts.at(ForkClass::Active) == 2);
  CHECK(bundle.distribution.counts.at(ForkClass::PotentiallyStale) == 1);
  CHECK(bundle.distribution.counts.at(ForkClass::Stale) == 1);
  CHECK(bundle.diversification.contributing == 1);  // amy via pull head
  CHECK(bundle.diversification.independent == 1);   // bob
  CHECK(bundle.pr_rejection.merged == 1);
  CHECK(bundle.pr_rejection.unmerged == 1);
  CHECK(bundle.backlog.high_low == 1);
  CHECK(bundle.backlog.high_medium == 0);
  CHECK(bundle.backlog.medium_low == 1);
  CHECK(bundle.backlog.total_closed_issues == 2);
  CHECK(bundle.ffr.size() == 8);
  CHECK(bundle.flows.size() == 60);
  CHECK(bundle.sprint_days == 14);
}

TEST_CASE("analyze_snapshot honours params") {
  const auto snapshot = sample_snapshot();
  AnalysisParams params;
  params.anchor = ts("2024-04-15T00:00:00Z");
  params.sprint_days = 7;
  params.sprint_count = 10;
  params.active_window_days = 6;

  const auto bundle = analyze_snapshot(snapshot, params);
  CHECK(bundle.anchor == *params.anchor);
  CHECK(bundle.flows.size() == 10);
  CHECK(bundle.flows.back().window_end == *params.anchor);
  // narrower window: only the 5-day fork stays active
  CHECK(bundle.distribution.counts.at(ForkClass::Active) == 1);

  AnalysisParams bad;
  bad.sprint_days = 0;
  CHECK_THROWS_AS(analyze_snapshot(snapshot, bad), ValidationError);
}

TEST_CASE("analyze_snapshot of an empty snapshot stays well formed") {
  const auto bundle = analyze_snapshot(make_snapshot());
  CHECK(bundle.distribution.total == 0);
  CHECK(bundle.backlog.degenerate_denominator);
  CHECK(bundle.backlog.bi_index == 0.0);
  REQUIRE(bundle.ffr.size() == 8);
  for (const auto& series : bundle.ffr) CHECK(series.points.empty());
  CHECK(bundle.flows.size() == 60);

  // renders as the degenerate row rather than crashing
  const auto row = summary_row(bundle);
  CHECK(row.stale_pct_text() == "0");
  CHECK(row.pdi_text() == "undefined");
  CHECK(row.ratio_text() == "undefined");
  CHECK(row.bi_text() == "0");
}

TEST_CASE("bundle json round-trips exactly") {
  const auto bundle = analyze_snapshot(sample_snapshot());
  const auto doc = bundle_to_json(bundle);
  const auto back = bundle_from_json(doc);
  CHECK(back == bundle);
  CHECK(doc["format_version"] == 1);
  CHECK(doc["fork_distribution"]["total"] == 5);
}

TEST_CASE("bundle files are byte-stable") {
  TempDir dir;
  const auto bundle = analyze_snapshot(sample_snapshot());
  save_bundle(bundle, dir.path() / "one.json");
  save_bundle(bundle, dir.path() / "two.json");
  CHECK(read_file(dir.path() / "one.json") == read_file(dir.path() / "two.json"));
  CHECK(load_bundle(dir.path() / "one.json") == bundle);
}

TEST_CASE("bundle parser rejects inconsistent counts") {
  auto doc = bundle_to_json(analyze_snapshot(sample_snapshot()));
  doc["fork_distribution"]["total"] = 99;  // no longer the sum of the counts
  CHECK_THROWS_AS(bundle_from_json(doc), ParseError);
}

TEST_CASE("summary row renders the measure texts") {
  WasteSummaryRow row;
  row.repo = RepoRef{"griseo", "radiance"};
  row.stale_plus_potentially_stale = 5597;
  row.fork_total = 147896;
  row.contributing = 23;
  row.independent = 1605;
  row.merged = 8712;
  row.unmerged = 6302;
  row.inversion_events = 0;
  row.closed_issues = 1600;

  CHECK(row.stale_pct_text() == "3.7844");
  CHECK(row.pdi_text() == "0.0143");
  CHECK(row.ratio_text() == "0.7233");
  CHECK(row.bi_text() == "0");

  row.independent = 0;
  CHECK(row.pdi_text() == "undefined");
  row.merged = 0;
  CHECK(row.ratio_text() == "undefined");
  row.closed_issues = 0;
  CHECK(row.bi_text() == "0");
  row.fork_total = 0;
  row.stale_plus_potentially_stale = 0;
  CHECK(row.stale_pct_text() == "0");

  row.inversion_events = 2;
  row.closed_issues = 4;
  CHECK(row.bi_text() == "0.1666");  // 2 / 12
}

TEST_CASE("summary table lines up and handles empty input") {
  const std::vector<AnalysisBundle> none;
  const auto empty = render_summary_table(none);
  CHECK(empty.find("repository") != std::string::npos);
  CHECK(empty.find("bi_index") != std::string::npos);
  CHECK(std::count(empty.begin(), empty.end(), '\n') == 1);  // headers only

  const std::vector<AnalysisBundle> one = {analyze_snapshot(sample_snapshot())};
  const auto table = render_summary_table(one);
  CHECK(table.find("acme/widget") != std::string::npos);
  CHECK(table.find("40.0000") != std::string::npos);  // 2 of 5 forks
  CHECK(table.find("1.0000") != std::string::npos);   // pdi and prr
  CHECK(table.find("0.3333") != std::string::npos);   // 2 events, 2 closed
}

TEST_CASE("csv exports carry the expected shapes") {
  const auto bundle = analyze_snapshot(sample_snapshot());
  const std::vector<AnalysisBundle> bundles = {bundle};

  const auto summary = summary_csv(bundles);
  CHECK(summary.rfind("repository,stale_potentially_stale_pct,pdi,"
                      "unmerged_merged_ratio,bi_index\n", 0) == 0);
  CHECK(summary.find("acme/widget,40.0000,1.0000,1.0000,0.3333\n") !=
        std::string::npos);

  const auto dist = fork_distribution_csv(bundle);
  CHECK(dist.rfind("class,count,pct\n", 0) == 0);
  CHECK(dist.find("backup,1,20.0000") != std::string::npos);
  CHECK(dist.find("stale,1,20.0000") != std::string::npos);

  CHECK(diversification_csv(bundle).find("1,1,1.0000") != std::string::npos);
  CHECK(prr_csv(bundle).find("1,1,1.0000") != std::string::npos);
  CHECK(bi_csv(bundle).find("1,0,1,2,0.3333") != std::string::npos);

  const auto ffr = ffr_csv(bundle);
  CHECK(ffr.rfind("bin,kind,age_days,count,normalized\n", 0) == 0);
  CHECK(ffr.find("0-5,bug,2,1,1.0000") != std::string::npos);
  CHECK(ffr.find("5-30,feature,8,1,1.0000") != std::string::npos);

  const auto flow = flow_csv(bundle);
  CHECK(flow.rfind("sprint_index,window_start,kind,inflow,spillover,outflow,ratio\n",
                   0) == 0);
  // one line per sprint and kind, plus the header
  CHECK(std::count(flow.begin(), flow.end(), '\n') == 121);
  CHECK(flow.find(",undefined") != std::string::npos);  // idle sprints
}

TEST_CASE("report json embeds round-trippable bundles") {
  const auto bundle = analyze_snapshot(sample_snapshot());
  const std::vector<AnalysisBundle> bundles = {bundle};
  const auto doc = report_json(bundles);

  CHECK(doc["format_version"] == 1);
  REQUIRE(doc["summary"].size() == 1);
  CHECK(doc["summary"][0]["repository"] == "acme/widget");
  CHECK(doc["summary"][0]["stale_potentially_stale_pct"] == "40.0000");
  CHECK(doc["summary"][0]["pdi"] == "1.0000");
  REQUIRE(doc["repos"].size() == 1);
  CHECK(bundle_from_json(doc["repos"][0]) == bundle);
}

TEST_CASE("svg charts are deterministic and well formed") {
  const auto bundle = analyze_snapshot(sample_snapshot());

  const auto ffr_svg = ffr_chart_svg(bundle, FfrBin::Days0To5);
  CHECK(ffr_svg.rfind("<svg xmlns=\"http://www.w3.org/2000/svg\"", 0) == 0);
  CHECK(ffr_svg.find("</svg>") != std::string::npos);
  CHECK(ffr_svg.find("#d62728") != std::string::npos);  // bug series
  CHECK(ffr_svg.find("#1f77b4") != std::string::npos);  // feature series
  CHECK(ffr_svg == ffr_chart_svg(bundle, FfrBin::Days0To5));

  const auto flow_svg = flow_chart_svg(bundle);
  CHECK(flow_svg.rfind("<svg xmlns=\"http://www.w3.org/2000/svg\"", 0) == 0);
  CHECK(flow_svg.find("</svg>") != std::string::npos);
  CHECK(flow_svg.find("stroke-dasharray") != std::string::npos);  // line at 1
  CHECK(flow_svg == flow_chart_svg(bundle));

  // empty data still renders a frame
  const auto empty_svg = ffr_chart_svg(analyze_snapshot(make_snapshot()),
                                       FfrBin::Days30To90);
  CHECK(empty_svg.rfind("<svg", 0) == 0);
  CHECK(empty_svg.find("</svg>") != std::string::npos);
}

TEST_CASE("threshold warnings fire only when configured and crossed") {
  const auto bundle = analyze_snapshot(sample_snapshot());

  CHECK(threshold_warnings(bundle, WarningThresholds{}).empty());

  WarningThresholds thresholds;
  thresholds.stale_pct_above = 10.0;  // bundle sits at 40%
  thresholds.pdi_below = 2.0;         // bundle pdi is 1.0
  thresholds.unmerged_merged_above = 5.0;  // not crossed at 1.0
  const auto warnings = threshold_warnings(bundle, thresholds);
  REQUIRE(warnings.size() == 2);
  CHECK(warnings[0].find("acme/widget") != std::string::npos);

  // undefined measures never trigger
  auto quiet = analyze_snapshot(make_snapshot());
  WarningThresholds all;
  all.stale_pct_above = 0.0;
  all.pdi_below = 99.0;
  all.unmerged_merged_above = 0.0;
  all.bi_index_above = 0.5;
  CHECK(threshold_warnings(quiet, all).empty());
}

TEST_CASE("run config loads every field and defaults the rest") {
  TempDir dir;
  const auto path = dir.path() / "config.json";

  SUBCASE("empty document keeps defaults") {
    write_file(path, "{}");
    const auto config = load_run_config(path);
    CHECK(config.repos.empty());
    CHECK(config.snapshot_dir == "snapshots");
    CHECK(config.out_dir == "reports");
    CHECK(config.sprint_days == 14);
    CHECK(config.sprint_count == 60);
    CHECK(config.active_window_days == 90);
    REQUIRE(config.output_formats.size() == 1);
    CHECK(config.output_formats[0] == OutputFormat::Table);
    CHECK(!config.anchor_date.has_value());
    CHECK(!config.thresholds.stale_pct_above.has_value());
  }
  SUBCASE("full document") {
    write_file(path, R"({
      "repos": ["acme/widget", "beta/gadget"],
      "snapshot_dir": "snaps",
      "out_dir": "out",
      "anchor_date": "2024-04-30",
      "sprint_days": 7,
      "sprint_count": 12,
      "active_window_days": 45,
      "output_formats": ["csv", "svg"],
      "allow_owners": ["acme"],
      "deny_owners": ["spam"],
      "thresholds": {"stale_pct_above": 12.5, "bi_index_above": 0.2},
      "label_mapping": {
        "priority_rules": [{"pattern": "urgent", "priority": "high"}],
        "kind_rules": [{"pattern": "defect", "kind": "bug"}]
      }
    })");
    const auto config = load_run_config(path);
    REQUIRE(config.repos.size() == 2);
    CHECK(config.repos[0].full_name() == "acme/widget");
    CHECK(config.snapshot_dir == "snaps");
    CHECK(config.anchor_date == ts("2024-04-30T00:00:00Z"));
    CHECK(config.sprint_days == 7);
    CHECK(config.output_formats ==
          std::vector{OutputFormat::Csv, OutputFormat::Svg});
    CHECK(config.thresholds.stale_pct_above == 12.5);
    CHECK(config.thresholds.bi_index_above == 0.2);
    CHECK(!config.thresholds.pdi_below.has_value());
    REQUIRE(config.label_mapping.priority_rules.size() == 1);
    CHECK(config.label_mapping.priority_rules[0].first == "urgent");
    CHECK(config.label_mapping.priority_rules[0].second == Priority::High);
    REQUIRE(config.label_mapping.kind_rules.size() == 1);
    CHECK(config.label_mapping.kind_rules[0].second == IssueKind::Bug);
  }
  SUBCASE("problems raise usage errors naming the field") {
    write_file(path, R"({"sprint_days": 0})");
    CHECK_THROWS_AS(load_run_config(path), UsageError);
    write_file(path, R"({"anchor_date": "April 30"})");
    CHECK_THROWS_AS(load_run_config(path), UsageError);
    write_file(path, R"({"repos": ["not-a-ref"]})");
    CHECK_THROWS_AS(load_run_config(path), UsageError);
    write_file(path, R"({"output_formats": ["pdf"]})");
    CHECK_THROWS_AS(load_run_config(path), UsageError);
    write_file(path, "[1,2,3]");
    CHECK_THROWS_AS(load_run_config(path), UsageError);
  }
}

TEST_CASE("format list parsing") {
  CHECK(parse_format_list("table") == std::vector{OutputFormat::Table});
  CHECK(parse_format_list("table,csv,json,svg") ==
        std::vector{OutputFormat::Table, OutputFormat::Csv, OutputFormat::Json,
                    OutputFormat::Svg});
  CHECK(parse_format_list("csv,csv") == std::vector{OutputFormat::Csv});
  CHECK_THROWS_AS(parse_format_list("yaml"), UsageError);
  CHECK_THROWS_AS(parse_format_list("table,,csv"), UsageError);
  CHECK_THROWS_AS(parse_format_list(""), UsageError);
}

TEST_CASE("run config validation") {
  RunConfig config;
  CHECK_NOTHROW(validate(config));
  config.sprint_count = 0;
  CHECK_THROWS_AS(validate(config), UsageError);
  config = RunConfig{};
  config.active_window_days = -1;
  CHECK_THROWS_AS(validate(config), UsageError);
  config = RunConfig{};
  config.output_formats.clear();
  CHECK_THROWS_AS(validate(config), UsageError);
}
