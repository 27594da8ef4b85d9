#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "waste_radar/commands.hpp"
#include "waste_radar/errors.hpp"
#include "waste_radar/fork_analysis.hpp"
#include "waste_radar/render.hpp"

namespace {

using namespace waste_radar;

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> repos;
  std::string snapshot_dir;
  std::string out_dir;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON config file");
  cmd->add_option("--repo", args.repos,
                  "Repository as owner/name; overrides the config repo list");
  cmd->add_option("--snapshot-dir", args.snapshot_dir,
                  "Directory for snapshot JSON files");
  cmd->add_option("--out-dir", args.out_dir,
                  "Directory for analysis bundles and reports");
}

RunConfig resolve_config(const CommonArgs& args, const std::string& anchor_date) {
  RunConfig config;
  if (!args.config_path.empty()) {
    config = load_run_config(args.config_path);
  }
  if (!args.repos.empty()) {
    config.repos.clear();
    for (const auto& spec : args.repos) {
      try {
        config.repos.push_back(parse_repo_ref(spec));
      } catch (const Error& err) {
        throw UsageError(std::string("--repo: ") + err.what());
      }
    }
  }
  if (!args.snapshot_dir.empty()) {
    config.snapshot_dir = args.snapshot_dir;
  }
  if (!args.out_dir.empty()) {
    config.out_dir = args.out_dir;
  }
  if (!anchor_date.empty()) {
    const auto parsed = try_parse_date(anchor_date);
    if (!parsed) {
      throw UsageError("--anchor-date must be YYYY-MM-DD, got \"" + anchor_date +
                       "\"");
    }
    config.anchor_date = *parsed;
  }
  validate(config);
  return config;
}

std::string token_from_env() {
  const char* token = std::getenv("WASTE_RADAR_TOKEN");
  return token ? token : std::string();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Measures development waste in GitHub repositories: fork "
               "staleness, diversification, PR rejection, backlog inversion, "
               "and feature fulfillment."};
  app.require_subcommand(1);

  CommonArgs fetch_args;
  bool refresh = false;
  bool fail_fast = false;
  std::string fixture_dir;
  std::string token;
  int fetch_jobs = 4;
  std::int64_t max_forks = -1;
  std::int64_t max_pulls = -1;
  std::int64_t max_issues = -1;
  CLI::App* fetch_cmd =
      app.add_subcommand("fetch", "Snapshot repository metadata from GitHub");
  add_common(fetch_cmd, fetch_args);
  fetch_cmd->add_flag("--refresh", refresh, "Refetch repos with existing snapshots");
  fetch_cmd->add_option("--fixture-dir", fixture_dir,
                        "Replay canned HTTP responses from this directory");
  fetch_cmd->add_flag("--fail-fast", fail_fast,
                      "Abort on rate limit instead of sleeping until reset");
  fetch_cmd->add_option("--token", token,
                        "GitHub token (default: WASTE_RADAR_TOKEN env var)");
  fetch_cmd->add_option("--jobs", fetch_jobs, "Concurrent page fetches")
      ->check(CLI::PositiveNumber);
  fetch_cmd->add_option("--max-forks", max_forks, "Cap on fetched forks");
  fetch_cmd->add_option("--max-pulls", max_pulls, "Cap on fetched pulls, newest first");
  fetch_cmd->add_option("--max-issues", max_issues,
                        "Cap on fetched issue listing entries, newest first");

  CommonArgs analyze_args;
  std::string anchor_date;
  int analyze_jobs = 4;
  bool zhou_compare = false;
  CLI::App* analyze_cmd = app.add_subcommand(
      "analyze", "Compute the waste measures from local snapshots");
  add_common(analyze_cmd, analyze_args);
  analyze_cmd->add_option("--anchor-date", anchor_date,
                          "Sprint anchor, YYYY-MM-DD (default: snapshot "
                          "fetch day)");
  analyze_cmd->add_option("--jobs", analyze_jobs, "Parallel repo analyses")
      ->check(CLI::PositiveNumber);
  analyze_cmd->add_flag(
      "--zhou-compare", zhou_compare,
      "Also report how many forks the description+age rules would call "
      "independently developed");

  CommonArgs report_args;
  std::string format_spec;
  CLI::App* report_cmd = app.add_subcommand(
      "report", "Render tables, CSV, JSON, and SVG charts from bundles");
  add_common(report_cmd, report_args);
  report_cmd->add_option("--format", format_spec,
                         "Comma-separated: table,csv,json,svg");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*fetch_cmd) {
      FetchCommandOptions options;
      options.config = resolve_config(fetch_args, "");
      options.auth.token = token.empty() ? token_from_env() : token;
      options.refresh = refresh;
      options.fail_fast = fail_fast;
      if (!fixture_dir.empty()) {
        options.fixture_dir = fixture_dir;
      }
      if (max_forks >= 0) options.limits.max_forks = max_forks;
      if (max_pulls >= 0) options.limits.max_pulls = max_pulls;
      if (max_issues >= 0) options.limits.max_issues = max_issues;
      options.concurrency = fetch_jobs;
      const FetchOutcome outcome = cmd_fetch(options);
      for (const auto& path : outcome.written) {
        std::cout << path.string() << '\n';
      }
      for (const auto& path : outcome.skipped) {
        std::cout << path.string() << '\n';
      }
      for (const auto& failure : outcome.failures) {
        std::cerr << "error: " << failure << '\n';
      }
      return outcome.ok() ? 0 : 1;
    }

    if (*analyze_cmd) {
      const RunConfig config = resolve_config(analyze_args, anchor_date);
      const AnalyzeOutcome outcome = cmd_analyze(config, analyze_jobs);
      for (const auto& path : outcome.bundle_paths) {
        std::cout << path.string() << '\n';
      }
      if (zhou_compare) {
        for (const auto& bundle : outcome.bundles) {
          const RepoSnapshot snapshot =
              load_snapshot(snapshot_path(config, bundle.repo));
          const auto zhou = zhou_independent_forks(snapshot);
          std::cout << bundle.repo.full_name()
                    << ": independent_forks=" << bundle.diversification.independent
                    << " zhou_rule_matches=" << zhou.size() << '\n';
        }
      }
      return 0;
    }

    if (*report_cmd) {
      const RunConfig config = resolve_config(report_args, "");
      const std::vector<OutputFormat> formats =
          format_spec.empty() ? config.output_formats
                              : parse_format_list(format_spec);
      const std::vector<AnalysisBundle> bundles = load_bundles(config);
      const ReportOutcome outcome =
          cmd_report(bundles, formats, config.out_dir, config.thresholds);
      for (const auto& warning : outcome.warnings) {
        std::cerr << "warning: " << warning << '\n';
      }
      for (const auto& path : outcome.files) {
        std::cerr << "wrote " << path.string() << '\n';
      }
      if (!outcome.table.empty()) {
        std::cout << outcome.table;
      }
      return 0;
    }
  } catch (const UsageError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 2;
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }
  return 0;
}
