#include "waste_radar/commands.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "waste_radar/errors.hpp"
#include "waste_radar/render.hpp"

namespace waste_radar {
namespace {

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open for writing: " + path.string());
  }
  out << text;
  if (!out) {
    throw IoError("write failed: " + path.string());
  }
}

std::filesystem::path bundle_path(const RunConfig& config, const RepoRef& repo) {
  return config.out_dir / "analysis" / (repo.slug() + ".json");
}

/// Repo list to operate on: the configured one, or every snapshot present.
std::vector<RepoRef> snapshot_repos(const RunConfig& config) {
  if (!config.repos.empty()) {
    return config.repos;
  }
  std::vector<RepoRef> repos;
  if (!std::filesystem::is_directory(config.snapshot_dir)) {
    return repos;
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry :
       std::filesystem::directory_iterator(config.snapshot_dir)) {
    if (entry.path().extension() == ".json") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    const std::string stem = file.stem().string();
    const std::size_t sep = stem.find("__");
    if (sep == std::string::npos) {
      continue;
    }
    repos.push_back(RepoRef{stem.substr(0, sep), stem.substr(sep + 2)});
  }
  return repos;
}

}  // namespace

std::filesystem::path snapshot_path(const RunConfig& config, const RepoRef& repo) {
  return config.snapshot_dir / (repo.slug() + ".json");
}

FetchOutcome cmd_fetch(const FetchCommandOptions& options) {
  validate(options.config);
  if (options.config.repos.empty()) {
    throw UsageError("no repositories to fetch (set repos in config or --repo)");
  }
  std::filesystem::create_directories(options.config.snapshot_dir);

  FetchOutcome outcome;
  std::unique_ptr<HttpClient> owned;
  HttpClient* client = options.client_override;

  auto log = options.log;
  if (!log) {
    log = [](const std::string& line) { std::cerr << line << '\n'; };
  }

  for (const auto& repo : options.config.repos) {
    const std::filesystem::path path = snapshot_path(options.config, repo);
    if (!options.refresh && std::filesystem::exists(path)) {
      outcome.skipped.push_back(path);
      continue;
    }
    try {
      if (!client) {
        if (options.fixture_dir) {
          owned = std::make_unique<FixtureHttpClient>(*options.fixture_dir);
        } else {
          owned = make_live_client(options.auth);
        }
        client = owned.get();
      }
      FetchOptions fetch_options;
      fetch_options.limits = options.limits;
      fetch_options.fail_fast = options.fail_fast;
      fetch_options.concurrency = options.concurrency;
      fetch_options.label_mapping = options.config.label_mapping;
      fetch_options.log = log;
      const RepoSnapshot snapshot =
          fetch_repo_snapshot(*client, repo, fetch_options);
      save_snapshot(snapshot, path);
      outcome.written.push_back(path);
    } catch (const Error& err) {
      outcome.failures.push_back(repo.full_name() + ": " + err.what());
    }
  }
  return outcome;
}

AnalyzeOutcome cmd_analyze(const RunConfig& config, int jobs) {
  validate(config);
  const std::vector<RepoRef> repos = snapshot_repos(config);

  AnalysisParams params;
  params.sprint_days = config.sprint_days;
  params.sprint_count = config.sprint_count;
  params.active_window_days = config.active_window_days;
  params.anchor = config.anchor_date;

  AnalyzeOutcome outcome;
  outcome.bundles.resize(repos.size());
  outcome.bundle_paths.resize(repos.size());

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    for (;;) {
      const std::size_t index = next.fetch_add(1);
      if (index >= repos.size()) {
        return;
      }
      try {
        const RepoRef& repo = repos[index];
        const std::filesystem::path snap_path = snapshot_path(config, repo);
        if (!std::filesystem::exists(snap_path)) {
          throw IoError("missing snapshot for " + repo.full_name() + ": " +
                        snap_path.string() + " (run fetch first)");
        }
        const RepoSnapshot snapshot = load_snapshot(snap_path);
        outcome.bundles[index] = analyze_snapshot(snapshot, params);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) {
          error = std::current_exception();
        }
        next.store(repos.size());
        return;
      }
    }
  };

  const int workers = std::clamp<int>(jobs, 1, static_cast<int>(repos.size()));
  if (workers > 1) {
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(workers));
    for (int i = 0; i < workers; ++i) {
      threads.emplace_back(worker);
    }
    for (auto& thread : threads) {
      thread.join();
    }
  } else if (!repos.empty()) {
    worker();
  }
  if (error) {
    std::rethrow_exception(error);
  }

  std::filesystem::create_directories(config.out_dir / "analysis");
  for (std::size_t i = 0; i < repos.size(); ++i) {
    const std::filesystem::path path = bundle_path(config, repos[i]);
    save_bundle(outcome.bundles[i], path);
    outcome.bundle_paths[i] = path;
  }
  return outcome;
}

std::vector<AnalysisBundle> load_bundles(const RunConfig& config) {
  std::vector<AnalysisBundle> bundles;
  if (!config.repos.empty()) {
    for (const auto& repo : config.repos) {
      const std::filesystem::path path = bundle_path(config, repo);
      if (!std::filesystem::exists(path)) {
        throw IoError("missing analysis bundle for " + repo.full_name() + ": " +
                      path.string() + " (run analyze first)");
      }
      bundles.push_back(load_bundle(path));
    }
    return bundles;
  }
  const std::filesystem::path dir = config.out_dir / "analysis";
  if (!std::filesystem::is_directory(dir)) {
    return bundles;
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    bundles.push_back(load_bundle(file));
  }
  return bundles;
}

ReportOutcome cmd_report(std::span<const AnalysisBundle> bundles,
                         std::span<const OutputFormat> formats,
                         const std::filesystem::path& out_dir,
                         const WarningThresholds& thresholds) {
  if (formats.empty()) {
    throw UsageError("no output formats requested");
  }

  ReportOutcome outcome;
  for (const auto& bundle : bundles) {
    for (auto& warning : threshold_warnings(bundle, thresholds)) {
      outcome.warnings.push_back(std::move(warning));
    }
  }

  const bool wants_files =
      std::any_of(formats.begin(), formats.end(),
                  [](OutputFormat f) { return f != OutputFormat::Table; });
  if (wants_files) {
    std::filesystem::create_directories(out_dir);
  }

  for (OutputFormat format : formats) {
    switch (format) {
      case OutputFormat::Table:
        outcome.table = render_summary_table(bundles);
        break;
      case OutputFormat::Csv: {
        const std::filesystem::path summary_path = out_dir / "summary.csv";
        write_text_file(summary_path, summary_csv(bundles));
        outcome.files.push_back(summary_path);
        for (const auto& bundle : bundles) {
          const std::filesystem::path repo_dir = out_dir / bundle.repo.slug();
          std::filesystem::create_directories(repo_dir);
          const std::pair<const char*, std::string> tables[] = {
              {"fork_distribution.csv", fork_distribution_csv(bundle)},
              {"diversification.csv", diversification_csv(bundle)},
              {"prr.csv", prr_csv(bundle)},
              {"bi.csv", bi_csv(bundle)},
              {"ffr_bins.csv", ffr_csv(bundle)},
              {"flow.csv", flow_csv(bundle)},
          };
          for (const auto& [name, text] : tables) {
            const std::filesystem::path path = repo_dir / name;
            write_text_file(path, text);
            outcome.files.push_back(path);
          }
        }
        break;
      }
      case OutputFormat::Json: {
        const std::filesystem::path path = out_dir / "report.json";
        write_text_file(path, report_json(bundles).dump(2) + "\n");
        outcome.files.push_back(path);
        break;
      }
      case OutputFormat::Svg: {
        for (const auto& bundle : bundles) {
          const std::filesystem::path repo_dir = out_dir / bundle.repo.slug();
          std::filesystem::create_directories(repo_dir);
          for (FfrBin bin : kAllFfrBins) {
            const std::filesystem::path path =
                repo_dir / ("ffr_" + to_string(bin) + ".svg");
            write_text_file(path, ffr_chart_svg(bundle, bin));
            outcome.files.push_back(path);
          }
          const std::filesystem::path flow_path = repo_dir / "flow.svg";
          write_text_file(flow_path, flow_chart_svg(bundle));
          outcome.files.push_back(flow_path);
        }
        break;
      }
    }
  }
  return outcome;
}

}  // namespace waste_radar
