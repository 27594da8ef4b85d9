#include "waste_radar/analysis_bundle.hpp"

#include <fstream>
#include <sstream>

#include "waste_radar/errors.hpp"

namespace waste_radar {
namespace {

const nlohmann::json& require(const nlohmann::json& obj, const std::string& key,
                              const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    throw ParseError(where + ": missing field \"" + key + "\"");
  }
  return *it;
}

std::int64_t get_int(const nlohmann::json& obj, const std::string& key,
                     const std::string& where) {
  const auto& value = require(obj, key, where);
  if (!value.is_number_integer()) {
    throw ParseError(where + "." + key + ": expected an integer");
  }
  return value.get<std::int64_t>();
}

std::string get_string(const nlohmann::json& obj, const std::string& key,
                       const std::string& where) {
  const auto& value = require(obj, key, where);
  if (!value.is_string()) {
    throw ParseError(where + "." + key + ": expected a string");
  }
  return value.get<std::string>();
}

Timestamp get_time(const nlohmann::json& obj, const std::string& key,
                   const std::string& where) {
  return parse_rfc3339(get_string(obj, key, where), where + "." + key);
}

nlohmann::ordered_json kind_flow_to_json(const SprintKindFlow& flow) {
  nlohmann::ordered_json doc;
  doc["inflow"] = flow.inflow;
  doc["spillover"] = flow.spillover;
  doc["outflow"] = flow.outflow;
  if (const auto ratio = flow.ratio()) {
    doc["ratio"] = *ratio;
  } else {
    doc["ratio"] = nullptr;
  }
  return doc;
}

SprintKindFlow kind_flow_from_json(const nlohmann::json& doc,
                                   const std::string& where) {
  SprintKindFlow flow;
  flow.inflow = get_int(doc, "inflow", where);
  flow.spillover = get_int(doc, "spillover", where);
  flow.outflow = get_int(doc, "outflow", where);
  return flow;  // ratio is derived, never read back
}

}  // namespace

void validate(const AnalysisParams& params) {
  if (params.sprint_days < 1) {
    throw ValidationError("sprint_days must be >= 1");
  }
  if (params.sprint_count < 1) {
    throw ValidationError("sprint_count must be >= 1");
  }
  if (params.active_window_days < 1) {
    throw ValidationError("active_window_days must be >= 1");
  }
}

AnalysisBundle analyze_snapshot(const RepoSnapshot& snapshot,
                                const AnalysisParams& params) {
  validate(params);
  AnalysisBundle bundle;
  bundle.repo = snapshot.repo;
  bundle.anchor =
      params.anchor ? *params.anchor : truncate_to_day(snapshot.fetched_at);
  bundle.sprint_days = params.sprint_days;
  bundle.sprint_count = params.sprint_count;
  bundle.active_window_days = params.active_window_days;

  ForkClassifyOptions fork_options;
  fork_options.active_window_days = params.active_window_days;
  const ForkClassification classification =
      classify_forks(snapshot, fork_options);
  bundle.distribution = classification.distribution;

  std::vector<ForkRecord> active_forks;
  for (const auto& fork : snapshot.forks) {
    if (classification.per_fork.at(fork.full_name).cls == ForkClass::Active) {
      active_forks.push_back(fork);
    }
  }
  bundle.diversification = split_contribution(snapshot, active_forks);
  bundle.pr_rejection = pr_rejection_rate(snapshot.pulls);
  bundle.backlog = backlog_inversion(snapshot.issues);
  bundle.ffr = ffr_bins(snapshot.issues);
  bundle.flows = inflow_outflow(snapshot.issues, bundle.anchor,
                                params.sprint_days, params.sprint_count);
  return bundle;
}

nlohmann::ordered_json bundle_to_json(const AnalysisBundle& bundle) {
  nlohmann::ordered_json doc;
  doc["format_version"] = 1;
  doc["repo"] = {{"owner", bundle.repo.owner}, {"name", bundle.repo.name}};
  doc["anchor"] = format_rfc3339(bundle.anchor);
  doc["params"] = {{"sprint_days", bundle.sprint_days},
                   {"sprint_count", bundle.sprint_count},
                   {"active_window_days", bundle.active_window_days}};

  nlohmann::ordered_json distribution;
  distribution["total"] = bundle.distribution.total;
  nlohmann::ordered_json counts;
  for (ForkClass cls : {ForkClass::Active, ForkClass::Backup,
                        ForkClass::PotentiallyStale, ForkClass::Stale}) {
    const auto it = bundle.distribution.counts.find(cls);
    counts[to_string(cls)] = it == bundle.distribution.counts.end() ? 0 : it->second;
  }
  distribution["counts"] = std::move(counts);
  doc["fork_distribution"] = std::move(distribution);

  doc["diversification"] = {{"contributing", bundle.diversification.contributing},
                            {"independent", bundle.diversification.independent}};
  doc["pr_rejection"] = {{"merged", bundle.pr_rejection.merged},
                         {"unmerged", bundle.pr_rejection.unmerged}};
  doc["backlog_inversion"] = {
      {"high_low", bundle.backlog.high_low},
      {"high_medium", bundle.backlog.high_medium},
      {"medium_low", bundle.backlog.medium_low},
      {"total_closed_issues", bundle.backlog.total_closed_issues}};

  nlohmann::ordered_json ffr = nlohmann::ordered_json::array();
  for (const auto& series : bundle.ffr) {
    nlohmann::ordered_json entry;
    entry["bin"] = to_string(series.bin);
    entry["kind"] = to_string(series.kind);
    entry["total"] = series.total;
    nlohmann::ordered_json points = nlohmann::ordered_json::array();
    for (const auto& point : series.points) {
      points.push_back({{"age_days", point.age_days},
                        {"count", point.count},
                        {"normalized", point.normalized}});
    }
    entry["points"] = std::move(points);
    ffr.push_back(std::move(entry));
  }
  doc["ffr"] = std::move(ffr);

  nlohmann::ordered_json flows = nlohmann::ordered_json::array();
  for (const auto& flow : bundle.flows) {
    nlohmann::ordered_json entry;
    entry["sprint_index"] = flow.sprint_index;
    entry["window_start"] = format_rfc3339(flow.window_start);
    entry["window_end"] = format_rfc3339(flow.window_end);
    entry["bug"] = kind_flow_to_json(flow.bug);
    entry["feature"] = kind_flow_to_json(flow.feature);
    flows.push_back(std::move(entry));
  }
  doc["flows"] = std::move(flows);
  return doc;
}

AnalysisBundle bundle_from_json(const nlohmann::json& doc) {
  const std::string where = "bundle";
  if (!doc.is_object()) {
    throw ParseError(where + ": expected a JSON object");
  }
  const std::int64_t version = get_int(doc, "format_version", where);
  if (version != 1) {
    throw ParseError(where + ": unsupported format_version " +
                     std::to_string(version));
  }

  AnalysisBundle bundle;
  const auto& repo = require(doc, "repo", where);
  bundle.repo.owner = get_string(repo, "owner", where + ".repo");
  bundle.repo.name = get_string(repo, "name", where + ".repo");
  bundle.anchor = get_time(doc, "anchor", where);

  const auto& params = require(doc, "params", where);
  bundle.sprint_days =
      static_cast<int>(get_int(params, "sprint_days", where + ".params"));
  bundle.sprint_count =
      static_cast<int>(get_int(params, "sprint_count", where + ".params"));
  bundle.active_window_days = static_cast<int>(
      get_int(params, "active_window_days", where + ".params"));

  const auto& distribution = require(doc, "fork_distribution", where);
  const auto& counts =
      require(distribution, "counts", where + ".fork_distribution");
  bundle.distribution = make_fork_distribution(
      get_int(counts, "active", where + ".fork_distribution.counts"),
      get_int(counts, "backup", where + ".fork_distribution.counts"),
      get_int(counts, "potentially_stale", where + ".fork_distribution.counts"),
      get_int(counts, "stale", where + ".fork_distribution.counts"));
  const std::int64_t declared_total =
      get_int(distribution, "total", where + ".fork_distribution");
  if (declared_total != bundle.distribution.total) {
    throw ParseError(where + ".fork_distribution.total: declared " +
                     std::to_string(declared_total) + " but counts sum to " +
                     std::to_string(bundle.distribution.total));
  }

  const auto& diversification = require(doc, "diversification", where);
  bundle.diversification.contributing =
      get_int(diversification, "contributing", where + ".diversification");
  bundle.diversification.independent =
      get_int(diversification, "independent", where + ".diversification");

  const auto& rejection = require(doc, "pr_rejection", where);
  bundle.pr_rejection.merged = get_int(rejection, "merged", where + ".pr_rejection");
  bundle.pr_rejection.unmerged =
      get_int(rejection, "unmerged", where + ".pr_rejection");

  const auto& backlog = require(doc, "backlog_inversion", where);
  const std::string backlog_where = where + ".backlog_inversion";
  bundle.backlog.high_low = get_int(backlog, "high_low", backlog_where);
  bundle.backlog.high_medium = get_int(backlog, "high_medium", backlog_where);
  bundle.backlog.medium_low = get_int(backlog, "medium_low", backlog_where);
  bundle.backlog.total_closed_issues =
      get_int(backlog, "total_closed_issues", backlog_where);
  if (bundle.backlog.total_closed_issues > 0) {
    bundle.backlog.bi_index =
        static_cast<double>(bundle.backlog.events()) /
        (3.0 * static_cast<double>(bundle.backlog.total_closed_issues));
  } else {
    bundle.backlog.bi_index = 0.0;
    bundle.backlog.degenerate_denominator = true;
  }

  const auto& ffr = require(doc, "ffr", where);
  if (!ffr.is_array()) {
    throw ParseError(where + ".ffr: expected an array");
  }
  for (std::size_t i = 0; i < ffr.size(); ++i) {
    const std::string series_where = where + ".ffr[" + std::to_string(i) + "]";
    const auto& entry = ffr[i];
    FfrBinSeries series;
    const std::string bin_label = get_string(entry, "bin", series_where);
    const auto bin = ffr_bin_from_string(bin_label);
    if (!bin) {
      throw ParseError(series_where + ".bin: unknown bin \"" + bin_label + "\"");
    }
    series.bin = *bin;
    const std::string kind_label = get_string(entry, "kind", series_where);
    const auto kind = kind_from_string(kind_label);
    if (!kind) {
      throw ParseError(series_where + ".kind: unknown kind \"" + kind_label + "\"");
    }
    series.kind = *kind;
    series.total = get_int(entry, "total", series_where);
    const auto& points = require(entry, "points", series_where);
    if (!points.is_array()) {
      throw ParseError(series_where + ".points: expected an array");
    }
    for (std::size_t j = 0; j < points.size(); ++j) {
      const std::string point_where =
          series_where + ".points[" + std::to_string(j) + "]";
      FfrPoint point;
      point.age_days =
          static_cast<int>(get_int(points[j], "age_days", point_where));
      point.count = get_int(points[j], "count", point_where);
      if (series.total <= 0) {
        throw ParseError(point_where + ": points present but total is 0");
      }
      point.normalized = static_cast<double>(point.count) /
                         static_cast<double>(series.total);
      series.points.push_back(point);
    }
    bundle.ffr.push_back(std::move(series));
  }

  const auto& flows = require(doc, "flows", where);
  if (!flows.is_array()) {
    throw ParseError(where + ".flows: expected an array");
  }
  for (std::size_t i = 0; i < flows.size(); ++i) {
    const std::string flow_where = where + ".flows[" + std::to_string(i) + "]";
    const auto& entry = flows[i];
    SprintFlow flow;
    flow.sprint_index =
        static_cast<int>(get_int(entry, "sprint_index", flow_where));
    flow.window_start = get_time(entry, "window_start", flow_where);
    flow.window_end = get_time(entry, "window_end", flow_where);
    flow.bug = kind_flow_from_json(require(entry, "bug", flow_where),
                                   flow_where + ".bug");
    flow.feature = kind_flow_from_json(require(entry, "feature", flow_where),
                                       flow_where + ".feature");
    bundle.flows.push_back(flow);
  }
  return bundle;
}

void save_bundle(const AnalysisBundle& bundle, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open for writing: " + path.string());
  }
  out << bundle_to_json(bundle).dump(2) << '\n';
  if (!out) {
    throw IoError("write failed: " + path.string());
  }
}

AnalysisBundle load_bundle(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open for reading: " + path.string());
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& err) {
    throw ParseError(path.string() + ": " + err.what());
  }
  return bundle_from_json(doc);
}

}  // namespace waste_radar
