#include "waste_radar/render.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "waste_radar/numeric_format.hpp"

namespace waste_radar {
namespace {

constexpr const char* kBugColor = "#d62728";
constexpr const char* kFeatureColor = "#1f77b4";

std::string fmt2(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", value);
  return buf;
}

std::string xml_escape(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::int64_t class_count(const ForkDistribution& distribution, ForkClass cls) {
  const auto it = distribution.counts.find(cls);
  return it == distribution.counts.end() ? 0 : it->second;
}

std::string pct_text(std::int64_t count, std::int64_t total) {
  if (total <= 0) return "0";
  return format_measure(count * 100, total);
}

std::string flow_ratio_text(const SprintKindFlow& flow) {
  const std::int64_t denom = flow.inflow + flow.spillover;
  if (denom == 0) return "undefined";
  return format_measure(flow.outflow, denom);
}

struct ChartFrame {
  double width = 640;
  double height = 400;
  double left = 60;
  double right = 20;
  double top = 40;
  double bottom = 50;

  double plot_width() const { return width - left - right; }
  double plot_height() const { return height - top - bottom; }
  double x_base() const { return left; }
  double y_base() const { return height - bottom; }
};

void open_svg(std::string& svg, const ChartFrame& frame, const std::string& title) {
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         fmt2(frame.width) + "\" height=\"" + fmt2(frame.height) +
         "\" viewBox=\"0 0 " + fmt2(frame.width) + " " + fmt2(frame.height) +
         "\">\n";
  svg += "<rect width=\"" + fmt2(frame.width) + "\" height=\"" +
         fmt2(frame.height) + "\" fill=\"white\"/>\n";
  svg += "<text x=\"" + fmt2(frame.width / 2) +
         "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"14\">" +
         xml_escape(title) + "</text>\n";
  // axes
  svg += "<line x1=\"" + fmt2(frame.left) + "\" y1=\"" + fmt2(frame.top) +
         "\" x2=\"" + fmt2(frame.left) + "\" y2=\"" + fmt2(frame.y_base()) +
         "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + fmt2(frame.left) + "\" y1=\"" + fmt2(frame.y_base()) +
         "\" x2=\"" + fmt2(frame.width - frame.right) + "\" y2=\"" +
         fmt2(frame.y_base()) + "\" stroke=\"black\"/>\n";
}

void y_tick(std::string& svg, const ChartFrame& frame, double y_px,
            const std::string& label, bool gridline) {
  if (gridline) {
    svg += "<line x1=\"" + fmt2(frame.left) + "\" y1=\"" + fmt2(y_px) +
           "\" x2=\"" + fmt2(frame.width - frame.right) + "\" y2=\"" +
           fmt2(y_px) + "\" stroke=\"#dddddd\"/>\n";
  }
  svg += "<text x=\"" + fmt2(frame.left - 8) + "\" y=\"" + fmt2(y_px + 4) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
         label + "</text>\n";
}

void x_tick(std::string& svg, const ChartFrame& frame, double x_px,
            const std::string& label) {
  svg += "<line x1=\"" + fmt2(x_px) + "\" y1=\"" + fmt2(frame.y_base()) +
         "\" x2=\"" + fmt2(x_px) + "\" y2=\"" + fmt2(frame.y_base() + 5) +
         "\" stroke=\"black\"/>\n";
  svg += "<text x=\"" + fmt2(x_px) + "\" y=\"" + fmt2(frame.y_base() + 18) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
         label + "</text>\n";
}

void legend(std::string& svg, const ChartFrame& frame) {
  const double x = frame.width - frame.right - 130;
  const double y = frame.top + 8;
  svg += "<line x1=\"" + fmt2(x) + "\" y1=\"" + fmt2(y) + "\" x2=\"" +
         fmt2(x + 24) + "\" y2=\"" + fmt2(y) + "\" stroke=\"" + kBugColor +
         "\" stroke-width=\"2\"/>\n";
  svg += "<text x=\"" + fmt2(x + 30) + "\" y=\"" + fmt2(y + 4) +
         "\" font-family=\"sans-serif\" font-size=\"11\">bug</text>\n";
  svg += "<line x1=\"" + fmt2(x) + "\" y1=\"" + fmt2(y + 16) + "\" x2=\"" +
         fmt2(x + 24) + "\" y2=\"" + fmt2(y + 16) + "\" stroke=\"" +
         kFeatureColor + "\" stroke-width=\"2\"/>\n";
  svg += "<text x=\"" + fmt2(x + 30) + "\" y=\"" + fmt2(y + 20) +
         "\" font-family=\"sans-serif\" font-size=\"11\">feature</text>\n";
}

void polyline(std::string& svg, const std::vector<std::pair<double, double>>& pts,
              const char* color) {
  if (pts.size() >= 2) {
    std::string points;
    for (const auto& [x, y] : pts) {
      if (!points.empty()) points += ' ';
      points += fmt2(x) + "," + fmt2(y);
    }
    svg += "<polyline points=\"" + points + "\" fill=\"none\" stroke=\"" +
           color + "\" stroke-width=\"1.5\"/>\n";
  }
  for (const auto& [x, y] : pts) {
    svg += "<circle cx=\"" + fmt2(x) + "\" cy=\"" + fmt2(y) +
           "\" r=\"2.5\" fill=\"" + std::string(color) + "\"/>\n";
  }
}

}  // namespace

std::string WasteSummaryRow::stale_pct_text() const {
  return pct_text(stale_plus_potentially_stale, fork_total);
}

std::string WasteSummaryRow::pdi_text() const {
  if (independent == 0) return "undefined";
  return format_measure(contributing, independent);
}

std::string WasteSummaryRow::ratio_text() const {
  if (merged == 0) return "undefined";
  return format_measure(unmerged, merged);
}

std::string WasteSummaryRow::bi_text() const {
  if (closed_issues == 0) return "0";
  return format_measure(inversion_events, 3 * closed_issues);
}

WasteSummaryRow summary_row(const AnalysisBundle& bundle) {
  WasteSummaryRow row;
  row.repo = bundle.repo;
  row.stale_plus_potentially_stale =
      class_count(bundle.distribution, ForkClass::PotentiallyStale) +
      class_count(bundle.distribution, ForkClass::Stale);
  row.fork_total = bundle.distribution.total;
  row.contributing = bundle.diversification.contributing;
  row.independent = bundle.diversification.independent;
  row.merged = bundle.pr_rejection.merged;
  row.unmerged = bundle.pr_rejection.unmerged;
  row.inversion_events = bundle.backlog.events();
  row.closed_issues = bundle.backlog.total_closed_issues;
  return row;
}

std::string render_summary_table(std::span<const AnalysisBundle> bundles) {
  const std::array<std::string, 5> headers = {"repository",
                                              "stale_potentially_stale_pct",
                                              "pdi",
                                              "unmerged_merged_ratio",
                                              "bi_index"};
  std::vector<std::array<std::string, 5>> rows;
  rows.reserve(bundles.size());
  for (const auto& bundle : bundles) {
    const WasteSummaryRow row = summary_row(bundle);
    rows.push_back({row.repo.full_name(), row.stale_pct_text(), row.pdi_text(),
                    row.ratio_text(), row.bi_text()});
  }

  std::array<std::size_t, 5> widths{};
  for (std::size_t c = 0; c < headers.size(); ++c) {
    widths[c] = headers[c].size();
    for (const auto& row : rows) {
      widths[c] = std::max(widths[c], row[c].size());
    }
  }

  auto emit = [&widths](const std::array<std::string, 5>& cells) {
    std::string line;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      line += cells[c];
      if (c + 1 < cells.size()) {
        line.append(widths[c] - cells[c].size() + 2, ' ');
      }
    }
    line += '\n';
    return line;
  };

  std::string out = emit(headers);
  for (const auto& row : rows) {
    out += emit(row);
  }
  return out;
}

std::string summary_csv(std::span<const AnalysisBundle> bundles) {
  std::string out =
      "repository,stale_potentially_stale_pct,pdi,unmerged_merged_ratio,bi_index\n";
  for (const auto& bundle : bundles) {
    const WasteSummaryRow row = summary_row(bundle);
    out += row.repo.full_name() + "," + row.stale_pct_text() + "," +
           row.pdi_text() + "," + row.ratio_text() + "," + row.bi_text() + "\n";
  }
  return out;
}

std::string fork_distribution_csv(const AnalysisBundle& bundle) {
  std::string out = "class,count,pct\n";
  for (ForkClass cls : {ForkClass::Active, ForkClass::Backup,
                        ForkClass::PotentiallyStale, ForkClass::Stale}) {
    const std::int64_t count = class_count(bundle.distribution, cls);
    out += to_string(cls) + "," + std::to_string(count) + "," +
           pct_text(count, bundle.distribution.total) + "\n";
  }
  return out;
}

std::string diversification_csv(const AnalysisBundle& bundle) {
  const WasteSummaryRow row = summary_row(bundle);
  return "contributing,independent,pdi\n" +
         std::to_string(row.contributing) + "," +
         std::to_string(row.independent) + "," + row.pdi_text() + "\n";
}

std::string prr_csv(const AnalysisBundle& bundle) {
  const WasteSummaryRow row = summary_row(bundle);
  return "merged,unmerged,ratio\n" + std::to_string(row.merged) + "," +
         std::to_string(row.unmerged) + "," + row.ratio_text() + "\n";
}

std::string bi_csv(const AnalysisBundle& bundle) {
  const auto& backlog = bundle.backlog;
  const WasteSummaryRow row = summary_row(bundle);
  return "high_low,high_medium,medium_low,closed_issues,bi_index\n" +
         std::to_string(backlog.high_low) + "," +
         std::to_string(backlog.high_medium) + "," +
         std::to_string(backlog.medium_low) + "," +
         std::to_string(backlog.total_closed_issues) + "," + row.bi_text() +
         "\n";
}

std::string ffr_csv(const AnalysisBundle& bundle) {
  std::string out = "bin,kind,age_days,count,normalized\n";
  for (const auto& series : bundle.ffr) {
    for (const auto& point : series.points) {
      out += to_string(series.bin) + "," + to_string(series.kind) + "," +
             std::to_string(point.age_days) + "," +
             std::to_string(point.count) + "," +
             format_measure(point.count, series.total) + "\n";
    }
  }
  return out;
}

std::string flow_csv(const AnalysisBundle& bundle) {
  std::string out =
      "sprint_index,window_start,kind,inflow,spillover,outflow,ratio\n";
  for (const auto& flow : bundle.flows) {
    const std::array<std::pair<const char*, const SprintKindFlow*>, 2> kinds = {
        std::pair<const char*, const SprintKindFlow*>{"bug", &flow.bug},
        std::pair<const char*, const SprintKindFlow*>{"feature", &flow.feature}};
    for (const auto& [label, kind_flow] : kinds) {
      out += std::to_string(flow.sprint_index) + "," +
             format_rfc3339(flow.window_start) + "," + label + "," +
             std::to_string(kind_flow->inflow) + "," +
             std::to_string(kind_flow->spillover) + "," +
             std::to_string(kind_flow->outflow) + "," +
             flow_ratio_text(*kind_flow) + "\n";
    }
  }
  return out;
}

nlohmann::ordered_json report_json(std::span<const AnalysisBundle> bundles) {
  nlohmann::ordered_json doc;
  doc["format_version"] = 1;
  nlohmann::ordered_json summary = nlohmann::ordered_json::array();
  for (const auto& bundle : bundles) {
    const WasteSummaryRow row = summary_row(bundle);
    summary.push_back({{"repository", row.repo.full_name()},
                       {"stale_potentially_stale_pct", row.stale_pct_text()},
                       {"pdi", row.pdi_text()},
                       {"unmerged_merged_ratio", row.ratio_text()},
                       {"bi_index", row.bi_text()}});
  }
  doc["summary"] = std::move(summary);
  nlohmann::ordered_json repos = nlohmann::ordered_json::array();
  for (const auto& bundle : bundles) {
    repos.push_back(bundle_to_json(bundle));
  }
  doc["repos"] = std::move(repos);
  return doc;
}

std::string ffr_chart_svg(const AnalysisBundle& bundle, FfrBin bin) {
  const ChartFrame frame;
  const auto [lo, hi] = ffr_bin_edges(bin);
  const double x_min = lo;
  const double x_max = hi - 1;
  const double span = std::max(x_max - x_min, 1.0);

  auto x_px = [&](double age) {
    return frame.x_base() + (age - x_min) / span * frame.plot_width();
  };
  auto y_px = [&](double value) {
    return frame.top + (1.0 - value) * frame.plot_height();
  };

  std::string svg;
  open_svg(svg, frame,
           bundle.repo.full_name() + " closure-age profile, " + to_string(bin) +
               " days");
  for (double tick : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    y_tick(svg, frame, y_px(tick), fmt2(tick), tick > 0.0);
  }
  const int mid = (lo + (hi - 1)) / 2;
  x_tick(svg, frame, x_px(lo), std::to_string(lo));
  if (mid != lo && mid != hi - 1) {
    x_tick(svg, frame, x_px(mid), std::to_string(mid));
  }
  x_tick(svg, frame, x_px(hi - 1), std::to_string(hi - 1));
  svg += "<text x=\"" + fmt2(frame.width / 2) + "\" y=\"" +
         fmt2(frame.height - 10) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\">closure age (days)</text>\n";

  for (IssueKind kind : {IssueKind::Bug, IssueKind::Feature}) {
    const char* color = kind == IssueKind::Bug ? kBugColor : kFeatureColor;
    for (const auto& series : bundle.ffr) {
      if (series.bin != bin || series.kind != kind) continue;
      std::vector<std::pair<double, double>> pts;
      pts.reserve(series.points.size());
      for (const auto& point : series.points) {
        pts.emplace_back(x_px(point.age_days), y_px(point.normalized));
      }
      polyline(svg, pts, color);
    }
  }
  legend(svg, frame);
  svg += "</svg>\n";
  return svg;
}

std::string flow_chart_svg(const AnalysisBundle& bundle) {
  const ChartFrame frame;
  const std::size_t count = bundle.flows.size();
  const double x_span = count > 1 ? static_cast<double>(count - 1) : 1.0;

  double y_max = 2.0;
  for (const auto& flow : bundle.flows) {
    for (const SprintKindFlow* kind_flow : {&flow.bug, &flow.feature}) {
      if (const auto ratio = kind_flow->ratio()) {
        y_max = std::max(y_max, *ratio);
      }
    }
  }
  y_max = std::ceil(y_max);

  auto x_px = [&](double index) {
    return frame.x_base() + index / x_span * frame.plot_width();
  };
  auto y_px = [&](double value) {
    return frame.top + (1.0 - value / y_max) * frame.plot_height();
  };

  std::string svg;
  open_svg(svg, frame, bundle.repo.full_name() + " sprint inflow-outflow ratio");
  y_tick(svg, frame, y_px(0.0), "0", false);
  y_tick(svg, frame, y_px(y_max), fmt2(y_max), true);
  y_tick(svg, frame, y_px(1.0), "1", false);
  // balance reference: outflow equals inflow + spillover
  svg += "<line x1=\"" + fmt2(frame.left) + "\" y1=\"" + fmt2(y_px(1.0)) +
         "\" x2=\"" + fmt2(frame.width - frame.right) + "\" y2=\"" +
         fmt2(y_px(1.0)) + "\" stroke=\"#888888\" stroke-dasharray=\"4 3\"/>\n";

  if (count > 0) {
    x_tick(svg, frame, x_px(0), "0");
    const std::size_t mid = (count - 1) / 2;
    if (mid != 0 && mid != count - 1) {
      x_tick(svg, frame, x_px(static_cast<double>(mid)), std::to_string(mid));
    }
    if (count > 1) {
      x_tick(svg, frame, x_px(static_cast<double>(count - 1)),
             std::to_string(count - 1));
    }
  }
  svg += "<text x=\"" + fmt2(frame.width / 2) + "\" y=\"" +
         fmt2(frame.height - 10) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\">sprint</text>\n";

  for (IssueKind kind : {IssueKind::Bug, IssueKind::Feature}) {
    const char* color = kind == IssueKind::Bug ? kBugColor : kFeatureColor;
    std::vector<std::pair<double, double>> segment;
    for (const auto& flow : bundle.flows) {
      const SprintKindFlow& kind_flow =
          kind == IssueKind::Bug ? flow.bug : flow.feature;
      if (const auto ratio = kind_flow.ratio()) {
        segment.emplace_back(x_px(flow.sprint_index), y_px(*ratio));
      } else if (!segment.empty()) {
        polyline(svg, segment, color);  // gap in the series breaks the line
        segment.clear();
      }
    }
    if (!segment.empty()) {
      polyline(svg, segment, color);
    }
  }
  legend(svg, frame);
  svg += "</svg>\n";
  return svg;
}

std::vector<std::string> threshold_warnings(const AnalysisBundle& bundle,
                                            const WarningThresholds& thresholds) {
  std::vector<std::string> warnings;
  const WasteSummaryRow row = summary_row(bundle);
  const std::string repo = bundle.repo.full_name();

  if (thresholds.stale_pct_above && row.fork_total > 0) {
    const double pct = 100.0 * static_cast<double>(row.stale_plus_potentially_stale) /
                       static_cast<double>(row.fork_total);
    if (pct > *thresholds.stale_pct_above) {
      warnings.push_back(repo + ": stale+potentially-stale forks at " +
                         row.stale_pct_text() + "% exceed threshold " +
                         fmt2(*thresholds.stale_pct_above));
    }
  }
  if (thresholds.pdi_below) {
    if (const auto pdi = bundle.diversification.pdi();
        pdi && *pdi < *thresholds.pdi_below) {
      warnings.push_back(repo + ": PDI " + row.pdi_text() +
                         " falls below threshold " + fmt2(*thresholds.pdi_below));
    }
  }
  if (thresholds.unmerged_merged_above) {
    if (const auto ratio = bundle.pr_rejection.ratio();
        ratio && *ratio > *thresholds.unmerged_merged_above) {
      warnings.push_back(repo + ": unmerged/merged ratio " + row.ratio_text() +
                         " exceeds threshold " +
                         fmt2(*thresholds.unmerged_merged_above));
    }
  }
  if (thresholds.bi_index_above &&
      bundle.backlog.bi_index > *thresholds.bi_index_above) {
    warnings.push_back(repo + ": backlog inversion index " + row.bi_text() +
                       " exceeds threshold " + fmt2(*thresholds.bi_index_above));
  }
  return warnings;
}

}  // namespace waste_radar
