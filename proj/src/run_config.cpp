#include "waste_radar/run_config.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "waste_radar/errors.hpp"

namespace waste_radar {
namespace {

std::string expect_string(const nlohmann::json& value, const std::string& where) {
  if (!value.is_string()) {
    throw UsageError("config: " + where + " must be a string");
  }
  return value.get<std::string>();
}

int expect_int(const nlohmann::json& value, const std::string& where) {
  if (!value.is_number_integer()) {
    throw UsageError("config: " + where + " must be an integer");
  }
  return value.get<int>();
}

std::vector<std::string> expect_string_list(const nlohmann::json& value,
                                            const std::string& where) {
  if (!value.is_array()) {
    throw UsageError("config: " + where + " must be an array of strings");
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < value.size(); ++i) {
    out.push_back(expect_string(value[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

LabelMapping parse_label_mapping(const nlohmann::json& doc) {
  LabelMapping mapping;
  if (!doc.is_object()) {
    throw UsageError("config: label_mapping must be an object");
  }
  if (doc.contains("priority_rules")) {
    const auto& rules = doc["priority_rules"];
    if (!rules.is_array()) {
      throw UsageError("config: label_mapping.priority_rules must be an array");
    }
    for (std::size_t i = 0; i < rules.size(); ++i) {
      const std::string where =
          "label_mapping.priority_rules[" + std::to_string(i) + "]";
      if (!rules[i].is_object() || !rules[i].contains("pattern") ||
          !rules[i].contains("priority")) {
        throw UsageError("config: " + where +
                         " must be {\"pattern\": ..., \"priority\": ...}");
      }
      const std::string pattern = expect_string(rules[i]["pattern"], where);
      const std::string name = expect_string(rules[i]["priority"], where);
      const auto priority = priority_from_string(name);
      if (!priority) {
        throw UsageError("config: " + where + ": unknown priority \"" + name + "\"");
      }
      mapping.priority_rules.emplace_back(pattern, *priority);
    }
  }
  if (doc.contains("kind_rules")) {
    const auto& rules = doc["kind_rules"];
    if (!rules.is_array()) {
      throw UsageError("config: label_mapping.kind_rules must be an array");
    }
    for (std::size_t i = 0; i < rules.size(); ++i) {
      const std::string where =
          "label_mapping.kind_rules[" + std::to_string(i) + "]";
      if (!rules[i].is_object() || !rules[i].contains("pattern") ||
          !rules[i].contains("kind")) {
        throw UsageError("config: " + where +
                         " must be {\"pattern\": ..., \"kind\": ...}");
      }
      const std::string pattern = expect_string(rules[i]["pattern"], where);
      const std::string name = expect_string(rules[i]["kind"], where);
      const auto kind = kind_from_string(name);
      if (!kind) {
        throw UsageError("config: " + where + ": unknown kind \"" + name + "\"");
      }
      mapping.kind_rules.emplace_back(pattern, *kind);
    }
  }
  try {
    validate(mapping);
  } catch (const Error& err) {
    throw UsageError(std::string("config: label_mapping: ") + err.what());
  }
  return mapping;
}

std::optional<double> optional_threshold(const nlohmann::json& doc,
                                         const char* key) {
  if (!doc.contains(key) || doc[key].is_null()) {
    return std::nullopt;
  }
  if (!doc[key].is_number()) {
    throw UsageError(std::string("config: thresholds.") + key +
                     " must be a number");
  }
  return doc[key].get<double>();
}

}  // namespace

std::string to_string(OutputFormat format) {
  switch (format) {
    case OutputFormat::Table: return "table";
    case OutputFormat::Csv: return "csv";
    case OutputFormat::Json: return "json";
    case OutputFormat::Svg: return "svg";
  }
  return "table";
}

std::optional<OutputFormat> output_format_from_string(const std::string& s) {
  if (s == "table") return OutputFormat::Table;
  if (s == "csv") return OutputFormat::Csv;
  if (s == "json") return OutputFormat::Json;
  if (s == "svg") return OutputFormat::Svg;
  return std::nullopt;
}

std::vector<OutputFormat> parse_format_list(const std::string& spec) {
  std::vector<OutputFormat> formats;
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    const std::size_t comma = spec.find(',', pos);
    const std::string token =
        spec.substr(pos, comma == std::string::npos ? std::string::npos
                                                    : comma - pos);
    pos = comma == std::string::npos ? spec.size() + 1 : comma + 1;
    if (token.empty()) {
      throw UsageError("empty output format token in \"" + spec + "\"");
    }
    const auto format = output_format_from_string(token);
    if (!format) {
      throw UsageError("unsupported output format \"" + token +
                       "\" (expected table, csv, json, or svg)");
    }
    if (std::find(formats.begin(), formats.end(), *format) == formats.end()) {
      formats.push_back(*format);
    }
  }
  return formats;
}

void validate(const RunConfig& config) {
  if (config.sprint_days < 1) {
    throw UsageError("config: sprint_days must be >= 1");
  }
  if (config.sprint_count < 1) {
    throw UsageError("config: sprint_count must be >= 1");
  }
  if (config.active_window_days < 1) {
    throw UsageError("config: active_window_days must be >= 1");
  }
  if (config.output_formats.empty()) {
    throw UsageError("config: output_formats must not be empty");
  }
  try {
    validate(config.label_mapping);
  } catch (const Error& err) {
    throw UsageError(std::string("config: label_mapping: ") + err.what());
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw UsageError("cannot open config file: " + path.string());
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& err) {
    throw UsageError("config " + path.string() + ": " + err.what());
  }
  if (!doc.is_object()) {
    throw UsageError("config " + path.string() + ": expected a JSON object");
  }

  RunConfig config;
  if (doc.contains("repos")) {
    for (const auto& spec : expect_string_list(doc["repos"], "repos")) {
      try {
        config.repos.push_back(parse_repo_ref(spec));
      } catch (const Error& err) {
        throw UsageError(std::string("config: repos: ") + err.what());
      }
    }
  }
  if (doc.contains("snapshot_dir")) {
    config.snapshot_dir = expect_string(doc["snapshot_dir"], "snapshot_dir");
  }
  if (doc.contains("out_dir")) {
    config.out_dir = expect_string(doc["out_dir"], "out_dir");
  }
  if (doc.contains("label_mapping")) {
    config.label_mapping = parse_label_mapping(doc["label_mapping"]);
  }
  if (doc.contains("anchor_date") && !doc["anchor_date"].is_null()) {
    const std::string text = expect_string(doc["anchor_date"], "anchor_date");
    const auto parsed = try_parse_date(text);
    if (!parsed) {
      throw UsageError("config: anchor_date must be YYYY-MM-DD, got \"" + text +
                       "\"");
    }
    config.anchor_date = *parsed;
  }
  if (doc.contains("sprint_days")) {
    config.sprint_days = expect_int(doc["sprint_days"], "sprint_days");
  }
  if (doc.contains("sprint_count")) {
    config.sprint_count = expect_int(doc["sprint_count"], "sprint_count");
  }
  if (doc.contains("active_window_days")) {
    config.active_window_days =
        expect_int(doc["active_window_days"], "active_window_days");
  }
  if (doc.contains("output_formats")) {
    std::vector<OutputFormat> formats;
    for (const auto& token :
         expect_string_list(doc["output_formats"], "output_formats")) {
      const auto format = output_format_from_string(token);
      if (!format) {
        throw UsageError("config: output_formats: unsupported format \"" +
                         token + "\"");
      }
      if (std::find(formats.begin(), formats.end(), *format) == formats.end()) {
        formats.push_back(*format);
      }
    }
    config.output_formats = std::move(formats);
  }
  if (doc.contains("allow_owners")) {
    config.allow_owners = expect_string_list(doc["allow_owners"], "allow_owners");
  }
  if (doc.contains("deny_owners")) {
    config.deny_owners = expect_string_list(doc["deny_owners"], "deny_owners");
  }
  if (doc.contains("thresholds")) {
    const auto& thresholds = doc["thresholds"];
    if (!thresholds.is_object()) {
      throw UsageError("config: thresholds must be an object");
    }
    config.thresholds.stale_pct_above =
        optional_threshold(thresholds, "stale_pct_above");
    config.thresholds.pdi_below = optional_threshold(thresholds, "pdi_below");
    config.thresholds.unmerged_merged_above =
        optional_threshold(thresholds, "unmerged_merged_above");
    config.thresholds.bi_index_above =
        optional_threshold(thresholds, "bi_index_above");
  }

  validate(config);
  return config;
}

}  // namespace waste_radar
