#include "waste_radar/snapshot.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "waste_radar/errors.hpp"

namespace waste_radar {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool contains_ci(const std::string& haystack, const std::string& needle_lower) {
  return lower(haystack).find(needle_lower) != std::string::npos;
}

// --- JSON access helpers; every failure names the field path. ---

const ordered_json& require(const ordered_json& obj, const std::string& key,
                            const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(path + "." + key + ": missing");
  return *it;
}

std::string get_string(const ordered_json& obj, const std::string& key,
                       const std::string& path) {
  const auto& v = require(obj, key, path);
  if (!v.is_string()) throw ParseError(path + "." + key + ": expected string");
  return v.get<std::string>();
}

std::int64_t get_int(const ordered_json& obj, const std::string& key,
                     const std::string& path) {
  const auto& v = require(obj, key, path);
  if (!v.is_number_integer()) throw ParseError(path + "." + key + ": expected integer");
  return v.get<std::int64_t>();
}

bool get_bool(const ordered_json& obj, const std::string& key, const std::string& path) {
  const auto& v = require(obj, key, path);
  if (!v.is_boolean()) throw ParseError(path + "." + key + ": expected boolean");
  return v.get<bool>();
}

Timestamp get_time(const ordered_json& obj, const std::string& key,
                   const std::string& path) {
  return parse_rfc3339(get_string(obj, key, path), path + "." + key);
}

std::optional<Timestamp> get_opt_time(const ordered_json& obj, const std::string& key,
                                      const std::string& path) {
  const auto& v = require(obj, key, path);
  if (v.is_null()) return std::nullopt;
  if (!v.is_string()) throw ParseError(path + "." + key + ": expected string or null");
  return parse_rfc3339(v.get<std::string>(), path + "." + key);
}

ordered_json time_json(Timestamp ts) { return format_rfc3339(ts); }

ordered_json opt_time_json(const std::optional<Timestamp>& ts) {
  if (!ts) return nullptr;
  return format_rfc3339(*ts);
}

}  // namespace

RepoRef parse_repo_ref(const std::string& spec) {
  const auto slash = spec.find('/');
  if (slash == std::string::npos || slash == 0 || slash + 1 == spec.size() ||
      spec.find('/', slash + 1) != std::string::npos) {
    throw ValidationError("repo: expected 'owner/name', got '" + spec + "'");
  }
  return RepoRef{spec.substr(0, slash), spec.substr(slash + 1)};
}

std::string to_string(Priority p) {
  switch (p) {
    case Priority::High: return "high";
    case Priority::Medium: return "medium";
    case Priority::Low: return "low";
    case Priority::Unspecified: return "unspecified";
  }
  return "unspecified";
}

std::string to_string(IssueKind k) {
  switch (k) {
    case IssueKind::Bug: return "bug";
    case IssueKind::Feature: return "feature";
    case IssueKind::Other: return "other";
  }
  return "other";
}

std::optional<Priority> priority_from_string(const std::string& s) {
  if (s == "high") return Priority::High;
  if (s == "medium") return Priority::Medium;
  if (s == "low") return Priority::Low;
  if (s == "unspecified") return Priority::Unspecified;
  return std::nullopt;
}

std::optional<IssueKind> kind_from_string(const std::string& s) {
  if (s == "bug") return IssueKind::Bug;
  if (s == "feature") return IssueKind::Feature;
  if (s == "other") return IssueKind::Other;
  return std::nullopt;
}

LabelMapping default_label_mapping() {
  LabelMapping m;
  m.priority_rules = {
      {"p0", Priority::High},
      {"priority: critical", Priority::High},
      {"priority: high", Priority::High},
      {"p1", Priority::Medium},
      {"priority: medium", Priority::Medium},
      {"p2", Priority::Low},
      {"p3", Priority::Low},
      {"priority: low", Priority::Low},
  };
  m.kind_rules = {
      {"bug", IssueKind::Bug},
      {"feature request", IssueKind::Feature},
      {"feature", IssueKind::Feature},
      {"enhancement", IssueKind::Feature},
  };
  return m;
}

void validate(const LabelMapping& mapping) {
  for (const auto& [pattern, _] : mapping.priority_rules) {
    if (pattern.empty()) throw ValidationError("label_mapping.priority_rules: empty pattern");
  }
  for (const auto& [pattern, _] : mapping.kind_rules) {
    if (pattern.empty()) throw ValidationError("label_mapping.kind_rules: empty pattern");
  }
}

std::pair<Priority, IssueKind> classify_issue(const std::vector<std::string>& labels,
                                              const LabelMapping& mapping) {
  std::vector<std::string> lowered;
  lowered.reserve(labels.size());
  for (const auto& l : labels) lowered.push_back(lower(l));

  auto first_match = [&lowered](const auto& rules, auto fallback) {
    for (const auto& [pattern, value] : rules) {
      const std::string p = lower(pattern);
      for (const auto& label : lowered) {
        if (label.find(p) != std::string::npos) return value;
      }
    }
    return fallback;
  };

  return {first_match(mapping.priority_rules, Priority::Unspecified),
          first_match(mapping.kind_rules, IssueKind::Other)};
}

void validate(const RepoSnapshot& snapshot) {
  auto check_ref_part = [](const std::string& v, const char* field) {
    if (v.empty()) throw ValidationError(std::string("repo.") + field + ": empty");
    if (v.find('/') != std::string::npos) {
      throw ValidationError(std::string("repo.") + field + ": contains '/'");
    }
  };
  check_ref_part(snapshot.repo.owner, "owner");
  check_ref_part(snapshot.repo.name, "name");

  if (snapshot.fetched_at < snapshot.created_at) {
    throw ValidationError("meta.fetched_at: precedes meta.created_at");
  }
  if (snapshot.stargazers < 0) throw ValidationError("meta.stargazers: negative");
  if (snapshot.fork_count < 0) throw ValidationError("meta.fork_count: negative");

  std::set<std::string> fork_names;
  for (std::size_t i = 0; i < snapshot.forks.size(); ++i) {
    const auto& f = snapshot.forks[i];
    const std::string path = "forks[" + std::to_string(i) + "]";
    if (f.full_name.empty()) throw ValidationError(path + ".full_name: empty");
    if (!fork_names.insert(f.full_name).second) {
      throw ValidationError(path + ".full_name: duplicate '" + f.full_name + "'");
    }
  }

  std::set<std::int64_t> pull_numbers;
  for (std::size_t i = 0; i < snapshot.pulls.size(); ++i) {
    const auto& p = snapshot.pulls[i];
    const std::string path = "pulls[" + std::to_string(i) + "]";
    if (p.number <= 0) throw ValidationError(path + ".number: not positive");
    if (!pull_numbers.insert(p.number).second) {
      throw ValidationError(path + ".number: duplicate " + std::to_string(p.number));
    }
    if (p.merged_at) {
      if (!p.closed_at) {
        throw ValidationError(path + ".merged_at: present without closed_at");
      }
      if (*p.merged_at > *p.closed_at) {
        throw ValidationError(path + ".merged_at: after closed_at");
      }
    }
  }

  std::set<std::int64_t> issue_numbers;
  for (std::size_t i = 0; i < snapshot.issues.size(); ++i) {
    const auto& is = snapshot.issues[i];
    const std::string path = "issues[" + std::to_string(i) + "]";
    if (is.number <= 0) throw ValidationError(path + ".number: not positive");
    if (!issue_numbers.insert(is.number).second) {
      throw ValidationError(path + ".number: duplicate " + std::to_string(is.number));
    }
    if (is.closed_at && *is.closed_at < is.created_at) {
      throw ValidationError(path + ".closed_at: precedes created_at");
    }
  }
}

void sort_snapshot_lists(RepoSnapshot& snapshot) {
  std::sort(snapshot.forks.begin(), snapshot.forks.end(),
            [](const ForkRecord& a, const ForkRecord& b) { return a.full_name < b.full_name; });
  std::sort(snapshot.pulls.begin(), snapshot.pulls.end(),
            [](const PullRecord& a, const PullRecord& b) { return a.number < b.number; });
  std::sort(snapshot.issues.begin(), snapshot.issues.end(),
            [](const IssueRecord& a, const IssueRecord& b) { return a.number < b.number; });
}

void save_snapshot(const RepoSnapshot& snapshot, const std::filesystem::path& path) {
  validate(snapshot);

  RepoSnapshot sorted = snapshot;
  sort_snapshot_lists(sorted);

  ordered_json doc;
  doc["format_version"] = 1;
  doc["repo"] = {{"owner", sorted.repo.owner}, {"name", sorted.repo.name}};
  doc["meta"] = {
      {"created_at", time_json(sorted.created_at)},
      {"parent_pushed_at", time_json(sorted.parent_pushed_at)},
      {"fetched_at", time_json(sorted.fetched_at)},
      {"flags",
       {{"archived", sorted.flags.archived},
        {"is_template", sorted.flags.is_template},
        {"is_fork", sorted.flags.is_fork},
        {"has_issues", sorted.flags.has_issues},
        {"has_downloads", sorted.flags.has_downloads}}},
      {"stargazers", sorted.stargazers},
      {"fork_count", sorted.fork_count},
  };

  ordered_json forks = ordered_json::array();
  for (const auto& f : sorted.forks) {
    forks.push_back({{"full_name", f.full_name},
                     {"owner", f.owner},
                     {"created_at", time_json(f.created_at)},
                     {"pushed_at", time_json(f.pushed_at)},
                     {"description", f.description}});
  }
  doc["forks"] = std::move(forks);

  ordered_json pulls = ordered_json::array();
  for (const auto& p : sorted.pulls) {
    ordered_json head = p.head_repo_full_name ? ordered_json(*p.head_repo_full_name)
                                              : ordered_json(nullptr);
    pulls.push_back({{"number", p.number},
                     {"author", p.author},
                     {"head_repo_full_name", std::move(head)},
                     {"created_at", time_json(p.created_at)},
                     {"closed_at", opt_time_json(p.closed_at)},
                     {"merged_at", opt_time_json(p.merged_at)}});
  }
  doc["pulls"] = std::move(pulls);

  ordered_json issues = ordered_json::array();
  for (const auto& is : sorted.issues) {
    issues.push_back({{"number", is.number},
                      {"created_at", time_json(is.created_at)},
                      {"closed_at", opt_time_json(is.closed_at)},
                      {"labels", is.labels},
                      {"priority", to_string(is.priority)},
                      {"kind", to_string(is.kind)}});
  }
  doc["issues"] = std::move(issues);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

RepoSnapshot load_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path.string());

  ordered_json doc;
  try {
    doc = ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }

  if (!doc.is_object()) throw ParseError("document: expected object");
  if (get_int(doc, "format_version", "document") != 1) {
    throw ParseError("document.format_version: unsupported version");
  }

  RepoSnapshot s;
  const auto& repo = require(doc, "repo", "document");
  s.repo.owner = get_string(repo, "owner", "repo");
  s.repo.name = get_string(repo, "name", "repo");

  const auto& meta = require(doc, "meta", "document");
  s.created_at = get_time(meta, "created_at", "meta");
  s.parent_pushed_at = get_time(meta, "parent_pushed_at", "meta");
  s.fetched_at = get_time(meta, "fetched_at", "meta");
  const auto& flags = require(meta, "flags", "meta");
  s.flags.archived = get_bool(flags, "archived", "meta.flags");
  s.flags.is_template = get_bool(flags, "is_template", "meta.flags");
  s.flags.is_fork = get_bool(flags, "is_fork", "meta.flags");
  s.flags.has_issues = get_bool(flags, "has_issues", "meta.flags");
  s.flags.has_downloads = get_bool(flags, "has_downloads", "meta.flags");
  s.stargazers = get_int(meta, "stargazers", "meta");
  s.fork_count = get_int(meta, "fork_count", "meta");

  const auto& forks = require(doc, "forks", "document");
  if (!forks.is_array()) throw ParseError("forks: expected array");
  for (std::size_t i = 0; i < forks.size(); ++i) {
    const std::string p = "forks[" + std::to_string(i) + "]";
    const auto& fj = forks[i];
    if (!fj.is_object()) throw ParseError(p + ": expected object");
    ForkRecord f;
    f.full_name = get_string(fj, "full_name", p);
    f.owner = get_string(fj, "owner", p);
    f.created_at = get_time(fj, "created_at", p);
    f.pushed_at = get_time(fj, "pushed_at", p);
    if (fj.contains("description") && !fj["description"].is_null()) {
      if (!fj["description"].is_string()) throw ParseError(p + ".description: expected string");
      f.description = fj["description"].get<std::string>();
    }
    s.forks.push_back(std::move(f));
  }

  const auto& pulls = require(doc, "pulls", "document");
  if (!pulls.is_array()) throw ParseError("pulls: expected array");
  for (std::size_t i = 0; i < pulls.size(); ++i) {
    const std::string p = "pulls[" + std::to_string(i) + "]";
    const auto& pj = pulls[i];
    if (!pj.is_object()) throw ParseError(p + ": expected object");
    PullRecord pr;
    pr.number = get_int(pj, "number", p);
    pr.author = get_string(pj, "author", p);
    const auto& head = require(pj, "head_repo_full_name", p);
    if (head.is_null()) {
      pr.head_repo_full_name = std::nullopt;
    } else if (head.is_string()) {
      pr.head_repo_full_name = head.get<std::string>();
    } else {
      throw ParseError(p + ".head_repo_full_name: expected string or null");
    }
    pr.created_at = get_time(pj, "created_at", p);
    pr.closed_at = get_opt_time(pj, "closed_at", p);
    pr.merged_at = get_opt_time(pj, "merged_at", p);
    s.pulls.push_back(std::move(pr));
  }

  const auto& issues = require(doc, "issues", "document");
  if (!issues.is_array()) throw ParseError("issues: expected array");
  for (std::size_t i = 0; i < issues.size(); ++i) {
    const std::string p = "issues[" + std::to_string(i) + "]";
    const auto& ij = issues[i];
    if (!ij.is_object()) throw ParseError(p + ": expected object");
    IssueRecord is;
    is.number = get_int(ij, "number", p);
    is.created_at = get_time(ij, "created_at", p);
    is.closed_at = get_opt_time(ij, "closed_at", p);
    const auto& labels = require(ij, "labels", p);
    if (!labels.is_array()) throw ParseError(p + ".labels: expected array");
    for (const auto& l : labels) {
      if (!l.is_string()) throw ParseError(p + ".labels: expected string entries");
      is.labels.push_back(l.get<std::string>());
    }
    auto prio = priority_from_string(get_string(ij, "priority", p));
    if (!prio) throw ParseError(p + ".priority: unknown value");
    is.priority = *prio;
    auto kind = kind_from_string(get_string(ij, "kind", p));
    if (!kind) throw ParseError(p + ".kind: unknown value");
    is.kind = *kind;
    s.issues.push_back(std::move(is));
  }

  validate(s);
  return s;
}

}  // namespace waste_radar
