#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "waste_radar/http_client.hpp"
#include "waste_radar/snapshot.hpp"
#include "waste_radar/time_util.hpp"

namespace waste_radar {

struct AuthContext {
  std::string token;  // empty means anonymous access
  std::string api_base_url = "https://api.github.com";
};

void validate(const AuthContext& auth);

std::unique_ptr<HttpClient> make_live_client(const AuthContext& auth);

/// Inclusion and exclusion predicates applied to candidate repositories.
/// Owner allow/deny lists cover the manual curation step (dropping tutorial
/// collections and similar outliers) that no metadata predicate captures.
struct SelectionCriteria {
  std::int64_t min_stars = 1;
  std::optional<int> require_pushed_in_year = 2024;
  bool require_has_issues = true;
  bool require_has_downloads = true;
  std::int64_t min_forks = 1;
  std::optional<Timestamp> created_before =
      parse_rfc3339("2024-01-01T00:00:00Z", "created_before");
  bool exclude_archived = true;
  bool exclude_template = true;
  bool exclude_fork = true;
  std::vector<std::string> allow_owners;  // empty means all owners allowed
  std::vector<std::string> deny_owners;
};

void validate(const SelectionCriteria& criteria);

struct SelectionResult {
  std::vector<RepoRef> selected;  // stars descending, ties by full_name
  std::vector<std::string> warnings;
};

/// Filters a JSON array of GitHub repository objects. A candidate missing a
/// field that an enabled predicate needs is excluded with a warning.
SelectionResult select_repositories(const nlohmann::json& candidates,
                                    const SelectionCriteria& criteria);

struct FetchLimits {
  std::optional<std::int64_t> max_forks;
  std::optional<std::int64_t> max_pulls;   // newest first
  std::optional<std::int64_t> max_issues;  // newest first
};

struct FetchOptions {
  FetchLimits limits;
  bool fail_fast = false;  // abort on rate limit instead of sleeping
  int retries = 3;         // attempts per request on 5xx/transport errors
  int concurrency = 4;     // parallel page fetches once the page count is known
  LabelMapping label_mapping = default_label_mapping();
  std::function<Timestamp()> now_fn;                    // defaults to wall clock
  std::function<void(std::chrono::seconds)> sleep_fn;   // defaults to real sleep
  std::function<void(const std::string&)> log;          // defaults to stderr
};

/// Pulls the repository object plus its full fork, closed-pull, and issue
/// listings through `client`, paginating to exhaustion (or the given caps).
/// Forks lacking created_at or pushed_at are skipped with a warning; records
/// in the issues listing that are really pull requests are dropped.
RepoSnapshot fetch_repo_snapshot(HttpClient& client, const RepoRef& repo,
                                 const FetchOptions& options = {});

}  // namespace waste_radar
