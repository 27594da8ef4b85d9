#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "waste_radar/snapshot.hpp"

namespace waste_radar::testing {

/// Unique directory under the system temp dir, removed on destruction.
class TempDir {
public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

private:
  std::filesystem::path path_;
};

/// parse_rfc3339 shorthand for literals in tests.
Timestamp ts(const std::string& text);

ForkRecord make_fork(std::string full_name, const std::string& created,
                     const std::string& pushed, std::string description = "");

PullRecord make_pull(std::int64_t number, const std::string& created,
                     const std::optional<std::string>& closed,
                     const std::optional<std::string>& merged,
                     std::string author = "someone",
                     std::optional<std::string> head_repo = std::nullopt);

IssueRecord make_issue(std::int64_t number, const std::string& created,
                       const std::optional<std::string>& closed,
                       Priority priority = Priority::Unspecified,
                       IssueKind kind = IssueKind::Other,
                       std::vector<std::string> labels = {});

/// Minimal valid snapshot; lists start empty.
RepoSnapshot make_snapshot(const std::string& owner = "acme",
                           const std::string& name = "widget",
                           const std::string& parent_pushed = "2024-04-28T00:00:00Z",
                           const std::string& fetched = "2024-04-30T00:00:00Z");

/// GitHub API shaped objects for HTTP replay fixtures.
nlohmann::json gh_repo_json(const RepoSnapshot& snapshot);
nlohmann::json gh_fork_json(const ForkRecord& fork);
nlohmann::json gh_pull_json(const PullRecord& pull);
nlohmann::json gh_issue_json(const IssueRecord& issue, bool as_pull_request = false);

/// One repository's worth of canned listings.
struct HttpFixtureSpec {
  std::string owner = "acme";
  std::string name = "widget";
  nlohmann::json repo;  // repo object; defaulted from owner/name when null
  std::vector<nlohmann::json> forks;
  std::vector<nlohmann::json> pulls;
  std::vector<nlohmann::json> issues;
  bool link_headers = true;  // advertise the page count via Link rel="last"
};

/// Writes index.json plus body files for the paginated listings (100 per
/// page, GitHub's Link header format).
void write_http_fixture(const std::filesystem::path& dir,
                        const HttpFixtureSpec& spec);

/// Runs the CLI binary named by WASTE_RADAR_BIN. Returns exit code; captures
/// stdout (and optionally stderr) into the given strings.
int run_cli(const std::vector<std::string>& args, std::string* stdout_text,
            std::string* stderr_text = nullptr);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& text);

}  // namespace waste_radar::testing
