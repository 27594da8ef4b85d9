#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "waste_radar/time_util.hpp"

namespace waste_radar {

/// Identifies one GitHub repository.
struct RepoRef {
  std::string owner;
  std::string name;

  std::string full_name() const { return owner + "/" + name; }
  /// File-system safe identifier used for snapshot/report paths.
  std::string slug() const { return owner + "__" + name; }

  bool operator==(const RepoRef&) const = default;
};

/// Parses "owner/name"; throws ValidationError on bad shape.
RepoRef parse_repo_ref(const std::string& spec);

enum class Priority { High, Medium, Low, Unspecified };
enum class IssueKind { Bug, Feature, Other };

std::string to_string(Priority p);
std::string to_string(IssueKind k);
std::optional<Priority> priority_from_string(const std::string& s);
std::optional<IssueKind> kind_from_string(const std::string& s);

/// A direct fork of the studied repository. Both timestamps are mandatory;
/// a fork listing entry without them is rejected at ingest.
struct ForkRecord {
  std::string full_name;  // "owner/name", unique within a snapshot
  std::string owner;
  Timestamp created_at{};
  Timestamp pushed_at{};
  std::string description;  // optional metadata, used by the Zhou comparison rules

  bool operator==(const ForkRecord&) const = default;
};

/// A closed pull request. merged_at present means the PR was accepted.
struct PullRecord {
  std::int64_t number = 0;  // positive, unique within a snapshot
  std::string author;
  std::optional<std::string> head_repo_full_name;  // absent when the head fork was deleted
  Timestamp created_at{};
  std::optional<Timestamp> closed_at;
  std::optional<Timestamp> merged_at;

  bool operator==(const PullRecord&) const = default;
};

/// An issue (never a pull request; PR-marked records are dropped at ingest).
struct IssueRecord {
  std::int64_t number = 0;  // positive, unique within a snapshot
  Timestamp created_at{};
  std::optional<Timestamp> closed_at;
  std::vector<std::string> labels;
  Priority priority = Priority::Unspecified;
  IssueKind kind = IssueKind::Other;

  bool operator==(const IssueRecord&) const = default;
};

struct RepoFlags {
  bool archived = false;
  bool is_template = false;
  bool is_fork = false;
  bool has_issues = false;
  bool has_downloads = false;

  bool operator==(const RepoFlags&) const = default;
};

/// Immutable capture of one repository's metadata. All analyses run on these
/// values, never on live API state.
struct RepoSnapshot {
  RepoRef repo;
  Timestamp parent_pushed_at{};
  Timestamp fetched_at{};
  Timestamp created_at{};
  RepoFlags flags;
  std::int64_t stargazers = 0;
  std::int64_t fork_count = 0;  // count reported by the API, may exceed forks.size()
  std::vector<ForkRecord> forks;
  std::vector<PullRecord> pulls;
  std::vector<IssueRecord> issues;

  bool operator==(const RepoSnapshot&) const = default;
};

/// Ordered first-match-wins substring rules mapping issue labels to a
/// Priority and an IssueKind. Patterns are matched case-insensitively.
struct LabelMapping {
  std::vector<std::pair<std::string, Priority>> priority_rules;
  std::vector<std::pair<std::string, IssueKind>> kind_rules;
};

/// The mapping shipped by default; user-overridable via config.
LabelMapping default_label_mapping();

/// Throws ValidationError if any pattern is empty.
void validate(const LabelMapping& mapping);

/// Applies the mapping to a label set. The first rule whose pattern is a
/// case-insensitive substring of any label wins; no match yields
/// (Unspecified, Other). Pure and deterministic.
std::pair<Priority, IssueKind> classify_issue(const std::vector<std::string>& labels,
                                              const LabelMapping& mapping);

/// Throws ValidationError naming the offending field if any invariant fails.
void validate(const RepoSnapshot& snapshot);

/// Writes the snapshot as format_version 1 JSON. Byte-stable: keys in fixed
/// order, forks sorted by full_name, pulls and issues by number.
void save_snapshot(const RepoSnapshot& snapshot, const std::filesystem::path& path);

/// Reads and validates a snapshot file. load(save(s)) == s field-for-field
/// (module invariant; lists compare in their persisted sort order).
RepoSnapshot load_snapshot(const std::filesystem::path& path);

/// Sorts forks/pulls/issues by their identifiers, the persisted order.
void sort_snapshot_lists(RepoSnapshot& snapshot);

}  // namespace waste_radar
