#include "waste_radar/github_ingest.hpp"

#include <algorithm>
#include <atomic>
#include <iostream>
#include <mutex>
#include <thread>
#include <unordered_set>

#include "waste_radar/errors.hpp"

namespace waste_radar {
namespace {

constexpr int kPerPage = 100;

struct FetchContext {
  bool fail_fast = false;
  int retries = 3;
  int concurrency = 4;
  std::function<Timestamp()> now;
  std::function<void(std::chrono::seconds)> sleep;
  std::function<void(const std::string&)> log;
};

FetchContext resolve(const FetchOptions& options) {
  FetchContext ctx;
  ctx.fail_fast = options.fail_fast;
  ctx.retries = std::max(1, options.retries);
  ctx.concurrency = std::max(1, options.concurrency);
  ctx.now = options.now_fn;
  ctx.sleep = options.sleep_fn;
  ctx.log = options.log;
  if (!ctx.now) {
    ctx.now = [] {
      return std::chrono::time_point_cast<std::chrono::seconds>(
          std::chrono::system_clock::now());
    };
  }
  if (!ctx.sleep) {
    ctx.sleep = [](std::chrono::seconds amount) {
      std::this_thread::sleep_for(amount);
    };
  }
  if (!ctx.log) {
    ctx.log = [](const std::string& line) { std::cerr << line << '\n'; };
  }
  return ctx;
}

std::int64_t header_int(const HttpResponse& response, const std::string& name,
                        std::int64_t fallback) {
  const std::string value = response.header(name);
  if (value.empty()) {
    return fallback;
  }
  try {
    return std::stoll(value);
  } catch (const std::exception&) {
    return fallback;
  }
}

HttpResponse get_with_policy(HttpClient& client, const std::string& path,
                             const FetchContext& ctx) {
  int failed_attempts = 0;
  for (;;) {
    HttpResponse response = client.get(path);
    if (response.status >= 200 && response.status < 300) {
      return response;
    }
    if (response.status == 403 || response.status == 429) {
      const bool budget_exhausted =
          response.header("X-RateLimit-Remaining") == "0";
      const std::string retry_after = response.header("Retry-After");
      if (budget_exhausted || !retry_after.empty()) {
        if (ctx.fail_fast) {
          throw RateLimitError("rate limited on GET " + path);
        }
        std::chrono::seconds wait{60};
        if (!retry_after.empty()) {
          wait = std::chrono::seconds(header_int(response, "Retry-After", 60));
        } else {
          const std::int64_t reset =
              header_int(response, "X-RateLimit-Reset", 0);
          const std::int64_t now = to_unix_seconds(ctx.now());
          wait = std::chrono::seconds(std::max<std::int64_t>(reset - now, 0) + 1);
        }
        ctx.log("rate limited; sleeping " + std::to_string(wait.count()) +
                "s before retrying GET " + path);
        ctx.sleep(wait);
        continue;
      }
      throw HttpError(response.status,
                      "GET " + path + " returned status " +
                          std::to_string(response.status));
    }
    if (response.status == 0 || response.status >= 500) {
      ++failed_attempts;
      if (failed_attempts >= ctx.retries) {
        throw HttpError(response.status,
                        "GET " + path + " failed after " +
                            std::to_string(failed_attempts) + " attempts (" +
                            (response.status == 0
                                 ? "transport error: " + response.body
                                 : "status " + std::to_string(response.status)) +
                            ")");
      }
      const std::chrono::seconds backoff{1LL << (failed_attempts - 1)};
      ctx.log("GET " + path + " failed (attempt " +
              std::to_string(failed_attempts) + "), retrying in " +
              std::to_string(backoff.count()) + "s");
      ctx.sleep(backoff);
      continue;
    }
    throw HttpError(response.status, "GET " + path + " returned status " +
                                         std::to_string(response.status));
  }
}

/// Extracts the page number of the rel="last" link, when the header has one.
std::optional<int> parse_last_page(const std::string& link_header) {
  std::size_t pos = 0;
  while (pos < link_header.size()) {
    const std::size_t comma = link_header.find(',', pos);
    const std::string part =
        link_header.substr(pos, comma == std::string::npos ? std::string::npos
                                                           : comma - pos);
    pos = comma == std::string::npos ? link_header.size() : comma + 1;
    if (part.find("rel=\"last\"") == std::string::npos) {
      continue;
    }
    const std::size_t open = part.find('<');
    const std::size_t close = part.find('>');
    if (open == std::string::npos || close == std::string::npos || close < open) {
      continue;
    }
    const std::string url = part.substr(open + 1, close - open - 1);
    const std::size_t question = url.find('?');
    if (question == std::string::npos) {
      continue;
    }
    std::size_t cursor = question + 1;
    while (cursor < url.size()) {
      const std::size_t amp = url.find('&', cursor);
      const std::string param = url.substr(
          cursor, amp == std::string::npos ? std::string::npos : amp - cursor);
      cursor = amp == std::string::npos ? url.size() : amp + 1;
      if (param.rfind("page=", 0) == 0) {
        try {
          return std::stoi(param.substr(5));
        } catch (const std::exception&) {
          return std::nullopt;
        }
      }
    }
  }
  return std::nullopt;
}

std::vector<nlohmann::json> parse_items(const HttpResponse& response,
                                        const std::string& what, int page) {
  nlohmann::json parsed;
  try {
    parsed = nlohmann::json::parse(response.body);
  } catch (const nlohmann::json::parse_error& err) {
    throw ParseError(what + " page " + std::to_string(page) +
                     ": invalid JSON: " + err.what());
  }
  if (!parsed.is_array()) {
    throw ParseError(what + " page " + std::to_string(page) +
                     ": expected a JSON array");
  }
  std::vector<nlohmann::json> items;
  items.reserve(parsed.size());
  for (auto& item : parsed) {
    items.push_back(std::move(item));
  }
  return items;
}

/// Fetches every page of a listing endpoint. `base` already carries the
/// per_page parameter; pages beyond the first are fetched by a small worker
/// pool once the Link header reveals the page count.
std::vector<nlohmann::json> fetch_listing(HttpClient& client,
                                          const std::string& base,
                                          std::optional<std::int64_t> max_items,
                                          const FetchContext& ctx,
                                          const std::string& what) {
  std::vector<nlohmann::json> all;
  if (max_items && *max_items <= 0) {
    return all;
  }
  const HttpResponse first = get_with_policy(client, base + "&page=1", ctx);
  std::vector<nlohmann::json> items = parse_items(first, what, 1);
  const bool first_page_full = static_cast<int>(items.size()) >= kPerPage;
  for (auto& item : items) {
    all.push_back(std::move(item));
  }

  int last_page = 1;
  if (const auto last = parse_last_page(first.header("Link"))) {
    last_page = std::max(*last, 1);
  } else if (first_page_full) {
    // No Link header: walk pages until one comes back short.
    for (int page = 2;; ++page) {
      if (max_items && static_cast<std::int64_t>(all.size()) >= *max_items) {
        break;
      }
      const HttpResponse response =
          get_with_policy(client, base + "&page=" + std::to_string(page), ctx);
      std::vector<nlohmann::json> page_items = parse_items(response, what, page);
      const bool full = static_cast<int>(page_items.size()) >= kPerPage;
      for (auto& item : page_items) {
        all.push_back(std::move(item));
      }
      if (!full) {
        break;
      }
    }
    if (max_items && static_cast<std::int64_t>(all.size()) > *max_items) {
      all.resize(static_cast<std::size_t>(*max_items));
    }
    return all;
  }

  if (max_items) {
    const std::int64_t wanted_pages = (*max_items + kPerPage - 1) / kPerPage;
    last_page = static_cast<int>(
        std::min<std::int64_t>(last_page, std::max<std::int64_t>(wanted_pages, 1)));
  }
  if (last_page > 1) {
    std::vector<std::vector<nlohmann::json>> pages(
        static_cast<std::size_t>(last_page) + 1);
    std::atomic<int> next_page{2};
    std::mutex error_mutex;
    std::exception_ptr error;
    auto worker = [&] {
      for (;;) {
        const int page = next_page.fetch_add(1);
        if (page > last_page) {
          return;
        }
        try {
          const HttpResponse response = get_with_policy(
              client, base + "&page=" + std::to_string(page), ctx);
          pages[static_cast<std::size_t>(page)] =
              parse_items(response, what, page);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) {
            error = std::current_exception();
          }
          next_page.store(last_page + 1);
          return;
        }
      }
    };
    const int workers = std::min(ctx.concurrency, last_page - 1);
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(workers));
    for (int i = 0; i < workers; ++i) {
      threads.emplace_back(worker);
    }
    for (auto& thread : threads) {
      thread.join();
    }
    if (error) {
      std::rethrow_exception(error);
    }
    for (int page = 2; page <= last_page; ++page) {
      for (auto& item : pages[static_cast<std::size_t>(page)]) {
        all.push_back(std::move(item));
      }
    }
  }
  if (max_items && static_cast<std::int64_t>(all.size()) > *max_items) {
    all.resize(static_cast<std::size_t>(*max_items));
  }
  return all;
}

const nlohmann::json* field(const nlohmann::json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    return nullptr;
  }
  return &*it;
}

std::optional<std::string> opt_string_field(const nlohmann::json& obj,
                                            const char* key) {
  const nlohmann::json* value = field(obj, key);
  if (!value || !value->is_string()) {
    return std::nullopt;
  }
  return value->get<std::string>();
}

std::optional<Timestamp> opt_time_field(const nlohmann::json& obj,
                                        const char* key) {
  const auto text = opt_string_field(obj, key);
  if (!text) {
    return std::nullopt;
  }
  return try_parse_rfc3339(*text);
}

Timestamp require_time_field(const nlohmann::json& obj, const char* key,
                             const std::string& where) {
  const auto text = opt_string_field(obj, key);
  if (!text) {
    throw ParseError(where + ": missing timestamp \"" + key + "\"");
  }
  return parse_rfc3339(*text, where + "." + key);
}

int utc_year(Timestamp ts) {
  return std::stoi(format_rfc3339(ts).substr(0, 4));
}

std::string lowercase(std::string text) {
  std::transform(text.begin(), text.end(), text.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return text;
}

}  // namespace

void validate(const AuthContext& auth) {
  if (auth.api_base_url.rfind("https://", 0) != 0 &&
      auth.api_base_url.rfind("http://", 0) != 0) {
    throw ValidationError("api_base_url must be an absolute http(s) URL, got \"" +
                          auth.api_base_url + "\"");
  }
}

std::unique_ptr<HttpClient> make_live_client(const AuthContext& auth) {
  validate(auth);
  return make_live_client(auth.api_base_url, auth.token);
}

void validate(const SelectionCriteria& criteria) {
  if (criteria.min_stars < 0) {
    throw ValidationError("min_stars must be non-negative");
  }
  if (criteria.min_forks < 1) {
    throw ValidationError("min_forks must be positive");
  }
  const bool any_predicate =
      criteria.min_stars > 0 || criteria.min_forks > 0 ||
      criteria.require_pushed_in_year.has_value() ||
      criteria.require_has_issues || criteria.require_has_downloads ||
      criteria.created_before.has_value() || criteria.exclude_archived ||
      criteria.exclude_template || criteria.exclude_fork ||
      !criteria.allow_owners.empty() || !criteria.deny_owners.empty();
  if (!any_predicate) {
    throw ValidationError("selection criteria must enable at least one predicate");
  }
}

SelectionResult select_repositories(const nlohmann::json& candidates,
                                    const SelectionCriteria& criteria) {
  validate(criteria);
  if (!candidates.is_array()) {
    throw ParseError("candidates: expected a JSON array of repository objects");
  }

  std::unordered_set<std::string> allow;
  std::unordered_set<std::string> deny;
  for (const auto& owner : criteria.allow_owners) {
    allow.insert(lowercase(owner));
  }
  for (const auto& owner : criteria.deny_owners) {
    deny.insert(lowercase(owner));
  }

  struct Row {
    RepoRef ref;
    std::int64_t stars = 0;
  };
  std::vector<Row> rows;
  SelectionResult result;

  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& candidate = candidates[i];
    std::string label = "candidates[" + std::to_string(i) + "]";
    if (!candidate.is_object()) {
      result.warnings.push_back(label + ": not an object, excluded");
      continue;
    }

    RepoRef ref;
    if (const auto full_name = opt_string_field(candidate, "full_name")) {
      try {
        ref = parse_repo_ref(*full_name);
      } catch (const Error& err) {
        result.warnings.push_back(label + ": " + err.what() + ", excluded");
        continue;
      }
      label += " (" + ref.full_name() + ")";
    } else {
      result.warnings.push_back(label + ": missing \"full_name\", excluded");
      continue;
    }

    bool missing_field = false;
    auto need_int = [&](const char* key) -> std::int64_t {
      const nlohmann::json* value = field(candidate, key);
      if (!value || !value->is_number_integer()) {
        result.warnings.push_back(label + ": missing \"" + key + "\", excluded");
        missing_field = true;
        return 0;
      }
      return value->get<std::int64_t>();
    };
    auto need_bool = [&](const char* key) -> bool {
      const nlohmann::json* value = field(candidate, key);
      if (!value || !value->is_boolean()) {
        result.warnings.push_back(label + ": missing \"" + key + "\", excluded");
        missing_field = true;
        return false;
      }
      return value->get<bool>();
    };
    auto need_time = [&](const char* key) -> Timestamp {
      const auto parsed = opt_time_field(candidate, key);
      if (!parsed) {
        result.warnings.push_back(label + ": missing \"" + key + "\", excluded");
        missing_field = true;
        return Timestamp{};
      }
      return *parsed;
    };

    const std::int64_t stars = need_int("stargazers_count");
    if (missing_field) {
      continue;
    }
    bool keep = stars >= criteria.min_stars;

    if (keep && criteria.min_forks > 0) {
      const std::int64_t forks = need_int("forks_count");
      keep = !missing_field && forks >= criteria.min_forks;
    }
    if (keep && criteria.require_pushed_in_year) {
      const Timestamp pushed = need_time("pushed_at");
      keep = !missing_field && utc_year(pushed) == *criteria.require_pushed_in_year;
    }
    if (keep && criteria.created_before) {
      const Timestamp created = need_time("created_at");
      keep = !missing_field && created < *criteria.created_before;
    }
    if (keep && criteria.require_has_issues) {
      keep = need_bool("has_issues") && !missing_field;
    }
    if (keep && criteria.require_has_downloads) {
      keep = need_bool("has_downloads") && !missing_field;
    }
    if (keep && criteria.exclude_archived) {
      keep = !need_bool("archived") && !missing_field;
    }
    if (keep && criteria.exclude_template) {
      keep = !need_bool("is_template") && !missing_field;
    }
    if (keep && criteria.exclude_fork) {
      keep = !need_bool("fork") && !missing_field;
    }
    if (keep) {
      const std::string owner = lowercase(ref.owner);
      if (deny.count(owner) > 0) {
        keep = false;
      } else if (!allow.empty() && allow.count(owner) == 0) {
        keep = false;
      }
    }
    if (keep && !missing_field) {
      rows.push_back(Row{ref, stars});
    }
  }

  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.stars != b.stars) {
      return a.stars > b.stars;
    }
    return a.ref.full_name() < b.ref.full_name();
  });
  result.selected.reserve(rows.size());
  for (auto& row : rows) {
    result.selected.push_back(std::move(row.ref));
  }
  return result;
}

RepoSnapshot fetch_repo_snapshot(HttpClient& client, const RepoRef& repo,
                                 const FetchOptions& options) {
  const FetchContext ctx = resolve(options);
  const std::string root = "/repos/" + repo.owner + "/" + repo.name;

  HttpResponse repo_response;
  try {
    repo_response = get_with_policy(client, root, ctx);
  } catch (const HttpError& err) {
    if (err.status() == 404) {
      throw UnknownRepoError("repository not found: " + repo.full_name());
    }
    throw;
  }
  nlohmann::json repo_obj;
  try {
    repo_obj = nlohmann::json::parse(repo_response.body);
  } catch (const nlohmann::json::parse_error& err) {
    throw ParseError("repository object for " + repo.full_name() +
                     ": invalid JSON: " + err.what());
  }
  if (!repo_obj.is_object()) {
    throw ParseError("repository object for " + repo.full_name() +
                     ": expected a JSON object");
  }

  RepoSnapshot snapshot;
  snapshot.repo = repo;
  const std::string where = "repository " + repo.full_name();
  snapshot.created_at = require_time_field(repo_obj, "created_at", where);
  snapshot.parent_pushed_at = require_time_field(repo_obj, "pushed_at", where);
  snapshot.flags.archived = repo_obj.value("archived", false);
  snapshot.flags.is_template = repo_obj.value("is_template", false);
  snapshot.flags.is_fork = repo_obj.value("fork", false);
  snapshot.flags.has_issues = repo_obj.value("has_issues", false);
  snapshot.flags.has_downloads = repo_obj.value("has_downloads", true);
  snapshot.stargazers = repo_obj.value("stargazers_count", std::int64_t{0});
  snapshot.fork_count = repo_obj.value("forks_count", std::int64_t{0});

  // Forks.
  {
    const auto items =
        fetch_listing(client, root + "/forks?per_page=100",
                      options.limits.max_forks, ctx, repo.full_name() + " forks");
    std::unordered_set<std::string> seen;
    for (const auto& item : items) {
      if (!item.is_object()) {
        continue;
      }
      const auto full_name = opt_string_field(item, "full_name");
      if (!full_name) {
        ctx.log("skipping fork with no full_name");
        continue;
      }
      if (!seen.insert(*full_name).second) {
        continue;
      }
      const auto created = opt_time_field(item, "created_at");
      const auto pushed = opt_time_field(item, "pushed_at");
      if (!created || !pushed) {
        ctx.log("skipping fork " + *full_name +
                ": created_at or pushed_at missing");
        continue;
      }
      ForkRecord fork;
      fork.full_name = *full_name;
      if (const nlohmann::json* owner = field(item, "owner")) {
        fork.owner = owner->value("login", std::string());
      }
      if (fork.owner.empty()) {
        const std::size_t slash = full_name->find('/');
        fork.owner = slash == std::string::npos ? *full_name
                                                : full_name->substr(0, slash);
      }
      fork.created_at = *created;
      fork.pushed_at = *pushed;
      fork.description = opt_string_field(item, "description").value_or("");
      snapshot.forks.push_back(std::move(fork));
    }
  }

  // Closed pull requests, newest first as the API returns them.
  {
    const auto items = fetch_listing(
        client, root + "/pulls?state=closed&per_page=100",
        options.limits.max_pulls, ctx, repo.full_name() + " pulls");
    std::unordered_set<std::int64_t> seen;
    for (const auto& item : items) {
      if (!item.is_object()) {
        continue;
      }
      const nlohmann::json* number = field(item, "number");
      if (!number || !number->is_number_integer()) {
        ctx.log("skipping pull with no number");
        continue;
      }
      PullRecord pull;
      pull.number = number->get<std::int64_t>();
      if (!seen.insert(pull.number).second) {
        continue;
      }
      if (const nlohmann::json* user = field(item, "user")) {
        pull.author = user->value("login", std::string());
      }
      if (const nlohmann::json* head = field(item, "head")) {
        if (const nlohmann::json* head_repo = field(*head, "repo")) {
          pull.head_repo_full_name = opt_string_field(*head_repo, "full_name");
        }
      }
      pull.created_at = require_time_field(
          item, "created_at", "pull #" + std::to_string(pull.number));
      pull.closed_at = opt_time_field(item, "closed_at");
      pull.merged_at = opt_time_field(item, "merged_at");
      snapshot.pulls.push_back(std::move(pull));
    }
  }

  // Issues; the listing interleaves pull requests, which are dropped here so
  // issue measures stay uncontaminated.
  {
    const auto items = fetch_listing(
        client, root + "/issues?state=all&per_page=100",
        options.limits.max_issues, ctx, repo.full_name() + " issues");
    std::unordered_set<std::int64_t> seen;
    for (const auto& item : items) {
      if (!item.is_object() || item.contains("pull_request")) {
        continue;
      }
      const nlohmann::json* number = field(item, "number");
      if (!number || !number->is_number_integer()) {
        ctx.log("skipping issue with no number");
        continue;
      }
      IssueRecord issue;
      issue.number = number->get<std::int64_t>();
      if (!seen.insert(issue.number).second) {
        continue;
      }
      issue.created_at = require_time_field(
          item, "created_at", "issue #" + std::to_string(issue.number));
      issue.closed_at = opt_time_field(item, "closed_at");
      if (const nlohmann::json* labels = field(item, "labels")) {
        if (labels->is_array()) {
          for (const auto& entry : *labels) {
            if (entry.is_string()) {
              issue.labels.push_back(entry.get<std::string>());
            } else if (entry.is_object()) {
              if (const auto name = opt_string_field(entry, "name")) {
                issue.labels.push_back(*name);
              }
            }
          }
        }
      }
      const auto [priority, kind] =
          classify_issue(issue.labels, options.label_mapping);
      issue.priority = priority;
      issue.kind = kind;
      snapshot.issues.push_back(std::move(issue));
    }
  }

  snapshot.fetched_at = ctx.now();
  sort_snapshot_lists(snapshot);
  validate(snapshot);
  return snapshot;
}

}  // namespace waste_radar
