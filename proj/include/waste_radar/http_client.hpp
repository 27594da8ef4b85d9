#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>

namespace waste_radar {

struct CaseInsensitiveLess {
  bool operator()(const std::string& a, const std::string& b) const;
};

struct HttpResponse {
  int status = 0;  // 0 means transport failure
  std::map<std::string, std::string, CaseInsensitiveLess> headers;
  std::string body;

  std::string header(const std::string& name) const {
    auto it = headers.find(name);
    return it == headers.end() ? std::string() : it->second;
  }
};

/// Transport abstraction: requests are host-relative ("/repos/o/r?page=2").
class HttpClient {
public:
  virtual ~HttpClient() = default;
  virtual HttpResponse get(const std::string& path_and_query) = 0;
};

/// Live client over the GitHub REST API. base_url must be absolute
/// ("https://api.github.com"); token, when present, is sent as a bearer
/// credential.
std::unique_ptr<HttpClient> make_live_client(const std::string& base_url,
                                             const std::string& token);

/// Replays canned responses from a directory. The directory holds an
/// index.json array of entries:
///   {"method": "GET", "path": "/repos/o/r?x=1", "status": 200,
///    "headers": {...}, "body_file": "repo.json"}   (or "body": "inline")
/// Entries sharing a path form a FIFO queue; the final entry repeats.
/// Unknown paths yield a 404 naming the missing path.
class FixtureHttpClient : public HttpClient {
public:
  explicit FixtureHttpClient(const std::string& fixture_dir);

  HttpResponse get(const std::string& path_and_query) override;

  /// Total requests served, cache-hit assertions in tests.
  std::int64_t request_count() const;

private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

}  // namespace waste_radar
