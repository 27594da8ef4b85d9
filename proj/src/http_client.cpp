#include "waste_radar/http_client.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <unordered_map>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>

#include "waste_radar/errors.hpp"

namespace waste_radar {

bool CaseInsensitiveLess::operator()(const std::string& a,
                                     const std::string& b) const {
  return std::lexicographical_compare(
      a.begin(), a.end(), b.begin(), b.end(), [](unsigned char x, unsigned char y) {
        return std::tolower(x) < std::tolower(y);
      });
}

namespace {

class LiveClient : public HttpClient {
public:
  LiveClient(std::string base_url, std::string token)
      : base_url_(std::move(base_url)), token_(std::move(token)) {}

  HttpResponse get(const std::string& path_and_query) override {
    httplib::Headers headers{
        {"Accept", "application/vnd.github+json"},
        {"User-Agent", "waste-radar"},
        {"X-GitHub-Api-Version", "2022-11-28"},
    };
    if (!token_.empty()) {
      headers.emplace("Authorization", "Bearer " + token_);
    }
    auto result = connection().Get(path_and_query, headers);
    HttpResponse response;
    if (!result) {
      response.status = 0;
      response.body = httplib::to_string(result.error());
      return response;
    }
    response.status = result->status;
    for (const auto& [name, value] : result->headers) {
      response.headers[name] = value;
    }
    response.body = result->body;
    return response;
  }

private:
  // httplib::Client is not safe for concurrent calls, so each worker
  // thread keeps its own keep-alive connection.
  httplib::Client& connection() {
    struct Slot {
      std::string base_url;
      std::unique_ptr<httplib::Client> client;
    };
    thread_local std::unordered_map<const LiveClient*, Slot> slots;
    Slot& slot = slots[this];
    if (!slot.client || slot.base_url != base_url_) {
      slot.base_url = base_url_;
      slot.client = std::make_unique<httplib::Client>(base_url_);
      slot.client->set_connection_timeout(30);
      slot.client->set_read_timeout(60);
      slot.client->set_follow_location(true);
    }
    return *slot.client;
  }

  std::string base_url_;
  std::string token_;
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot read fixture file: " + path.string());
  }
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace

std::unique_ptr<HttpClient> make_live_client(const std::string& base_url,
                                             const std::string& token) {
  return std::make_unique<LiveClient>(base_url, token);
}

struct FixtureHttpClient::Impl {
  std::mutex mutex;
  std::unordered_map<std::string, std::deque<HttpResponse>> queues;
  std::int64_t request_count = 0;
};

FixtureHttpClient::FixtureHttpClient(const std::string& fixture_dir)
    : impl_(std::make_shared<Impl>()) {
  namespace fs = std::filesystem;
  const fs::path dir(fixture_dir);
  const fs::path index_path = dir / "index.json";
  nlohmann::json index;
  try {
    index = nlohmann::json::parse(read_file(index_path));
  } catch (const nlohmann::json::parse_error& err) {
    throw ParseError("fixture index " + index_path.string() + ": " + err.what());
  }
  if (!index.is_array()) {
    throw ParseError("fixture index " + index_path.string() +
                     ": expected a JSON array");
  }
  for (const auto& entry : index) {
    if (!entry.is_object()) {
      throw ParseError("fixture index entry must be an object");
    }
    const std::string method = entry.value("method", "GET");
    if (method != "GET") {
      continue;  // only GETs are replayed
    }
    if (!entry.contains("path") || !entry["path"].is_string()) {
      throw ParseError("fixture index entry is missing a \"path\" string");
    }
    const std::string path = entry["path"].get<std::string>();
    HttpResponse response;
    response.status = entry.value("status", 200);
    if (entry.contains("headers")) {
      for (const auto& [name, value] : entry["headers"].items()) {
        response.headers[name] = value.get<std::string>();
      }
    }
    if (entry.contains("body_file")) {
      response.body = read_file(dir / entry["body_file"].get<std::string>());
    } else if (entry.contains("body")) {
      const auto& body = entry["body"];
      response.body = body.is_string() ? body.get<std::string>() : body.dump();
    }
    impl_->queues[path].push_back(std::move(response));
  }
}

HttpResponse FixtureHttpClient::get(const std::string& path_and_query) {
  std::lock_guard<std::mutex> lock(impl_->mutex);
  ++impl_->request_count;
  auto it = impl_->queues.find(path_and_query);
  if (it == impl_->queues.end() || it->second.empty()) {
    HttpResponse miss;
    miss.status = 404;
    miss.body = "no fixture for GET " + path_and_query;
    return miss;
  }
  auto& queue = it->second;
  HttpResponse response = queue.front();
  if (queue.size() > 1) {
    queue.pop_front();  // last response stays sticky for repeat requests
  }
  return response;
}

std::int64_t FixtureHttpClient::request_count() const {
  std::lock_guard<std::mutex> lock(impl_->mutex);
  return impl_->request_count;
}

}  // namespace waste_radar
