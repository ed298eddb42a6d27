#pragma once

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <mutex>
#include <semaphore>
#include <sstream>
#include <string>

#include <httplib.h>

#include "tablenet/infill.hpp"
#include "tablenet/manifest.hpp"
#include "tablenet/record.hpp"

namespace tablenet {

// Sends one JSON request payload and returns the JSON response payload.
// Implementations must be safe to call concurrently.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual json post(const json& request) = 0;
};

struct TranscriptEntry {
  json request;
  json response;
  std::string timestamp;
};

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream ss;
  ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return ss.str();
}

// Append-only request/response log, optionally mirrored to a JSONL file.
class ProviderTranscript {
 public:
  ProviderTranscript() = default;
  explicit ProviderTranscript(std::filesystem::path file) : file_(std::move(file)) {
    if (file_.has_parent_path()) std::filesystem::create_directories(file_.parent_path());
    std::ofstream(file_, std::ios::binary | std::ios::trunc);
  }

  void append(TranscriptEntry entry) {
    std::lock_guard lock(mutex_);
    if (!file_.empty()) {
      std::ofstream out(file_, std::ios::binary | std::ios::app);
      out << json{{"request", entry.request},
                  {"response", entry.response},
                  {"timestamp", entry.timestamp}}
                 .dump()
          << '\n';
    }
    entries_.push_back(std::move(entry));
  }

  std::vector<TranscriptEntry> entries() const {
    std::lock_guard lock(mutex_);
    return entries_;
  }

  static std::vector<TranscriptEntry> load(const std::filesystem::path& file) {
    std::vector<TranscriptEntry> out;
    for (const json& j : read_jsonl(file)) {
      out.push_back({j.at("request"), j.at("response"), j.value("timestamp", std::string{})});
    }
    return out;
  }

 private:
  std::filesystem::path file_;
  mutable std::mutex mutex_;
  std::vector<TranscriptEntry> entries_;
};

struct HttpEndpoint {
  std::string base;  // scheme://host[:port]
  std::string path;

  static HttpEndpoint parse(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("endpoint must be an http(s) URL: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
  }
};

class HttpTransport : public Transport {
 public:
  HttpTransport(const std::string& endpoint, std::string api_key, int timeout_ms,
                std::ptrdiff_t max_inflight)
      : endpoint_(HttpEndpoint::parse(endpoint)),
        api_key_(std::move(api_key)),
        timeout_ms_(timeout_ms),
        slots_(std::max<std::ptrdiff_t>(1, std::min<std::ptrdiff_t>(max_inflight, 1024))) {}

  json post(const json& request) override {
    slots_.acquire();
    struct Release {
      std::counting_semaphore<1024>& s;
      ~Release() { s.release(); }
    } release{slots_};

    httplib::Client client(endpoint_.base);
    const auto timeout = std::chrono::milliseconds(timeout_ms_);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
    auto res = client.Post(endpoint_.path, headers, request.dump(), "application/json");
    if (!res) {
      throw ProviderError("request to " + endpoint_.base + endpoint_.path +
                          " failed: " + httplib::to_string(res.error()));
    }
    if (res->status < 200 || res->status >= 300) {
      const bool retryable = res->status == 429 || res->status >= 500;
      throw ProviderError("HTTP " + std::to_string(res->status) + " from " + endpoint_.base,
                          retryable);
    }
    try {
      return json::parse(res->body);
    } catch (const json::parse_error& e) {
      throw ResponseFormatError(std::string("response body is not JSON: ") + e.what());
    }
  }

 private:
  HttpEndpoint endpoint_;
  std::string api_key_;
  int timeout_ms_;
  std::counting_semaphore<1024> slots_;
};

// Forwards to an inner transport and logs every exchange.
class RecordingTransport : public Transport {
 public:
  RecordingTransport(std::shared_ptr<Transport> inner, std::shared_ptr<ProviderTranscript> log)
      : inner_(std::move(inner)), log_(std::move(log)) {}

  json post(const json& request) override {
    json response = inner_->post(request);
    log_->append({request, response, utc_timestamp()});
    return response;
  }

 private:
  std::shared_ptr<Transport> inner_;
  std::shared_ptr<ProviderTranscript> log_;
};

// Serves responses from a transcript. Requests are matched by their exact
// serialized payload; repeated identical requests get responses in recorded order.
class ReplayTransport : public Transport {
 public:
  explicit ReplayTransport(const std::vector<TranscriptEntry>& entries) {
    for (const auto& e : entries) queue_[e.request.dump()].push_back(e.response);
  }

  json post(const json& request) override {
    std::lock_guard lock(mutex_);
    auto it = queue_.find(request.dump());
    if (it == queue_.end() || it->second.empty()) {
      throw ProviderError("no recorded response for request", false);
    }
    json response = std::move(it->second.front());
    it->second.pop_front();
    return response;
  }

 private:
  std::mutex mutex_;
  std::map<std::string, std::deque<json>> queue_;
};

}  // namespace tablenet
