#include "conflate/backend.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <cmath>
#include <cstdlib>
#include <thread>

#include "conflate/error.hpp"
#include "conflate/report.hpp"

namespace conflate {

using nlohmann::json;

MockBackend::MockBackend(json script) : script_(std::move(script)) {
  if (!script_.is_object()) throw ConfigError("mock script must be a JSON object");
}

std::unique_ptr<MockBackend> MockBackend::from_file(const std::filesystem::path& path) {
  return std::make_unique<MockBackend>(read_json_file(path.string()));
}

std::string MockBackend::complete(const ChatRequest& request) {
  {
    std::lock_guard lock(mutex_);
    calls_.push_back({request.pair_id, request.pass});
  }
  if (auto it = script_.find(request.pair_id); it != script_.end()) {
    if (it->is_string()) return it->get<std::string>();
    if (it->is_object()) {
      if (auto p = it->find(request.pass); p != it->end() && p->is_string()) return p->get<std::string>();
    }
  }
  if (auto it = script_.find("prompt:" + prompt_hash(request.messages)); it != script_.end() && it->is_string()) {
    return it->get<std::string>();
  }
  if (auto it = script_.find("*"); it != script_.end() && it->is_string()) return it->get<std::string>();
  throw BackendError("mock script has no response for pair '" + request.pair_id + "' (" + request.pass + ")");
}

std::vector<MockBackend::Call> MockBackend::calls() const {
  std::lock_guard lock(mutex_);
  return calls_;
}

HttpConfig HttpConfig::from_env() {
  auto env = [](const char* name) -> std::string {
    const char* v = std::getenv(name);
    return v ? v : "";
  };
  HttpConfig c;
  c.base_url = env("LLM_API_BASE");
  c.api_key = env("LLM_API_KEY");
  c.model = env("LLM_MODEL");
  if (c.base_url.empty()) throw ConfigError("LLM_API_BASE is not set");
  if (c.model.empty()) throw ConfigError("LLM_MODEL is not set");
  return c;
}

HttpBackend::HttpBackend(HttpConfig config, Sleeper sleeper)
    : config_(std::move(config)), sleep_(std::move(sleeper)) {
  if (!sleep_) sleep_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  if (config_.retry.max_attempts < 1) throw ConfigError("retry policy needs at least one attempt");

  const auto scheme_end = config_.base_url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("base URL '" + config_.base_url + "' has no scheme");
  const auto path_start = config_.base_url.find('/', scheme_end + 3);
  scheme_host_port_ = config_.base_url.substr(0, path_start);
  std::string prefix = path_start == std::string::npos ? "" : config_.base_url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  path_ = prefix + "/chat/completions";
}

json HttpBackend::request_body(const std::string& model, const ChatRequest& request) {
  return {{"model", model},
          {"messages", to_json(request.messages)},
          {"temperature", request.params.temperature},
          {"top_p", request.params.top_p},
          {"max_tokens", request.params.max_new_tokens}};
}

std::string HttpBackend::complete(const ChatRequest& request) {
  const std::string body = request_body(config_.model, request).dump();
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  int last_status = 0;
  std::string last_error;
  auto delay = config_.retry.base_delay;
  for (int attempt = 1; attempt <= config_.retry.max_attempts; ++attempt) {
    httplib::Client client(scheme_host_port_);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    client.set_write_timeout(config_.timeout);

    auto res = client.Post(path_, headers, body, "application/json");
    if (!res) {
      last_status = 0;
      last_error = httplib::to_string(res.error());
    } else if (res->status == 401 || res->status == 403) {
      throw CredentialError("backend rejected credentials (HTTP " + std::to_string(res->status) + ")", res->status);
    } else if (res->status >= 200 && res->status < 300) {
      try {
        const json doc = json::parse(res->body);
        return doc.at("choices").at(0).at("message").at("content").get<std::string>();
      } catch (const json::exception& e) {
        throw BackendError(std::string("malformed chat completion response: ") + e.what(), res->status);
      }
    } else if (res->status == 429 || res->status >= 500) {
      last_status = res->status;
      last_error = "HTTP " + std::to_string(res->status);
    } else {
      throw BackendError("backend returned HTTP " + std::to_string(res->status), res->status);
    }

    if (attempt == config_.retry.max_attempts) break;
    spdlog::warn("pair {}: attempt {} failed ({}), retrying in {} ms", request.pair_id, attempt, last_error,
                 delay.count());
    sleep_(delay);
    delay = std::chrono::milliseconds(
        static_cast<std::chrono::milliseconds::rep>(std::llround(static_cast<double>(delay.count()) * config_.retry.factor)));
  }
  throw BackendError("backend failed after " + std::to_string(config_.retry.max_attempts) + " attempts: " + last_error,
                     last_status);
}

}  // namespace conflate
