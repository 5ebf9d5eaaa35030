#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "conflate/llm.hpp"

namespace conflate {

struct ChatRequest {
  std::string pair_id;
  std::string pass;  // "classify", "review" or "refine"
  std::vector<ChatMessage> messages;
  GenerationParams params;
};

// Chat-completion backend. Implementations must be safe to call from several
// threads at once.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;

  // Returns the raw completion text. Throws BackendError (or CredentialError).
  virtual std::string complete(const ChatRequest& request) = 0;
  virtual std::string id() const = 0;

  // Deterministic backends get latency recorded as 0 so logs are reproducible.
  virtual bool deterministic() const { return false; }
};

// Scripted responses. The script is a JSON object; lookup order for a request:
//   script[pair_id][pass], script[pair_id] (when a string),
//   script["prompt:" + prompt_hash(messages)], script["*"].
// A request with no match raises BackendError.
class MockBackend : public ChatBackend {
 public:
  struct Call {
    std::string pair_id;
    std::string pass;
  };

  explicit MockBackend(nlohmann::json script);
  static std::unique_ptr<MockBackend> from_file(const std::filesystem::path& path);

  std::string complete(const ChatRequest& request) override;
  std::string id() const override { return "mock"; }
  bool deterministic() const override { return true; }

  std::vector<Call> calls() const;

 private:
  nlohmann::json script_;
  mutable std::mutex mutex_;
  std::vector<Call> calls_;
};

struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds base_delay{1000};
  double factor = 2.0;
};

struct HttpConfig {
  std::string base_url;  // e.g. https://api.openai.com/v1
  std::string model;
  std::string api_key;   // empty: no Authorization header
  RetryPolicy retry;
  std::chrono::seconds timeout{120};

  // LLM_API_BASE, LLM_API_KEY, LLM_MODEL.
  static HttpConfig from_env();
};

// OpenAI-compatible POST {base_url}/chat/completions. Transport failures,
// 429 and 5xx are retried with exponential backoff; 401/403 raise
// CredentialError at once; any other status is a BackendError.
class HttpBackend : public ChatBackend {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  explicit HttpBackend(HttpConfig config, Sleeper sleeper = {});

  std::string complete(const ChatRequest& request) override;
  std::string id() const override { return "http:" + config_.model; }

  static nlohmann::json request_body(const std::string& model, const ChatRequest& request);

 private:
  HttpConfig config_;
  Sleeper sleep_;
  std::string scheme_host_port_;
  std::string path_;
};

}  // namespace conflate
