#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "conflate/backend.hpp"
#include "conflate/heuristics.hpp"
#include "conflate/llm.hpp"

namespace conflate {

// Runs fn(i) for i in [0, n) on at most `in_flight` threads. Each result lands
// at its own index, so output order never depends on completion order. The
// first exception thrown by fn stops further work and is rethrown once the
// workers have joined.
template <typename Result>
std::vector<Result> parallel_map(std::size_t n, std::size_t in_flight, const std::function<Result(std::size_t)>& fn) {
  std::vector<Result> out(n);
  const std::size_t workers = std::max<std::size_t>(1, std::min(in_flight, n));
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i; !failed && (i = next.fetch_add(1)) < n;) {
      try {
        out[i] = fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        failed = true;
      }
    }
  };
  std::vector<std::thread> threads;
  for (std::size_t w = 1; w < workers; ++w) threads.emplace_back(work);
  work();
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

// One logged model call.
struct Exchange {
  std::string pair_id;
  std::string pass;
  std::string backend;
  std::vector<ChatMessage> request;
  std::string response;
  std::optional<int> label;
  std::string error;  // backend failure, empty on success
  double latency_ms = 0;
};

nlohmann::json to_json(const Exchange& e);

// Sends one request and parses a label from the reply. Backend errors are
// captured in the Exchange rather than thrown.
Exchange exchange(ChatBackend& backend, ChatRequest request);

enum class FailurePolicy { incorrect, abstain };

std::string_view to_string(FailurePolicy policy);
FailurePolicy failure_policy_from_string(std::string_view name);

struct LlmEval {
  EvalReport eval;
  std::size_t parse_failures = 0;
  std::size_t abstained = 0;
};

// Scores parsed labels against gold labels. Under `incorrect` an unparsed
// answer counts as the wrong class; under `abstain` it leaves the denominator.
LlmEval score(const std::vector<std::optional<int>>& parsed, const std::vector<int>& labels, FailurePolicy policy);

nlohmann::json to_json(const LlmEval& e);

struct InferenceOptions {
  std::size_t in_flight = 4;
  FailurePolicy policy = FailurePolicy::incorrect;
};

struct InferenceResult {
  std::vector<Exchange> exchanges;  // input order
  std::optional<LlmEval> eval;      // present when every pair is labeled
};

InferenceResult run_inference(const std::vector<PairRecord>& pairs, const PromptSpec& spec,
                              const PromptTemplates& templates, const FewShotExamples* fewshot,
                              const GenerationParams& params, ChatBackend& backend,
                              const InferenceOptions& options = {});

}  // namespace conflate
