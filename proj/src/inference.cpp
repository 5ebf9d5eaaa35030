#include "conflate/inference.hpp"

#include <chrono>

#include "conflate/error.hpp"

namespace conflate {

using nlohmann::json;

json to_json(const Exchange& e) {
  json j{{"pair_id", e.pair_id},
         {"pass", e.pass},
         {"backend", e.backend},
         {"request", to_json(e.request)},
         {"response", e.response},
         {"label", e.label ? json(*e.label) : json(nullptr)},
         {"parse_failure", !e.label.has_value()},
         {"latency_ms", e.latency_ms}};
  if (!e.error.empty()) j["error"] = e.error;
  return j;
}

Exchange exchange(ChatBackend& backend, ChatRequest request) {
  request.params.validate();
  Exchange e;
  e.pair_id = request.pair_id;
  e.pass = request.pass;
  e.backend = backend.id();
  const auto start = std::chrono::steady_clock::now();
  try {
    e.response = backend.complete(request);
    e.label = parse_label(e.response);
  } catch (const CredentialError&) {
    throw;  // every later request would fail the same way
  } catch (const BackendError& err) {
    e.error = err.what();
  }
  if (!backend.deterministic()) {
    e.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  }
  e.request = std::move(request.messages);
  return e;
}

std::string_view to_string(FailurePolicy policy) {
  return policy == FailurePolicy::abstain ? "abstain" : "incorrect";
}

FailurePolicy failure_policy_from_string(std::string_view name) {
  if (name == "incorrect") return FailurePolicy::incorrect;
  if (name == "abstain") return FailurePolicy::abstain;
  throw ValidationError("unknown failure policy '" + std::string(name) + "'");
}

LlmEval score(const std::vector<std::optional<int>>& parsed, const std::vector<int>& labels, FailurePolicy policy) {
  if (parsed.size() != labels.size()) throw ValidationError("answers and labels differ in length");
  LlmEval out;
  std::vector<int> preds, gold;
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    if (parsed[i]) {
      preds.push_back(*parsed[i]);
      gold.push_back(labels[i]);
      continue;
    }
    ++out.parse_failures;
    if (policy == FailurePolicy::abstain) {
      ++out.abstained;
    } else {
      preds.push_back(1 - labels[i]);
      gold.push_back(labels[i]);
    }
  }
  if (!gold.empty()) out.eval = evaluate(preds, gold);
  return out;
}

json to_json(const LlmEval& e) {
  json j = to_json(e.eval);
  j["parse_failures"] = e.parse_failures;
  j["abstained"] = e.abstained;
  return j;
}

InferenceResult run_inference(const std::vector<PairRecord>& pairs, const PromptSpec& spec,
                              const PromptTemplates& templates, const FewShotExamples* fewshot,
                              const GenerationParams& params, ChatBackend& backend, const InferenceOptions& options) {
  if (pairs.empty()) throw ValidationError("no pairs to classify");
  params.validate();

  // Build every prompt up front so template and feature errors surface before
  // any request is sent.
  std::vector<std::vector<ChatMessage>> prompts;
  prompts.reserve(pairs.size());
  for (const auto& p : pairs) prompts.push_back(build_prompt(p, spec, templates, fewshot));

  InferenceResult result;
  result.exchanges = parallel_map<Exchange>(pairs.size(), options.in_flight, [&](std::size_t i) {
    return exchange(backend, {pairs[i].pair_id, "classify", prompts[i], params});
  });

  const bool labeled = std::all_of(pairs.begin(), pairs.end(), [](const auto& p) { return p.label.has_value(); });
  if (labeled) {
    std::vector<std::optional<int>> parsed;
    std::vector<int> labels;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      parsed.push_back(result.exchanges[i].label);
      labels.push_back(*pairs[i].label);
    }
    result.eval = score(parsed, labels, options.policy);
  }
  return result;
}

}  // namespace conflate
