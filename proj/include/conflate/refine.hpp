#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "conflate/heuristics.hpp"
#include "conflate/inference.hpp"

namespace conflate {

// Where the answer under review comes from.
struct InitialSource {
  enum class Kind { random, heuristic };

  Kind kind = Kind::random;
  std::uint64_t seed = 0;             // random
  std::optional<HeuristicSpec> spec;  // heuristic

  static InitialSource random(std::uint64_t seed) { return {Kind::random, seed, std::nullopt}; }
  static InitialSource heuristic(HeuristicSpec spec) { return {Kind::heuristic, 0, std::move(spec)}; }
};

// Seeded fair coin per pair, or heuristic predictions. Heuristic sources need
// features on every pair.
std::vector<int> make_initial(const std::vector<PairRecord>& pairs, const InitialSource& source);

struct RefineRecord {
  std::string pair_id;
  int initial = 0;
  std::string review;
  std::optional<int> final_label;
  Exchange review_exchange;
  std::optional<Exchange> refine_exchange;  // absent when the review pass failed
  std::string error;
};

nlohmann::json to_json(const RefineRecord& r);

// One review pass, then one refine pass, in that order and never repeated.
// The review sees the initial prompt plus the initial answer; the refine
// pass sees the same plus the review text and must answer 0 or 1.
RefineRecord review_and_refine(const PairRecord& pair, int initial, const PromptSpec& spec,
                               const PromptTemplates& templates, const FewShotExamples* fewshot,
                               const GenerationParams& params, ChatBackend& backend);

struct RefineResult {
  std::vector<RefineRecord> records;  // input order
  std::optional<LlmEval> eval;        // final labels vs gold, when labeled
  std::optional<EvalReport> initial_eval;
};

RefineResult run_refine(const std::vector<PairRecord>& pairs, const std::vector<int>& initial, const PromptSpec& spec,
                        const PromptTemplates& templates, const FewShotExamples* fewshot,
                        const GenerationParams& params, ChatBackend& backend, const InferenceOptions& options = {});

}  // namespace conflate
