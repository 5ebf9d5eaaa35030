#include "conflate/refine.hpp"

#include "conflate/error.hpp"
#include "conflate/rng.hpp"

namespace conflate {

using nlohmann::json;

std::vector<int> make_initial(const std::vector<PairRecord>& pairs, const InitialSource& source) {
  std::vector<int> out;
  out.reserve(pairs.size());
  if (source.kind == InitialSource::Kind::random) {
    Rng rng(source.seed);
    for (std::size_t i = 0; i < pairs.size(); ++i) out.push_back(rng.bernoulli(0.5) ? 1 : 0);
    return out;
  }
  if (!source.spec) throw ValidationError("heuristic initial source needs a heuristic spec");
  for (const auto& p : pairs) {
    if (!p.features) throw ValidationError("pair '" + p.pair_id + "' has no features for heuristic initialization");
    out.push_back(predict(*p.features, *source.spec));
  }
  return out;
}

json to_json(const RefineRecord& r) {
  json j{{"pair_id", r.pair_id},
         {"initial", r.initial},
         {"review", r.review},
         {"final", r.final_label ? json(*r.final_label) : json(nullptr)},
         {"parse_failure", !r.final_label.has_value()},
         {"review_exchange", to_json(r.review_exchange)},
         {"refine_exchange", r.refine_exchange ? to_json(*r.refine_exchange) : json(nullptr)}};
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

RefineRecord review_and_refine(const PairRecord& pair, int initial, const PromptSpec& spec,
                               const PromptTemplates& templates, const FewShotExamples* fewshot,
                               const GenerationParams& params, ChatBackend& backend) {
  if (initial != 0 && initial != 1) throw ValidationError("initial answer must be 0 or 1");
  const auto prompt = build_prompt(pair, spec, templates, fewshot);
  const std::string initial_prompt = prompt.back().content;
  const std::string answer = std::to_string(initial);

  RefineRecord rec;
  rec.pair_id = pair.pair_id;
  rec.initial = initial;

  std::vector<ChatMessage> review_msgs{
      prompt.front(),
      {Role::user, PromptTemplates::render(templates.get("review"),
                                           {{"initial_prompt", initial_prompt}, {"initial_answer", answer}})}};
  rec.review_exchange = exchange(backend, {pair.pair_id, "review", review_msgs, params});
  if (!rec.review_exchange.error.empty()) {
    rec.error = "review pass failed: " + rec.review_exchange.error;
    return rec;
  }
  rec.review = rec.review_exchange.response;

  std::vector<ChatMessage> refine_msgs{
      prompt.front(),
      {Role::user, PromptTemplates::render(templates.get("refine"), {{"initial_prompt", initial_prompt},
                                                                     {"initial_answer", answer},
                                                                     {"review", rec.review}})}};
  rec.refine_exchange = exchange(backend, {pair.pair_id, "refine", refine_msgs, params});
  rec.final_label = rec.refine_exchange->label;
  if (!rec.refine_exchange->error.empty()) rec.error = "refine pass failed: " + rec.refine_exchange->error;
  return rec;
}

RefineResult run_refine(const std::vector<PairRecord>& pairs, const std::vector<int>& initial, const PromptSpec& spec,
                        const PromptTemplates& templates, const FewShotExamples* fewshot,
                        const GenerationParams& params, ChatBackend& backend, const InferenceOptions& options) {
  if (pairs.empty()) throw ValidationError("no pairs to refine");
  if (initial.size() != pairs.size()) throw ValidationError("one initial answer per pair required");
  params.validate();
  for (const auto& p : pairs) build_prompt(p, spec, templates, fewshot);

  RefineResult result;
  result.records = parallel_map<RefineRecord>(pairs.size(), options.in_flight, [&](std::size_t i) {
    return review_and_refine(pairs[i], initial[i], spec, templates, fewshot, params, backend);
  });

  const bool labeled = std::all_of(pairs.begin(), pairs.end(), [](const auto& p) { return p.label.has_value(); });
  if (labeled) {
    std::vector<std::optional<int>> finals;
    std::vector<int> labels;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      finals.push_back(result.records[i].final_label);
      labels.push_back(*pairs[i].label);
    }
    result.eval = score(finals, labels, options.policy);
    result.initial_eval = evaluate(initial, labels);
  }
  return result;
}

}  // namespace conflate
