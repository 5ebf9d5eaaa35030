#include "conflate/cli.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "conflate/backend.hpp"
#include "conflate/error.hpp"
#include "conflate/refine.hpp"
#include "conflate/report.hpp"
#include "conflate/synth.hpp"

namespace conflate::cli {

using nlohmann::json;

namespace {

template <typename T>
T field(const json& obj, const char* key, T fallback) {
  auto it = obj.find(key);
  return it == obj.end() ? fallback : it->get<T>();
}

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> known, const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ConfigError("unknown config key '" + where + key + "'");
  }
}

json grids_to_json(const ThresholdGrids& grids) {
  json out = json::object();
  for (const auto& [kind, values] : grids) out[std::string(1, kind_letter(kind))] = values;
  return out;
}

json generation_to_json(const GenerationParams& g) {
  return {{"temperature", g.temperature}, {"top_p", g.top_p}, {"max_new_tokens", g.max_new_tokens}};
}

std::vector<HeuristicKind> kinds_from_strings(const std::vector<std::string>& names) {
  std::vector<HeuristicKind> out;
  for (const auto& n : names) out.push_back(kind_from_string(n));
  return out;
}

json kinds_to_json(const std::vector<HeuristicKind>& kinds) {
  json out = json::array();
  for (auto k : kinds) out.push_back(std::string(1, kind_letter(k)));
  return out;
}

// Hash of everything read from disk, in the order given.
std::string input_hash(const std::vector<std::string>& paths) {
  std::string joined;
  for (const auto& p : paths) {
    joined += fnv1a_hex(read_file(p));
    joined += '\n';
  }
  return fnv1a_hex(joined);
}

struct Envelope {
  std::string command;
  json settings;  // command-specific settings, path free
  std::vector<std::string> inputs;
  json seeds = json::object();
};

json make_report(const RunConfig& cfg, const Envelope& env, const json& body) {
  json hashed{{"config", config_to_json(cfg)}, {"command", env.command}, {"settings", env.settings}};
  json report{{"schema_version", kReportSchemaVersion},
              {"command", env.command},
              {"config_hash", fnv1a_hex(hashed.dump())},
              {"input_hash", input_hash(env.inputs)},
              {"seeds", env.seeds},
              {"settings", env.settings}};
  for (const auto& [k, v] : body.items()) {
    if (!report.contains(k)) report[k] = v;
  }
  return report;
}

std::map<std::pair<std::string, std::string>, int> read_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open labels file '" + path + "'");
  std::map<std::pair<std::string, std::string>, int> labels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      const int label = j.at("label").get<int>();
      if (label != 0 && label != 1) throw ValidationError("label must be 0 or 1");
      labels[{j.at("left_id").get<std::string>(), j.at("right_id").get<std::string>()}] = label;
    } catch (const json::exception& e) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return labels;
}

void write_labels(const std::string& path, const std::vector<PairRecord>& pairs) {
  std::ostringstream out;
  for (const auto& p : pairs) {
    out << json{{"left_id", p.left_id}, {"right_id", p.right_id}, {"label", p.label.value_or(0)}}.dump() << '\n';
  }
  write_file(path, out.str());
}

template <typename T>
void write_jsonl(const std::string& path, const std::vector<T>& items) {
  std::ostringstream out;
  for (const auto& item : items) out << to_json(item).dump() << '\n';
  write_file(path, out.str());
}

std::vector<int> gold_labels(const std::vector<PairRecord>& pairs) {
  std::vector<int> labels;
  for (const auto& p : pairs) {
    if (!p.label) throw ValidationError("pair '" + p.pair_id + "' has no label");
    labels.push_back(*p.label);
  }
  return labels;
}

bool all_labeled(const std::vector<PairRecord>& pairs) {
  return std::all_of(pairs.begin(), pairs.end(), [](const auto& p) { return p.label.has_value(); });
}

// Values a flag may override; each is applied only when given.
struct Overrides {
  std::optional<std::string> task, crs, angle_mode, mode, shots, backend, mock_script, policy;
  std::optional<double> join_buffer, overlap_buffer, temperature, top_p;
  std::optional<int> max_tokens;
  std::optional<std::size_t> in_flight;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> heuristics;
  std::optional<std::string> grids_file;

  void apply(RunConfig& cfg) const {
    if (task) cfg.task = task_from_string(*task);
    if (crs) cfg.crs = crs_mode_from_string(*crs);
    if (angle_mode) cfg.features.angle_mode = angle_mode_from_string(*angle_mode);
    if (mode) cfg.prompt.mode = prompt_mode_from_string(*mode);
    if (shots) cfg.prompt.shots = shots_from_string(*shots);
    if (backend) cfg.backend = *backend;
    if (mock_script) cfg.mock_script = *mock_script;
    if (policy) cfg.policy = failure_policy_from_string(*policy);
    if (join_buffer) cfg.join_buffer_m = *join_buffer;
    if (overlap_buffer) cfg.features.overlap_buffer_m = *overlap_buffer;
    if (temperature || top_p || max_tokens) {
      auto g = cfg.generation.value_or(GenerationParams{});
      if (temperature) g.temperature = *temperature;
      if (top_p) g.top_p = *top_p;
      if (max_tokens) g.max_new_tokens = *max_tokens;
      cfg.generation = g;
    }
    if (in_flight) cfg.in_flight = *in_flight;
    if (seed) cfg.seed = *seed;
    if (!heuristics.empty()) cfg.prompt.heuristic_kinds = kinds_from_strings(heuristics);
    if (grids_file) cfg.grids = grids_from_json(read_json_file(*grids_file));
    cfg.prompt.task = cfg.task;
  }
};

// Options and state for one invocation. Options bind into these members, then
// the selected subcommand's handler reads them.
struct Invocation {
  std::ostream& out;
  std::ostream& err;
  std::string config_file;
  Overrides ov;
  RunConfig cfg;

  // paths
  std::string roads, sidewalks, set_a, set_b, labels_in, pairs_in, pairs_out, report_out, log_out;
  std::string train_out, val_out, test_out, train_in, sweep_in, predictions_in, fewshot_pool, templates_dir;
  std::string instances_in, answers_in, roads_out, sidewalks_out, labels_out;
  // other settings
  std::vector<std::string> road_types;
  bool all_road_types = false;
  std::vector<double> ratios;
  std::optional<std::uint64_t> split_seed;
  std::string spec_text, which = "best", field = "prediction", init = "random";
  std::optional<std::string> positive_id, negative_id;
  std::string synth_task;
  std::size_t synth_n = 50;
  std::uint64_t synth_seed = 0;
  bool no_truth = false;
  PlantedPairConfig planted;
  std::string planted_rule = "p(5)&c(2)";

  Invocation(std::ostream& o, std::ostream& e) : out(o), err(e) {}

  void resolve_config() {
    cfg = config_file.empty() ? RunConfig{} : config_from_json(read_json_file(config_file));
    ov.apply(cfg);
    validate(cfg.features);
    if (split_seed) cfg.split.seed = *split_seed;
    if (!ratios.empty()) {
      cfg.split.train = ratios.at(0);
      cfg.split.val = ratios.at(1);
      cfg.split.test = ratios.at(2);
    }
  }

  void emit(const Envelope& env, const json& body) {
    if (report_out.empty()) return;
    write_json_file(report_out, make_report(cfg, env, body));
  }

  std::unique_ptr<ChatBackend> backend(Envelope& env) const {
    if (cfg.backend == "mock") {
      if (cfg.mock_script.empty()) throw ConfigError("the mock backend needs --mock-script");
      env.inputs.push_back(cfg.mock_script);
      return MockBackend::from_file(cfg.mock_script);
    }
    if (cfg.backend == "http") return std::make_unique<HttpBackend>(HttpConfig::from_env());
    throw ConfigError("unknown backend '" + cfg.backend + "' (expected mock or http)");
  }

  PromptTemplates templates() const {
    return PromptTemplates::load(templates_dir.empty() ? PromptTemplates::default_dir()
                                                         : std::filesystem::path(templates_dir));
  }

  std::optional<FewShotExamples> fewshot(Envelope& env) const {
    if (cfg.prompt.shots != Shots::few) return std::nullopt;
    if (fewshot_pool.empty()) throw ValidationError("few-shot prompting needs --fewshot-pool");
    env.inputs.push_back(fewshot_pool);
    return select_fewshot(read_pairs_file(fewshot_pool), positive_id, negative_id);
  }

  json prompt_settings(const GenerationParams& g) const {
    return {{"mode", to_string(cfg.prompt.mode)},
            {"shots", to_string(cfg.prompt.shots)},
            {"task", to_string(cfg.task)},
            {"heuristics", kinds_to_json(cfg.prompt.effective_kinds())},
            {"generation", generation_to_json(g)},
            {"backend", cfg.backend},
            {"in_flight", cfg.in_flight},
            {"failure_policy", to_string(cfg.policy)},
            {"positive_id", positive_id ? json(*positive_id) : json(nullptr)},
            {"negative_id", negative_id ? json(*negative_id) : json(nullptr)}};
  }

  HeuristicSpec chosen_spec(Envelope& env) const {
    if (!spec_text.empty() && !sweep_in.empty()) throw ValidationError("give either --spec or --sweep, not both");
    if (!spec_text.empty()) return HeuristicSpec::parse(spec_text);
    if (sweep_in.empty()) throw ValidationError("a heuristic is needed: pass --spec or --sweep");
    env.inputs.push_back(sweep_in);
    const auto report = sweep_from_json(read_json_file(sweep_in));
    if (which == "best") return report.best_spec();
    if (which == "worst") return report.worst().spec;
    throw ValidationError("--which must be best or worst");
  }

  // ---- subcommands ----

  int candidates_join() {
    Envelope env{"candidates join", {}, {roads, sidewalks}};
    auto road_set = read_geojson_file(roads, cfg.crs);
    const auto walk_set = read_geojson_file(sidewalks, cfg.crs);
    const std::size_t n_roads = road_set.features.size();
    if (!all_road_types) {
      std::set<std::string> allowed(road_types.begin(), road_types.end());
      road_set = filter_roads(road_set, road_types.empty() ? default_road_types() : allowed);
    }
    auto pairs = join_candidates(road_set, walk_set, cfg.join_buffer_m);
    return finish_candidates(env, pairs, {{"n_roads", n_roads},
                                          {"n_roads_kept", road_set.features.size()},
                                          {"n_sidewalks", walk_set.features.size()}},
                             json{{"join_buffer_m", cfg.join_buffer_m},
                                  {"crs", to_string(cfg.crs)},
                                  {"road_types", all_road_types ? json("all")
                                                 : road_types.empty() ? json(default_road_types())
                                                                      : json(road_types)}});
  }

  int candidates_union() {
    Envelope env{"candidates union", {}, {set_a, set_b}};
    const auto a = read_geojson_file(set_a, cfg.crs);
    const auto b = read_geojson_file(set_b, cfg.crs);
    auto pairs = union_candidates(a, b);
    return finish_candidates(env, pairs, {{"n_a", a.features.size()}, {"n_b", b.features.size()}},
                             json{{"crs", to_string(cfg.crs)}});
  }

  int finish_candidates(Envelope& env, std::vector<PairRecord>& pairs, json counts, json settings) {
    std::size_t labeled = 0;
    if (!labels_in.empty()) {
      env.inputs.push_back(labels_in);
      labeled = attach_labels(pairs, read_labels(labels_in));
    }
    const auto positives = std::count_if(pairs.begin(), pairs.end(), [](const auto& p) { return p.label == 1; });
    write_pairs_file(pairs_out, pairs);
    env.settings = std::move(settings);
    counts["n_pairs"] = pairs.size();
    counts["n_labeled"] = labeled;
    counts["n_positive"] = positives;
    emit(env, counts);
    out << env.command << ": " << pairs.size() << " pairs (" << labeled << " labeled) -> " << pairs_out << '\n';
    return 0;
  }

  int features() {
    Envelope env{"features", {}, {pairs_in}};
    env.settings = {{"overlap_buffer_m", cfg.features.overlap_buffer_m},
                    {"angle_mode", to_string(cfg.features.angle_mode)},
                    {"feature_definition", kFeatureDefinition}};
    const auto batch = compute_features_batch(read_pairs_file(pairs_in), cfg.features);
    write_pairs_file(pairs_out, batch.records);
    json errors = json::array();
    for (const auto& e : batch.errors) {
      spdlog::warn("pair {}: {}", e.pair_id, e.message);
      errors.push_back({{"pair_id", e.pair_id}, {"message", e.message}});
    }
    emit(env, {{"n_pairs", batch.records.size() + batch.errors.size()},
               {"n_computed", batch.records.size()},
               {"errors", errors}});
    out << "features: " << batch.records.size() << " computed, " << batch.errors.size() << " failed -> " << pairs_out
        << '\n';
    return 0;
  }

  int split() {
    Envelope env{"split", {}, {pairs_in}};
    validate(cfg.split);
    env.settings = {{"train", cfg.split.train}, {"val", cfg.split.val}, {"test", cfg.split.test}};
    env.seeds = {{"split", cfg.split.seed}};
    const auto parts = split_dataset(read_pairs_file(pairs_in), cfg.split);
    write_pairs_file(train_out, parts.train);
    write_pairs_file(val_out, parts.val);
    write_pairs_file(test_out, parts.test);
    emit(env, {{"n_train", parts.train.size()}, {"n_val", parts.val.size()}, {"n_test", parts.test.size()}});
    out << "split: " << parts.train.size() << "/" << parts.val.size() << "/" << parts.test.size() << '\n';
    return 0;
  }

  int sweep_cmd() {
    Envelope env{"sweep", {}, {train_in}};
    const auto grids = cfg.effective_grids();
    env.settings = {{"task", to_string(cfg.task)}, {"grids", grids_to_json(grids)}};
    const auto pairs = read_pairs_file(train_in);
    const auto report = sweep(pairs, enumerate_specs(cfg.task, grids), cfg.task);
    json body = to_json(report);
    body["n_train"] = pairs.size();
    emit(env, body);
    out << "sweep: " << report.results.size() << " specs, best " << report.best_spec().to_string() << " (accuracy "
        << round_sig(report.best_accuracy) << ")\n";
    return 0;
  }

  int classify() {
    Envelope env{"classify", {}, {pairs_in}};
    const auto spec = chosen_spec(env);
    env.settings = {{"spec", spec.to_string()}, {"which", sweep_in.empty() ? json(nullptr) : json(which)}};
    const auto pairs = read_pairs_file(pairs_in);
    std::vector<int> preds;
    std::ostringstream lines;
    for (const auto& p : pairs) {
      if (!p.features) throw ValidationError("pair '" + p.pair_id + "' has no features; run the features command");
      preds.push_back(predict(*p.features, spec));
      json line{{"pair_id", p.pair_id}, {"prediction", preds.back()}};
      if (p.label) line["label"] = *p.label;
      lines << line.dump() << '\n';
    }
    if (!pairs_out.empty()) write_file(pairs_out, lines.str());
    json body{{"spec", spec.to_string()}, {"n", pairs.size()}};
    if (!pairs.empty() && all_labeled(pairs)) {
      const auto eval = evaluate(preds, gold_labels(pairs));
      body["eval"] = to_json(eval);
      out << "classify: " << spec.to_string() << " accuracy " << round_sig(eval.accuracy) << " on " << pairs.size()
          << " pairs\n";
    } else {
      out << "classify: " << spec.to_string() << " on " << pairs.size() << " pairs\n";
    }
    emit(env, body);
    return 0;
  }

  int eval_cmd() {
    Envelope env{"eval", {}, {pairs_in}};
    const auto pairs = read_pairs_file(pairs_in);
    const auto labels = gold_labels(pairs);
    std::vector<std::optional<int>> answers;
    if (!predictions_in.empty()) {
      if (!spec_text.empty() || !sweep_in.empty()) throw ValidationError("give --predictions or a heuristic, not both");
      env.inputs.push_back(predictions_in);
      env.settings = {{"field", field}, {"failure_policy", to_string(cfg.policy)}};
      std::map<std::string, std::optional<int>> by_id;
      std::ifstream in(predictions_in);
      std::string line;
      while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
          j = json::parse(line);
        } catch (const json::parse_error& e) {
          throw ParseError(predictions_in + ": " + e.what());
        }
        const auto id = j.at("pair_id").get<std::string>();
        const auto v = j.find(field);
        by_id[id] = (v != j.end() && v->is_number_integer()) ? std::optional<int>(v->get<int>()) : std::nullopt;
      }
      for (const auto& p : pairs) {
        auto it = by_id.find(p.pair_id);
        answers.push_back(it == by_id.end() ? std::nullopt : it->second);
      }
    } else {
      const auto spec = chosen_spec(env);
      env.settings = {{"spec", spec.to_string()}, {"failure_policy", to_string(cfg.policy)}};
      for (const auto& p : pairs) {
        if (!p.features) throw ValidationError("pair '" + p.pair_id + "' has no features; run the features command");
        answers.emplace_back(predict(*p.features, spec));
      }
    }
    const auto result = score(answers, labels, cfg.policy);
    emit(env, {{"eval", to_json(result)}});
    out << "eval: accuracy " << round_sig(result.eval.accuracy) << " on " << result.eval.n << " pairs ("
        << result.parse_failures << " unanswered)\n";
    return 0;
  }

  int prompt() {
    Envelope env{"prompt", {}, {pairs_in}};
    const auto params = cfg.generation.value_or(GenerationParams::classification());
    env.settings = prompt_settings(params);
    const auto pairs = read_pairs_file(pairs_in);
    const auto shots = fewshot(env);
    auto be = backend(env);
    const auto tmpl = templates();
    const auto result = run_inference(pairs, cfg.prompt, tmpl, shots ? &*shots : nullptr, params, *be,
                                      {cfg.in_flight, cfg.policy});
    if (!log_out.empty()) write_jsonl(log_out, result.exchanges);
    std::size_t parse_failures = 0, backend_errors = 0;
    for (const auto& e : result.exchanges) {
      parse_failures += !e.label.has_value();
      backend_errors += !e.error.empty();
    }
    json body{{"n", pairs.size()}, {"parse_failures", parse_failures}, {"backend_errors", backend_errors}};
    if (result.eval) body["eval"] = to_json(*result.eval);
    emit(env, body);
    out << "prompt: " << pairs.size() << " pairs";
    if (result.eval) out << ", accuracy " << round_sig(result.eval->eval.accuracy);
    out << '\n';
    return backend_failures(backend_errors);
  }

  int refine() {
    Envelope env{"refine", {}, {pairs_in}};
    const auto params = cfg.generation.value_or(GenerationParams::review());
    env.settings = prompt_settings(params);
    const auto pairs = read_pairs_file(pairs_in);

    InitialSource source;
    if (init == "random") {
      source = InitialSource::random(cfg.seed);
      env.seeds = {{"initial", cfg.seed}};
      env.settings["initial"] = "random";
    } else if (init == "heuristic") {
      const auto spec = chosen_spec(env);
      source = InitialSource::heuristic(spec);
      env.settings["initial"] = "heuristic";
      env.settings["initial_spec"] = spec.to_string();
    } else {
      throw ValidationError("--init must be random or heuristic");
    }
    const auto initial = make_initial(pairs, source);

    const auto shots = fewshot(env);
    auto be = backend(env);
    const auto tmpl = templates();
    const auto result = run_refine(pairs, initial, cfg.prompt, tmpl, shots ? &*shots : nullptr, params, *be,
                                   {cfg.in_flight, cfg.policy});
    if (!log_out.empty()) write_jsonl(log_out, result.records);

    std::size_t changed = 0, failed = 0;
    for (const auto& r : result.records) {
      changed += r.final_label && *r.final_label != r.initial;
      failed += !r.error.empty();
    }
    json body{{"n", pairs.size()}, {"changed", changed}, {"failed", failed}};
    if (result.initial_eval) body["initial_eval"] = to_json(*result.initial_eval);
    if (result.eval) body["eval"] = to_json(*result.eval);
    emit(env, body);
    out << "refine: " << pairs.size() << " pairs, " << changed << " answers changed";
    if (result.eval) out << ", accuracy " << round_sig(result.initial_eval->accuracy) << " -> "
                         << round_sig(result.eval->eval.accuracy);
    out << '\n';
    return backend_failures(failed);
  }

  // Per-pair backend failures do not stop a run, but they set the exit code.
  int backend_failures(std::size_t count) {
    if (count == 0) return 0;
    err << "backend error: " << count << " request(s) failed; see the log for details\n";
    return 2;
  }

  int synth_gen() {
    const auto kind = synth_kind_from_string(synth_task);
    const auto instances = generate(kind, synth_n, synth_seed);
    std::ostringstream buf;
    write_instances(buf, instances, !no_truth);
    write_file(pairs_out, buf.str());
    Envelope env{"synth gen", {{"task", synth_task}, {"n", synth_n}, {"truth", !no_truth}}, {}};
    env.seeds = {{"synth", synth_seed}};
    emit(env, {{"n", instances.size()}});
    out << "synth gen: " << instances.size() << " " << synth_task << " instances -> " << pairs_out << '\n';
    return 0;
  }

  int synth_grade() {
    Envelope env{"synth grade", {{"distance_tolerance", kDistanceTolerance}}, {instances_in, answers_in}};
    std::ifstream ins(instances_in), ans(answers_in);
    const auto instances = read_instances(ins);
    const auto answers = read_answers(ans);
    const auto report = grade(instances, answers);
    emit(env, to_json(report));
    out << "synth grade: accuracy " << round_sig(report.accuracy) << " on " << report.n << " instances\n";
    for (const auto& [kind, s] : report.per_kind) {
      out << "  " << to_string(kind) << ": " << s.correct << "/" << s.n << '\n';
    }
    return 0;
  }

  int synth_planted() {
    planted.rule = HeuristicSpec::parse(planted_rule);
    planted.seed = synth_seed;
    planted.features = cfg.features;
    const auto pairs = generate_planted_pairs(planted);
    if (!pairs_out.empty()) write_pairs_file(pairs_out, pairs);
    if (!roads_out.empty() || !sidewalks_out.empty() || !labels_out.empty()) {
      if (roads_out.empty() || sidewalks_out.empty() || labels_out.empty()) {
        throw ValidationError("--roads-out, --sidewalks-out and --labels-out go together");
      }
      const auto ex = export_planted(pairs);
      write_file(roads_out, serialize_geojson(ex.roads));
      write_file(sidewalks_out, serialize_geojson(ex.sidewalks));
      write_labels(labels_out, ex.labels);
    }
    const auto positives = std::count_if(pairs.begin(), pairs.end(), [](const auto& p) { return p.label == 1; });
    Envelope env{"synth planted",
                 {{"n", planted.n},
                  {"rule", planted.rule.to_string()},
                  {"positive_fraction", planted.positive_fraction},
                  {"angle_margin_deg", planted.angle_margin_deg},
                  {"distance_margin_m", planted.distance_margin_m},
                  {"area_margin", planted.area_margin}},
                 {}};
    env.seeds = {{"planted", synth_seed}};
    emit(env, {{"n", pairs.size()}, {"n_positive", positives}});
    out << "synth planted: " << pairs.size() << " pairs (" << positives << " positive)\n";
    return 0;
  }
};

void add_config_options(CLI::App* cmd, Invocation& inv) {
  cmd->add_option("--config", inv.config_file, "JSON config file; flags override its values")
      ->check(CLI::ExistingFile);
  cmd->add_option("--report", inv.report_out, "Write a JSON report here");
}

void add_prompt_options(CLI::App* cmd, Invocation& inv) {
  auto& ov = inv.ov;
  cmd->add_option("--pairs", inv.pairs_in, "Pair records (JSONL)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--task", ov.task, "join or union");
  cmd->add_option("--mode", ov.mode, "plain, hints or features");
  cmd->add_option("--shots", ov.shots, "zero or few");
  cmd->add_option("--heuristics", ov.heuristics, "Heuristic kinds described in hints/features mode (p, c, o)");
  cmd->add_option("--fewshot-pool", inv.fewshot_pool, "Labeled pairs to draw few-shot examples from")
      ->check(CLI::ExistingFile);
  cmd->add_option("--positive-id", inv.positive_id, "Pair id of the positive few-shot example");
  cmd->add_option("--negative-id", inv.negative_id, "Pair id of the negative few-shot example");
  cmd->add_option("--backend", ov.backend, "mock or http (http reads LLM_API_BASE, LLM_API_KEY, LLM_MODEL)");
  cmd->add_option("--mock-script", ov.mock_script, "Scripted responses for the mock backend")
      ->check(CLI::ExistingFile);
  cmd->add_option("--templates", inv.templates_dir, "Prompt template directory")->check(CLI::ExistingDirectory);
  cmd->add_option("--in-flight", ov.in_flight, "Maximum concurrent requests");
  cmd->add_option("--policy", ov.policy, "Unparseable answers: incorrect or abstain");
  cmd->add_option("--temperature", ov.temperature, "Sampling temperature");
  cmd->add_option("--top-p", ov.top_p, "Nucleus sampling mass");
  cmd->add_option("--max-tokens", ov.max_tokens, "Maximum new tokens per request");
  cmd->add_option("--log", inv.log_out, "Write the request log (JSONL) here");
  cmd->add_option("-o,--output", inv.report_out, "Write the JSON report here");
  cmd->add_option("--config", inv.config_file, "JSON config file; flags override its values")
      ->check(CLI::ExistingFile);
}

void add_heuristic_choice(CLI::App* cmd, Invocation& inv) {
  cmd->add_option("--spec", inv.spec_text, "Heuristic such as \"p(5)&c(2)\"");
  cmd->add_option("--sweep", inv.sweep_in, "Take the heuristic from a sweep report")->check(CLI::ExistingFile);
  cmd->add_option("--which", inv.which, "best or worst spec of the sweep report")
      ->check(CLI::IsMember({"best", "worst"}));
}

}  // namespace

RunConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  try {
    reject_unknown_keys(j, {"task", "crs", "join_buffer_m", "features", "split", "grids", "prompt", "generation",
                            "backend", "seed"},
                        "");
    RunConfig cfg;
    cfg.task = task_from_string(field<std::string>(j, "task", "join"));
    cfg.crs = crs_mode_from_string(field<std::string>(j, "crs", "geographic"));
    cfg.join_buffer_m = field(j, "join_buffer_m", cfg.join_buffer_m);
    if (auto it = j.find("features"); it != j.end()) {
      reject_unknown_keys(*it, {"overlap_buffer_m", "angle_mode"}, "features.");
      cfg.features.overlap_buffer_m = field(*it, "overlap_buffer_m", cfg.features.overlap_buffer_m);
      cfg.features.angle_mode = angle_mode_from_string(field<std::string>(*it, "angle_mode", "pairwise"));
    }
    if (auto it = j.find("split"); it != j.end()) {
      reject_unknown_keys(*it, {"train", "val", "test", "seed"}, "split.");
      cfg.split.train = field(*it, "train", cfg.split.train);
      cfg.split.val = field(*it, "val", cfg.split.val);
      cfg.split.test = field(*it, "test", cfg.split.test);
      cfg.split.seed = field(*it, "seed", cfg.split.seed);
    }
    if (auto it = j.find("grids"); it != j.end()) cfg.grids = grids_from_json(*it);
    if (auto it = j.find("prompt"); it != j.end()) {
      reject_unknown_keys(*it, {"mode", "shots", "heuristics"}, "prompt.");
      cfg.prompt.mode = prompt_mode_from_string(field<std::string>(*it, "mode", "plain"));
      cfg.prompt.shots = shots_from_string(field<std::string>(*it, "shots", "zero"));
      cfg.prompt.heuristic_kinds = kinds_from_strings(field(*it, "heuristics", std::vector<std::string>{}));
    }
    if (auto it = j.find("generation"); it != j.end()) {
      reject_unknown_keys(*it, {"temperature", "top_p", "max_new_tokens"}, "generation.");
      GenerationParams g;
      g.temperature = field(*it, "temperature", g.temperature);
      g.top_p = field(*it, "top_p", g.top_p);
      g.max_new_tokens = field(*it, "max_new_tokens", g.max_new_tokens);
      g.validate();
      cfg.generation = g;
    }
    if (auto it = j.find("backend"); it != j.end()) {
      reject_unknown_keys(*it, {"kind", "mock_script", "in_flight", "failure_policy"}, "backend.");
      cfg.backend = field<std::string>(*it, "kind", cfg.backend);
      cfg.mock_script = field<std::string>(*it, "mock_script", "");
      cfg.in_flight = field(*it, "in_flight", cfg.in_flight);
      cfg.policy = failure_policy_from_string(field<std::string>(*it, "failure_policy", "incorrect"));
    }
    cfg.seed = field(j, "seed", cfg.seed);
    cfg.prompt.task = cfg.task;
    validate(cfg.features);
    validate(cfg.split);
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
}

json config_to_json(const RunConfig& cfg) {
  json j{{"task", to_string(cfg.task)},
         {"crs", to_string(cfg.crs)},
         {"join_buffer_m", cfg.join_buffer_m},
         {"features",
          {{"overlap_buffer_m", cfg.features.overlap_buffer_m}, {"angle_mode", to_string(cfg.features.angle_mode)}}},
         {"split", {{"train", cfg.split.train}, {"val", cfg.split.val}, {"test", cfg.split.test}, {"seed", cfg.split.seed}}},
         {"grids", grids_to_json(cfg.effective_grids())},
         {"prompt",
          {{"mode", to_string(cfg.prompt.mode)},
           {"shots", to_string(cfg.prompt.shots)},
           {"heuristics", kinds_to_json(cfg.prompt.heuristic_kinds)}}},
         {"backend", {{"kind", cfg.backend}, {"in_flight", cfg.in_flight}, {"failure_policy", to_string(cfg.policy)}}},
         {"seed", cfg.seed}};
  if (cfg.generation) j["generation"] = generation_to_json(*cfg.generation);
  return j;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Geometric and LLM-based matching of linestring pairs", "conflate"};
  app.require_subcommand(1);
  Invocation inv(out, err);
  auto& ov = inv.ov;

  auto* cand = app.add_subcommand("candidates", "Generate candidate pairs from GeoJSON layers");
  cand->require_subcommand(1);
  auto* join = cand->add_subcommand("join", "Sidewalk-road pairs within a buffer distance");
  join->add_option("--roads", inv.roads, "Road layer (GeoJSON)")->required()->check(CLI::ExistingFile);
  join->add_option("--sidewalks", inv.sidewalks, "Sidewalk layer (GeoJSON)")->required()->check(CLI::ExistingFile);
  join->add_option("--buffer", ov.join_buffer, "Join buffer in meters");
  join->add_option("--road-types", inv.road_types, "Allowed highway values");
  join->add_flag("--all-road-types", inv.all_road_types, "Keep roads of every highway type");
  auto* uni = cand->add_subcommand("union", "Pairs of intersecting annotations from two layers");
  uni->add_option("--a", inv.set_a, "First annotation layer (GeoJSON)")->required()->check(CLI::ExistingFile);
  uni->add_option("--b", inv.set_b, "Second annotation layer (GeoJSON)")->required()->check(CLI::ExistingFile);
  for (auto* c : {join, uni}) {
    c->add_option("--crs", ov.crs, "geographic (lon/lat) or planar (meters)");
    c->add_option("--labels", inv.labels_in, "Gold labels (JSONL of left_id, right_id, label)")
        ->check(CLI::ExistingFile);
    c->add_option("-o,--output", inv.pairs_out, "Pair records (JSONL)")->required();
    add_config_options(c, inv);
  }

  auto* feat = app.add_subcommand("features", "Compute min_angle, min_distance and max_area per pair");
  feat->add_option("--pairs", inv.pairs_in, "Pair records (JSONL)")->required()->check(CLI::ExistingFile);
  feat->add_option("-o,--output", inv.pairs_out, "Pair records with features (JSONL)")->required();
  feat->add_option("--overlap-buffer", ov.overlap_buffer, "Buffer width for max_area, meters");
  feat->add_option("--angle-mode", ov.angle_mode, "pairwise or dominant");
  add_config_options(feat, inv);

  auto* split = app.add_subcommand("split", "Seeded train/validation/test split of labeled pairs");
  split->add_option("--pairs", inv.pairs_in, "Labeled pair records (JSONL)")->required()->check(CLI::ExistingFile);
  split->add_option("--train-out", inv.train_out, "Training pairs")->required();
  split->add_option("--val-out", inv.val_out, "Validation pairs")->required();
  split->add_option("--test-out", inv.test_out, "Test pairs")->required();
  split->add_option("--ratios", inv.ratios, "Train, validation and test fractions")->expected(3);
  split->add_option("--seed", inv.split_seed, "Shuffle seed");
  add_config_options(split, inv);

  auto* sw = app.add_subcommand("sweep", "Score every heuristic combination on labeled pairs");
  sw->add_option("--train", inv.train_in, "Labeled pairs with features")->required()->check(CLI::ExistingFile);
  sw->add_option("--task", ov.task, "join or union");
  sw->add_option("--grids", ov.grids_file, "Threshold grids (JSON)")->check(CLI::ExistingFile);
  sw->add_option("-o,--output", inv.report_out, "Sweep report (JSON)")->required();
  sw->add_option("--config", inv.config_file, "JSON config file; flags override its values")
      ->check(CLI::ExistingFile);

  auto* cls = app.add_subcommand("classify", "Label pairs with a heuristic");
  cls->add_option("--pairs", inv.pairs_in, "Pairs with features")->required()->check(CLI::ExistingFile);
  add_heuristic_choice(cls, inv);
  cls->add_option("--predictions", inv.pairs_out, "Write predictions (JSONL) here");
  add_config_options(cls, inv);

  auto* ev = app.add_subcommand("eval", "Score predictions or a heuristic against gold labels");
  ev->add_option("--pairs", inv.pairs_in, "Labeled pairs")->required()->check(CLI::ExistingFile);
  ev->add_option("--predictions", inv.predictions_in, "Predictions, request log or refine log (JSONL)")
      ->check(CLI::ExistingFile);
  ev->add_option("--field", inv.field, "Field holding the answer: prediction, label or final");
  ev->add_option("--policy", ov.policy, "Unanswered items: incorrect or abstain");
  add_heuristic_choice(ev, inv);
  add_config_options(ev, inv);

  auto* pr = app.add_subcommand("prompt", "Classify pairs with a chat model");
  add_prompt_options(pr, inv);

  auto* rf = app.add_subcommand("refine", "Review and refine initial answers with a chat model");
  add_prompt_options(rf, inv);
  rf->add_option("--init", inv.init, "Initial answers: random or heuristic")
      ->check(CLI::IsMember({"random", "heuristic"}));
  rf->add_option("--seed", ov.seed, "Seed for random initial answers");
  add_heuristic_choice(rf, inv);

  auto* syn = app.add_subcommand("synth", "Synthetic geometry benchmark and planted pair data");
  syn->require_subcommand(1);
  auto* gen = syn->add_subcommand("gen", "Generate benchmark instances");
  gen->add_option("--task", inv.synth_task, "p2s, sc, si or ch")->required()->check(
      CLI::IsMember({"p2s", "sc", "si", "ch"}));
  gen->add_option("--n", inv.synth_n, "Number of instances");
  gen->add_option("--seed", inv.synth_seed, "Generator seed");
  gen->add_flag("--no-truth", inv.no_truth, "Leave ground truth out of the file");
  gen->add_option("-o,--output", inv.pairs_out, "Instances (JSONL)")->required();
  gen->add_option("--report", inv.report_out, "Write a JSON report here");
  auto* grd = syn->add_subcommand("grade", "Grade answers against instance truths");
  grd->add_option("--instances", inv.instances_in, "Instances with truth (JSONL)")->required()->check(
      CLI::ExistingFile);
  grd->add_option("--answers", inv.answers_in, "Answers (JSONL of instance_id, answer)")->required()->check(
      CLI::ExistingFile);
  grd->add_option("-o,--output", inv.report_out, "Grade report (JSON)");
  auto* pl = syn->add_subcommand("planted", "Labeled planar pairs following a planted heuristic");
  pl->add_option("--n", inv.planted.n, "Number of pairs");
  pl->add_option("--seed", inv.synth_seed, "Generator seed");
  pl->add_option("--rule", inv.planted_rule, "Planted heuristic");
  pl->add_option("--positive-fraction", inv.planted.positive_fraction, "Share of positive pairs");
  pl->add_option("--angle-margin", inv.planted.angle_margin_deg, "Minimum angle slack from the threshold, degrees");
  pl->add_option("--distance-margin", inv.planted.distance_margin_m, "Minimum distance slack, meters");
  pl->add_option("--area-margin", inv.planted.area_margin, "Minimum overlap slack");
  pl->add_option("-o,--output", inv.pairs_out, "Labeled pairs with features (JSONL)");
  pl->add_option("--roads-out", inv.roads_out, "Road layer (GeoJSON)");
  pl->add_option("--sidewalks-out", inv.sidewalks_out, "Sidewalk layer (GeoJSON)");
  pl->add_option("--labels-out", inv.labels_out, "Gold labels (JSONL)");
  add_config_options(pl, inv);

  std::vector<std::string> argv_store{"conflate"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 1;
  }

  try {
    inv.resolve_config();
    if (join->parsed()) return inv.candidates_join();
    if (uni->parsed()) return inv.candidates_union();
    if (feat->parsed()) return inv.features();
    if (split->parsed()) return inv.split();
    if (sw->parsed()) return inv.sweep_cmd();
    if (cls->parsed()) return inv.classify();
    if (ev->parsed()) return inv.eval_cmd();
    if (pr->parsed()) return inv.prompt();
    if (rf->parsed()) return inv.refine();
    if (gen->parsed()) return inv.synth_gen();
    if (grd->parsed()) return inv.synth_grade();
    if (pl->parsed()) return inv.synth_planted();
  } catch (const BackendError& e) {
    err << "backend error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  err << app.help();
  return 1;
}

int dispatch(const std::vector<std::string>& args) { return dispatch(args, std::cout, std::cerr); }

}  // namespace conflate::cli
