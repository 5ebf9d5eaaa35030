#include "conflate/heuristics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>

#include "conflate/error.hpp"
#include "conflate/features.hpp"
#include "conflate/report.hpp"

namespace conflate {

using nlohmann::json;

std::string_view to_string(Task task) { return task == Task::join ? "join" : "union"; }

Task task_from_string(std::string_view name) {
  if (name == "join") return Task::join;
  if (name == "union") return Task::union_;
  throw ValidationError("unknown task '" + std::string(name) + "' (expected join or union)");
}

char kind_letter(HeuristicKind kind) {
  switch (kind) {
    case HeuristicKind::parallel: return 'p';
    case HeuristicKind::clearance: return 'c';
    case HeuristicKind::overlap: return 'o';
  }
  return '?';
}

HeuristicKind kind_from_string(std::string_view name) {
  if (name == "p" || name == "parallel") return HeuristicKind::parallel;
  if (name == "c" || name == "clearance") return HeuristicKind::clearance;
  if (name == "o" || name == "overlap") return HeuristicKind::overlap;
  throw ValidationError("unknown heuristic kind '" + std::string(name) + "'");
}

std::vector<HeuristicKind> kinds_for(Task task) {
  if (task == Task::join) return {HeuristicKind::parallel, HeuristicKind::clearance, HeuristicKind::overlap};
  return {HeuristicKind::parallel, HeuristicKind::overlap};
}

HeuristicSpec::HeuristicSpec(std::vector<HeuristicTerm> terms) : terms_(std::move(terms)) {
  if (terms_.empty() || terms_.size() > 3) throw ValidationError("a heuristic needs 1 to 3 terms");
  std::sort(terms_.begin(), terms_.end(),
            [](const HeuristicTerm& a, const HeuristicTerm& b) { return a.kind < b.kind; });
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    const auto& t = terms_[i];
    if (i > 0 && terms_[i - 1].kind == t.kind) throw ValidationError("heuristic kinds must be distinct");
    if (!std::isfinite(t.threshold) || !(t.threshold > 0)) {
      throw ValidationError(std::string("threshold for ") + kind_letter(t.kind) + " must be positive");
    }
    if (t.kind == HeuristicKind::overlap && t.threshold > 1) {
      throw ValidationError("overlap threshold must lie in (0, 1]");
    }
  }
}

HeuristicSpec HeuristicSpec::parse(std::string_view text) {
  std::string s;
  for (char ch : text) {
    if (!std::isspace(static_cast<unsigned char>(ch))) s.push_back(ch);
  }
  std::vector<HeuristicTerm> terms;
  std::size_t pos = 0;
  while (pos < s.size()) {
    const auto open = s.find('(', pos);
    const auto close = s.find(')', open == std::string::npos ? pos : open);
    if (open == std::string::npos || close == std::string::npos) {
      throw ValidationError("malformed heuristic spec '" + std::string(text) + "'");
    }
    const HeuristicKind kind = kind_from_string(s.substr(pos, open - pos));
    const std::string number = s.substr(open + 1, close - open - 1);
    char* end = nullptr;
    const double value = std::strtod(number.c_str(), &end);
    if (number.empty() || end != number.c_str() + number.size()) {
      throw ValidationError("malformed threshold '" + number + "'");
    }
    terms.push_back({kind, value});
    pos = close + 1;
    if (pos < s.size()) {
      if (s[pos] != '&') throw ValidationError("expected '&' in heuristic spec '" + std::string(text) + "'");
      ++pos;
    }
  }
  return HeuristicSpec(std::move(terms));
}

bool HeuristicSpec::has(HeuristicKind kind) const {
  return std::any_of(terms_.begin(), terms_.end(), [&](const auto& t) { return t.kind == kind; });
}

double HeuristicSpec::threshold(HeuristicKind kind) const {
  for (const auto& t : terms_) {
    if (t.kind == kind) return t.threshold;
  }
  throw ValidationError(std::string("spec has no ") + kind_letter(kind) + " term");
}

std::string HeuristicSpec::to_string() const {
  std::string out;
  for (const auto& t : terms_) {
    if (!out.empty()) out += '&';
    char buf[48];
    std::snprintf(buf, sizeof buf, "%c(%g)", kind_letter(t.kind), t.threshold);
    out += buf;
  }
  return out;
}

int predict(const FeatureVector& f, const HeuristicSpec& spec) {
  for (const auto& t : spec.terms()) {
    bool holds = false;
    switch (t.kind) {
      case HeuristicKind::parallel: holds = f.min_angle_deg <= t.threshold; break;
      case HeuristicKind::clearance: holds = f.min_distance_m >= t.threshold; break;
      case HeuristicKind::overlap: holds = f.max_area >= t.threshold; break;
    }
    if (!holds) return 0;
  }
  return 1;
}

ThresholdGrids default_grids(Task task) {
  if (task == Task::join) {
    return {{HeuristicKind::parallel, {1, 2, 5, 10, 20}},
            {HeuristicKind::clearance, {1, 2, 3, 4, 5}},
            {HeuristicKind::overlap, {0.1, 0.2, 0.3, 0.4, 0.5}}};
  }
  return {{HeuristicKind::parallel, {1, 2, 3, 4, 5}}, {HeuristicKind::overlap, {0.5, 0.6, 0.7, 0.8, 0.9}}};
}

ThresholdGrids grids_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("threshold grids must be a JSON object");
  ThresholdGrids grids;
  for (const auto& [key, values] : j.items()) {
    const HeuristicKind kind = kind_from_string(key);
    if (!values.is_array()) throw ValidationError("grid for '" + key + "' must be an array");
    auto& grid = grids[kind];
    for (const auto& v : values) {
      if (!v.is_number()) throw ValidationError("grid for '" + key + "' must hold numbers");
      grid.push_back(v.get<double>());
    }
  }
  return grids;
}

std::vector<HeuristicSpec> enumerate_specs(Task task, const ThresholdGrids& grids) {
  const auto allowed = kinds_for(task);
  std::vector<HeuristicKind> kinds;
  for (const auto& [kind, values] : grids) {
    if (std::find(allowed.begin(), allowed.end(), kind) == allowed.end()) {
      throw ValidationError(std::string("heuristic kind '") + kind_letter(kind) + "' is not valid for the " +
                            std::string(to_string(task)) + " task");
    }
    if (values.empty()) throw ValidationError(std::string("empty grid for '") + kind_letter(kind) + "'");
    kinds.push_back(kind);
  }
  if (kinds.empty()) throw ValidationError("no threshold grids given");

  std::vector<HeuristicSpec> specs;
  const std::size_t k = kinds.size();
  for (std::size_t size = 1; size <= k; ++size) {
    // Kind subsets of this size in lexicographic order (pc, po, co for join).
    std::vector<bool> pick(k, false);
    std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(size), true);
    do {
      std::vector<HeuristicKind> chosen;
      for (std::size_t i = 0; i < k; ++i) {
        if (pick[i]) chosen.push_back(kinds[i]);
      }
      // Cross product of the chosen grids, last kind varying fastest.
      std::vector<std::size_t> idx(chosen.size(), 0);
      for (bool more = true; more;) {
        std::vector<HeuristicTerm> terms;
        for (std::size_t i = 0; i < chosen.size(); ++i) terms.push_back({chosen[i], grids.at(chosen[i])[idx[i]]});
        specs.emplace_back(std::move(terms));
        more = false;
        for (std::size_t d = chosen.size(); d-- > 0;) {
          if (++idx[d] < grids.at(chosen[d]).size()) {
            more = true;
            break;
          }
          idx[d] = 0;
        }
      }
    } while (std::prev_permutation(pick.begin(), pick.end()));
  }
  return specs;
}

EvalReport evaluate(const std::vector<int>& predictions, const std::vector<int>& labels) {
  if (predictions.size() != labels.size()) throw ValidationError("predictions and labels differ in length");
  if (predictions.empty()) throw ValidationError("cannot evaluate an empty dataset");
  EvalReport r;
  r.n = labels.size();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = labels[i], p = predictions[i];
    if ((y != 0 && y != 1) || (p != 0 && p != 1)) throw ValidationError("labels and predictions must be 0 or 1");
    if (p == 1 && y == 1) ++r.tp;
    else if (p == 1 && y == 0) ++r.fp;
    else if (p == 0 && y == 0) ++r.tn;
    else ++r.fn;
  }
  r.accuracy = static_cast<double>(r.tp + r.tn) / static_cast<double>(r.n);
  return r;
}

bool tie_break_less(const HeuristicSpec& a, const HeuristicSpec& b) {
  if (a.terms().size() != b.terms().size()) return a.terms().size() < b.terms().size();
  constexpr double absent = std::numeric_limits<double>::infinity();
  for (auto kind : {HeuristicKind::parallel, HeuristicKind::clearance, HeuristicKind::overlap}) {
    const double ta = a.has(kind) ? a.threshold(kind) : absent;
    const double tb = b.has(kind) ? b.threshold(kind) : absent;
    if (ta != tb) return ta < tb;
  }
  return false;
}

namespace {

bool better(const SpecResult& a, const SpecResult& b) {
  if (a.eval.accuracy != b.eval.accuracy) return a.eval.accuracy > b.eval.accuracy;
  return tie_break_less(a.spec, b.spec);
}

bool worse(const SpecResult& a, const SpecResult& b) {
  if (a.eval.accuracy != b.eval.accuracy) return a.eval.accuracy < b.eval.accuracy;
  return tie_break_less(a.spec, b.spec);
}

}  // namespace

const SpecResult& SweepReport::best_of_size(std::size_t terms) const {
  const SpecResult* best = nullptr;
  for (const auto& r : results) {
    if (r.spec.terms().size() != terms) continue;
    if (!best || better(r, *best)) best = &r;
  }
  if (!best) throw ValidationError("sweep has no spec with " + std::to_string(terms) + " terms");
  return *best;
}

const SpecResult& SweepReport::worst() const {
  if (results.empty()) throw ValidationError("empty sweep");
  return *std::min_element(results.begin(), results.end(), worse);
}

SweepReport sweep(const std::vector<PairRecord>& pairs, const std::vector<HeuristicSpec>& specs, Task task) {
  if (pairs.empty()) throw ValidationError("cannot sweep an empty dataset");
  if (specs.empty()) throw ValidationError("no heuristic specs to sweep");
  std::vector<int> labels;
  labels.reserve(pairs.size());
  for (const auto& p : pairs) {
    if (!p.label) throw ValidationError("pair '" + p.pair_id + "' has no label");
    if (!p.features) throw ValidationError("pair '" + p.pair_id + "' has no features");
    labels.push_back(*p.label);
  }

  SweepReport report;
  report.task = task;
  report.results.reserve(specs.size());
  std::vector<int> preds(pairs.size());
  for (const auto& spec : specs) {
    for (std::size_t i = 0; i < pairs.size(); ++i) preds[i] = predict(*pairs[i].features, spec);
    report.results.push_back({spec, evaluate(preds, labels)});
  }
  for (std::size_t i = 1; i < report.results.size(); ++i) {
    if (better(report.results[i], report.results[report.best_index])) report.best_index = i;
  }
  report.best_accuracy = report.results[report.best_index].eval.accuracy;
  return report;
}

json to_json(const EvalReport& r) {
  return {{"n", r.n}, {"tp", r.tp}, {"fp", r.fp}, {"tn", r.tn}, {"fn", r.fn}, {"accuracy", round_sig(r.accuracy)}};
}

json to_json(const SweepReport& report) {
  json results = json::array();
  for (const auto& r : report.results) {
    json terms = json::array();
    for (const auto& t : r.spec.terms()) terms.push_back({{"kind", std::string(1, kind_letter(t.kind))}, {"threshold", t.threshold}});
    json entry = to_json(r.eval);
    entry["spec"] = r.spec.to_string();
    entry["terms"] = std::move(terms);
    results.push_back(std::move(entry));
  }
  json best_by_size = json::object();
  const char* names[] = {"", "single", "duo", "trio"};
  for (std::size_t size = 1; size <= 3; ++size) {
    try {
      const auto& b = report.best_of_size(size);
      best_by_size[names[size]] = {{"spec", b.spec.to_string()}, {"accuracy", round_sig(b.eval.accuracy)}};
    } catch (const ValidationError&) {
    }
  }
  const auto& w = report.worst();
  return {{"schema_version", kReportSchemaVersion},
          {"kind", "sweep"},
          {"task", to_string(report.task)},
          {"feature_definition", kFeatureDefinition},
          {"best_spec", report.best_spec().to_string()},
          {"best_accuracy", round_sig(report.best_accuracy)},
          {"worst_spec", w.spec.to_string()},
          {"worst_accuracy", round_sig(w.eval.accuracy)},
          {"best_by_size", std::move(best_by_size)},
          {"results", std::move(results)}};
}

SweepReport sweep_from_json(const json& j) {
  try {
    SweepReport report;
    report.task = task_from_string(j.at("task").get<std::string>());
    const std::string best = j.at("best_spec").get<std::string>();
    for (const auto& r : j.at("results")) {
      EvalReport e;
      e.n = r.at("n").get<std::size_t>();
      e.tp = r.at("tp").get<std::size_t>();
      e.fp = r.at("fp").get<std::size_t>();
      e.tn = r.at("tn").get<std::size_t>();
      e.fn = r.at("fn").get<std::size_t>();
      e.accuracy = r.at("accuracy").get<double>();
      report.results.push_back({HeuristicSpec::parse(r.at("spec").get<std::string>()), e});
      if (report.results.back().spec.to_string() == best) report.best_index = report.results.size() - 1;
    }
    if (report.results.empty()) throw ValidationError("sweep report has no results");
    report.best_accuracy = report.results[report.best_index].eval.accuracy;
    return report;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed sweep report: ") + e.what());
  }
}

}  // namespace conflate
