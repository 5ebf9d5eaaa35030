#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "conflate/pair_record.hpp"

namespace conflate {

enum class Task { join, union_ };

std::string_view to_string(Task task);
Task task_from_string(std::string_view name);

// Declaration order is the canonical term order: p, c, o.
enum class HeuristicKind { parallel, clearance, overlap };

char kind_letter(HeuristicKind kind);
HeuristicKind kind_from_string(std::string_view name);  // "p"/"parallel", ...

// Kinds that make sense for a task; clearance is join-only because union
// candidates always touch.
std::vector<HeuristicKind> kinds_for(Task task);

struct HeuristicTerm {
  HeuristicKind kind;
  double threshold;

  friend bool operator==(const HeuristicTerm&, const HeuristicTerm&) = default;
};

// Conjunction of thresholded predicates, one per kind, kept in p, c, o order.
class HeuristicSpec {
 public:
  explicit HeuristicSpec(std::vector<HeuristicTerm> terms);

  // "p(5)&c(2)"; whitespace ignored.
  static HeuristicSpec parse(std::string_view text);

  const std::vector<HeuristicTerm>& terms() const { return terms_; }
  bool has(HeuristicKind kind) const;
  double threshold(HeuristicKind kind) const;
  std::string to_string() const;

  friend bool operator==(const HeuristicSpec&, const HeuristicSpec&) = default;

 private:
  std::vector<HeuristicTerm> terms_;
};

// Closed inequalities: parallel min_angle <= a, clearance min_distance >= a,
// overlap max_area >= a. Returns 1 iff every term holds.
int predict(const FeatureVector& features, const HeuristicSpec& spec);

using ThresholdGrids = std::map<HeuristicKind, std::vector<double>>;

ThresholdGrids default_grids(Task task);
ThresholdGrids grids_from_json(const nlohmann::json& j);

// All single, duo and trio conjunctions over the task's kinds, crossing the
// per-kind grids. Default join grids give 15 + 75 + 125 = 215 specs.
std::vector<HeuristicSpec> enumerate_specs(Task task, const ThresholdGrids& grids);

struct EvalReport {
  std::size_t n = 0;
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  double accuracy = 0;
};

EvalReport evaluate(const std::vector<int>& predictions, const std::vector<int>& labels);

struct SpecResult {
  HeuristicSpec spec;
  EvalReport eval;
};

struct SweepReport {
  Task task = Task::join;
  std::vector<SpecResult> results;  // enumeration order
  std::size_t best_index = 0;
  double best_accuracy = 0;

  const HeuristicSpec& best_spec() const { return results.at(best_index).spec; }

  const SpecResult& best_of_size(std::size_t terms) const;
  const SpecResult& worst() const;
};

// Orders specs for tie-breaking: fewer terms first, then thresholds compared
// kind by kind in p, c, o order with absent kinds sorting last.
bool tie_break_less(const HeuristicSpec& a, const HeuristicSpec& b);

SweepReport sweep(const std::vector<PairRecord>& pairs, const std::vector<HeuristicSpec>& specs, Task task);

nlohmann::json to_json(const EvalReport& report);
nlohmann::json to_json(const SweepReport& report);
SweepReport sweep_from_json(const nlohmann::json& j);

}  // namespace conflate
