#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "conflate/candidates.hpp"
#include "conflate/features.hpp"
#include "conflate/heuristics.hpp"
#include "conflate/inference.hpp"
#include "conflate/llm.hpp"

namespace conflate::cli {

// Settings shared by every subcommand. A JSON config file fills these in and
// command-line flags override individual fields.
//
//   {"task": "join", "crs": "geographic", "join_buffer_m": 10,
//    "features": {"overlap_buffer_m": 2, "angle_mode": "pairwise"},
//    "split": {"train": 0.8, "val": 0.1, "test": 0.1, "seed": 0},
//    "grids": {"p": [...], "c": [...], "o": [...]},
//    "prompt": {"mode": "plain", "shots": "zero", "heuristics": ["p", "c"]},
//    "generation": {"temperature": 0, "top_p": 1, "max_new_tokens": 10},
//    "backend": {"kind": "mock", "mock_script": "script.json", "in_flight": 4,
//                "failure_policy": "incorrect"},
//    "seed": 0}
struct RunConfig {
  Task task = Task::join;
  CrsMode crs = CrsMode::geographic;
  double join_buffer_m = kDefaultJoinBufferM;
  FeatureConfig features;
  SplitSpec split;
  std::optional<ThresholdGrids> grids;  // unset: defaults for the task
  PromptSpec prompt;
  std::optional<GenerationParams> generation;  // unset: per-command default
  std::string backend = "mock";
  std::string mock_script;
  std::size_t in_flight = 4;
  FailurePolicy policy = FailurePolicy::incorrect;
  std::uint64_t seed = 0;

  ThresholdGrids effective_grids() const { return grids ? *grids : default_grids(task); }
};

RunConfig config_from_json(const nlohmann::json& j);

// File paths are left out so the digest depends only on settings.
nlohmann::json config_to_json(const RunConfig& cfg);

// Runs one subcommand. `args` excludes the program name. Returns 0 on
// success, 1 on usage or validation errors, 2 on backend errors.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int dispatch(const std::vector<std::string>& args);

}  // namespace conflate::cli
