#pragma once

// Prompt construction and response parsing for the LLM classification path.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "conflate/heuristics.hpp"
#include "conflate/pair_record.hpp"

namespace conflate {

enum class PromptMode { plain, hints, features };
enum class Shots { zero, few };

std::string_view to_string(PromptMode mode);
std::string_view to_string(Shots shots);
PromptMode prompt_mode_from_string(std::string_view name);
Shots shots_from_string(std::string_view name);

struct PromptSpec {
  PromptMode mode = PromptMode::plain;
  Shots shots = Shots::zero;
  Task task = Task::join;
  // Which heuristics the hints/features text covers; empty means every kind
  // valid for the task. Ignored in plain mode.
  std::vector<HeuristicKind> heuristic_kinds;

  std::vector<HeuristicKind> effective_kinds() const;
};

enum class Role { system, user, assistant };
std::string_view to_string(Role role);

struct ChatMessage {
  Role role = Role::user;
  std::string content;

  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

struct GenerationParams {
  double temperature = 0.0;
  double top_p = 1.0;
  int max_new_tokens = 10;

  static GenerationParams classification() { return {0.0, 1.0, 10}; }
  static GenerationParams review() { return {0.0, 1.0, 500}; }
  static GenerationParams chain_of_thought() { return {0.0, 1.0, 2000}; }

  void validate() const;
};

// Prompt wording lives in text files so it can change without a rebuild.
// Placeholders are written {name}.
class PromptTemplates {
 public:
  static PromptTemplates load(const std::filesystem::path& dir);
  static std::filesystem::path default_dir();

  // Throws ConfigError when the template file was absent.
  const std::string& get(const std::string& name) const;

  // Replaces every {key} from `vars`; unknown placeholders are left verbatim.
  static std::string render(std::string_view tmpl, const std::map<std::string, std::string>& vars);

 private:
  std::filesystem::path dir_;
  std::map<std::string, std::string> texts_;
};

struct FewShotExamples {
  PairRecord positive;
  PairRecord negative;
};

// First positive and first negative of the pool in pair_id order, unless ids
// are given explicitly.
FewShotExamples select_fewshot(const std::vector<PairRecord>& pool,
                               const std::optional<std::string>& positive_id = std::nullopt,
                               const std::optional<std::string>& negative_id = std::nullopt);

// "min_angle: 3.000 degrees" style lines for the requested kinds.
std::string render_features(const FeatureVector& f, const std::vector<HeuristicKind>& kinds);

// System + user message. Throws ValidationError when features mode lacks
// features (query or exemplars) or few-shot lacks exemplars.
std::vector<ChatMessage> build_prompt(const PairRecord& pair, const PromptSpec& spec,
                                      const PromptTemplates& templates,
                                      const FewShotExamples* fewshot = nullptr);

// First standalone "0" or "1" token; nullopt when none is present.
std::optional<int> parse_label(std::string_view text);

nlohmann::json to_json(const ChatMessage& m);
nlohmann::json to_json(const std::vector<ChatMessage>& messages);

// Stable digest of a message list, used to key mock responses.
std::string prompt_hash(const std::vector<ChatMessage>& messages);

}  // namespace conflate
