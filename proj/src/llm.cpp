#include "conflate/llm.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "conflate/error.hpp"
#include "conflate/report.hpp"

#ifndef CONFLATE_TEMPLATE_DIR
#define CONFLATE_TEMPLATE_DIR "templates"
#endif

namespace conflate {

using nlohmann::json;

std::string_view to_string(PromptMode mode) {
  switch (mode) {
    case PromptMode::plain: return "plain";
    case PromptMode::hints: return "hints";
    case PromptMode::features: return "features";
  }
  return "?";
}

std::string_view to_string(Shots shots) { return shots == Shots::few ? "few" : "zero"; }

PromptMode prompt_mode_from_string(std::string_view name) {
  if (name == "plain") return PromptMode::plain;
  if (name == "hints") return PromptMode::hints;
  if (name == "features") return PromptMode::features;
  throw ValidationError("unknown prompt mode '" + std::string(name) + "'");
}

Shots shots_from_string(std::string_view name) {
  if (name == "zero") return Shots::zero;
  if (name == "few") return Shots::few;
  throw ValidationError("unknown shot setting '" + std::string(name) + "'");
}

std::vector<HeuristicKind> PromptSpec::effective_kinds() const {
  const auto allowed = kinds_for(task);
  if (heuristic_kinds.empty()) return allowed;
  std::vector<HeuristicKind> kinds;
  for (auto k : allowed) {
    if (std::find(heuristic_kinds.begin(), heuristic_kinds.end(), k) != heuristic_kinds.end()) kinds.push_back(k);
  }
  for (auto k : heuristic_kinds) {
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
      throw ValidationError(std::string("heuristic '") + kind_letter(k) + "' does not apply to the " +
                            std::string(to_string(task)) + " task");
    }
  }
  return kinds;
}

std::string_view to_string(Role role) {
  switch (role) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
  }
  return "?";
}

void GenerationParams::validate() const {
  if (!(temperature >= 0)) throw ValidationError("temperature must be >= 0");
  if (!(top_p > 0 && top_p <= 1)) throw ValidationError("top_p must lie in (0, 1]");
  if (max_new_tokens < 1) throw ValidationError("max_new_tokens must be >= 1");
}

PromptTemplates PromptTemplates::load(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw ConfigError("template directory '" + dir.string() + "' not found");
  PromptTemplates t;
  t.dir_ = dir;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    std::string text = read_file(entry.path().string());
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
    t.texts_[entry.path().stem().string()] = std::move(text);
  }
  return t;
}

std::filesystem::path PromptTemplates::default_dir() {
  if (const char* env = std::getenv("CONFLATE_TEMPLATES"); env && *env) return env;
  return CONFLATE_TEMPLATE_DIR;
}

const std::string& PromptTemplates::get(const std::string& name) const {
  auto it = texts_.find(name);
  if (it == texts_.end()) {
    throw ConfigError("missing template file '" + (dir_ / (name + ".txt")).string() + "'");
  }
  return it->second;
}

std::string PromptTemplates::render(std::string_view tmpl, const std::map<std::string, std::string>& vars) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    const auto open = tmpl.find('{', pos);
    if (open == std::string_view::npos) break;
    const auto close = tmpl.find('}', open + 1);
    if (close == std::string_view::npos) break;
    const std::string key(tmpl.substr(open + 1, close - open - 1));
    out.append(tmpl.substr(pos, open - pos));
    if (auto it = vars.find(key); it != vars.end()) {
      out += it->second;
    } else {
      out.append(tmpl.substr(open, close - open + 1));
    }
    pos = close + 1;
  }
  out.append(tmpl.substr(std::min(pos, tmpl.size())));
  return out;
}

namespace {

// Empty sections leave blank-line runs behind; squeeze them to one blank line.
std::string tidy(const std::string& text) {
  std::string out;
  int newlines = 0;
  for (char ch : text) {
    if (ch == '\n') {
      if (++newlines > 2) continue;
    } else {
      newlines = 0;
    }
    out.push_back(ch);
  }
  const auto first = out.find_first_not_of('\n');
  if (first == std::string::npos) return {};
  const auto last = out.find_last_not_of('\n');
  return out.substr(first, last - first + 1);
}

std::string task_key(Task task) { return task == Task::join ? "join" : "union"; }

std::string left_name(Task task) { return task == Task::join ? "Sidewalk" : "Annotation A"; }
std::string right_name(Task task) { return task == Task::join ? "Road" : "Annotation B"; }

std::string geometry_text(const LineStringFeature& f) { return linestring_to_geojson(f.coords).dump(); }

std::string hints_text(const PromptSpec& spec, const PromptTemplates& t) {
  if (spec.mode == PromptMode::plain) return {};
  std::string out = t.get("hints_header");
  for (auto kind : spec.effective_kinds()) {
    out += "\n- " + t.get("hint_" + task_key(spec.task) + "_" + kind_letter(kind));
  }
  return out;
}

std::string features_text(const PairRecord& pair, const PromptSpec& spec) {
  if (spec.mode != PromptMode::features) return {};
  if (!pair.features) throw ValidationError("pair '" + pair.pair_id + "' has no features for features-mode prompting");
  return "Geometric features:\n" + render_features(*pair.features, spec.effective_kinds());
}

std::string example_text(const PairRecord& ex, int index, const PromptSpec& spec, const PromptTemplates& t) {
  return PromptTemplates::render(t.get("example"), {{"index", std::to_string(index)},
                                                    {"left_name", left_name(spec.task)},
                                                    {"right_name", right_name(spec.task)},
                                                    {"geojson_left", geometry_text(ex.left_geom)},
                                                    {"geojson_right", geometry_text(ex.right_geom)},
                                                    {"features", features_text(ex, spec)},
                                                    {"label", std::to_string(*ex.label)}});
}

}  // namespace

FewShotExamples select_fewshot(const std::vector<PairRecord>& pool, const std::optional<std::string>& positive_id,
                               const std::optional<std::string>& negative_id) {
  std::vector<const PairRecord*> sorted;
  for (const auto& p : pool) sorted.push_back(&p);
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->pair_id < b->pair_id; });

  auto pick = [&](int label, const std::optional<std::string>& id) -> const PairRecord& {
    for (const auto* p : sorted) {
      if (id ? p->pair_id == *id : (p->label && *p->label == label)) {
        if (!p->label || *p->label != label) {
          throw ValidationError("few-shot exemplar '" + p->pair_id + "' does not carry label " + std::to_string(label));
        }
        return *p;
      }
    }
    throw ValidationError(id ? "few-shot exemplar '" + *id + "' not in the training pool"
                             : "training pool has no example labeled " + std::to_string(label));
  };
  return {pick(1, positive_id), pick(0, negative_id)};
}

std::string render_features(const FeatureVector& f, const std::vector<HeuristicKind>& kinds) {
  std::string out;
  char buf[96];
  for (auto kind : kinds) {
    switch (kind) {
      case HeuristicKind::parallel:
        std::snprintf(buf, sizeof buf, "min_angle: %.3f degrees", f.min_angle_deg);
        break;
      case HeuristicKind::clearance:
        std::snprintf(buf, sizeof buf, "min_distance: %.3f meters", f.min_distance_m);
        break;
      case HeuristicKind::overlap:
        std::snprintf(buf, sizeof buf, "max_area: %.3f (fraction of buffered area shared)", f.max_area);
        break;
    }
    if (!out.empty()) out += '\n';
    out += buf;
  }
  return out;
}

std::vector<ChatMessage> build_prompt(const PairRecord& pair, const PromptSpec& spec, const PromptTemplates& t,
                                      const FewShotExamples* fewshot) {
  std::string examples;
  if (spec.shots == Shots::few) {
    if (!fewshot) throw ValidationError("few-shot prompting needs one positive and one negative exemplar");
    if (!fewshot->positive.label || *fewshot->positive.label != 1 || !fewshot->negative.label ||
        *fewshot->negative.label != 0) {
      throw ValidationError("few-shot exemplars must be labeled 1 and 0");
    }
    examples = PromptTemplates::render(t.get("examples_header"), {}) + "\n\n" +
               example_text(fewshot->positive, 1, spec, t) + "\n\n" + example_text(fewshot->negative, 2, spec, t);
  }

  const std::map<std::string, std::string> vars{
      {"task_description", t.get("task_" + task_key(spec.task))},
      {"hints", hints_text(spec, t)},
      {"examples", examples},
      {"left_name", left_name(spec.task)},
      {"right_name", right_name(spec.task)},
      {"geojson_left", geometry_text(pair.left_geom)},
      {"geojson_right", geometry_text(pair.right_geom)},
      {"features", features_text(pair, spec)},
      {"instruction", t.get("answer_instruction")},
  };
  return {{Role::system, t.get("system")}, {Role::user, tidy(PromptTemplates::render(t.get("query"), vars))}};
}

std::optional<int> parse_label(std::string_view text) {
  auto is_word = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
  auto is_digit = [](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c != '0' && c != '1') continue;
    if (i > 0) {
      const char prev = text[i - 1];
      if (is_word(prev)) continue;
      // Tail of a decimal such as "2.0".
      if ((prev == '.' || prev == ',') && i > 1 && is_digit(text[i - 2])) continue;
    }
    if (i + 1 < text.size()) {
      const char next = text[i + 1];
      if (is_word(next)) continue;
      if ((next == '.' || next == ',') && i + 2 < text.size() && is_digit(text[i + 2])) continue;
    }
    return c - '0';
  }
  return std::nullopt;
}

json to_json(const ChatMessage& m) { return {{"role", to_string(m.role)}, {"content", m.content}}; }

json to_json(const std::vector<ChatMessage>& messages) {
  json arr = json::array();
  for (const auto& m : messages) arr.push_back(to_json(m));
  return arr;
}

std::string prompt_hash(const std::vector<ChatMessage>& messages) {
  std::string joined;
  for (const auto& m : messages) {
    joined += to_string(m.role);
    joined += '\x1f';
    joined += m.content;
    joined += '\x1e';
  }
  return fnv1a_hex(joined);
}

}  // namespace conflate
