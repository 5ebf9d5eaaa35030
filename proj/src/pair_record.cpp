#include "conflate/pair_record.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "conflate/error.hpp"
#include "conflate/report.hpp"

namespace conflate {

using nlohmann::json;

std::string make_pair_id(const std::string& left_id, const std::string& right_id) {
  return left_id + "|" + right_id;
}

json pair_to_json(const PairRecord& pair) {
  json j;
  j["pair_id"] = pair.pair_id;
  j["left_id"] = pair.left_id;
  j["right_id"] = pair.right_id;
  if (pair.crs_mode == CrsMode::planar) j["crs"] = "planar";
  j["left_geom"] = linestring_to_geojson(pair.left_geom.coords);
  j["right_geom"] = linestring_to_geojson(pair.right_geom.coords);
  if (pair.label) j["label"] = *pair.label;
  if (pair.features) {
    // Nine significant digits hide last-bit differences between polygon
    // libraries and platforms without moving any value across a threshold.
    j["features"] = {{"min_angle", round_sig(pair.features->min_angle_deg, 9)},
                     {"min_distance", round_sig(pair.features->min_distance_m, 9)},
                     {"max_area", round_sig(pair.features->max_area, 9)}};
  }
  return j;
}

PairRecord pair_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("pair record is not a JSON object");
  PairRecord p;
  try {
    p.pair_id = j.at("pair_id").get<std::string>();
    p.left_id = j.at("left_id").get<std::string>();
    p.right_id = j.at("right_id").get<std::string>();
    p.crs_mode = crs_mode_from_string(j.value("crs", "geographic"));
    const std::string where = "pair '" + p.pair_id + "'";
    p.left_geom.id = p.left_id;
    p.left_geom.coords = linestring_from_geojson(j.at("left_geom"), where + " left", p.crs_mode);
    p.right_geom.id = p.right_id;
    p.right_geom.coords = linestring_from_geojson(j.at("right_geom"), where + " right", p.crs_mode);
    if (auto it = j.find("label"); it != j.end() && !it->is_null()) {
      const int label = it->get<int>();
      if (label != 0 && label != 1) throw ValidationError(where + ": label must be 0 or 1");
      p.label = label;
    }
    if (auto it = j.find("features"); it != j.end() && !it->is_null()) {
      p.features = FeatureVector{it->at("min_angle").get<double>(), it->at("min_distance").get<double>(),
                                 it->at("max_area").get<double>()};
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed pair record: ") + e.what());
  }
  return p;
}

void write_pairs(std::ostream& out, const std::vector<PairRecord>& pairs) {
  for (const auto& p : pairs) out << pair_to_json(p).dump() << '\n';
}

std::vector<PairRecord> read_pairs(std::istream& in) {
  std::vector<PairRecord> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
    pairs.push_back(pair_from_json(j));
  }
  validate_pairs(pairs);
  return pairs;
}

void write_pairs_file(const std::string& path, const std::vector<PairRecord>& pairs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  write_pairs(out, pairs);
}

std::vector<PairRecord> read_pairs_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  return read_pairs(in);
}

void validate_pairs(const std::vector<PairRecord>& pairs) {
  std::set<std::string> ids;
  for (const auto& p : pairs) {
    if (!ids.insert(p.pair_id).second) throw ValidationError("duplicate pair id '" + p.pair_id + "'");
    if (p.label && *p.label != 0 && *p.label != 1) {
      throw ValidationError("pair '" + p.pair_id + "': label must be 0 or 1");
    }
  }
}

}  // namespace conflate
