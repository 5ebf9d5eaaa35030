#pragma once

// Fixtures and helpers shared by the test binaries.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "conflate/candidates.hpp"
#include "conflate/cli.hpp"
#include "conflate/geo_io.hpp"
#include "conflate/rng.hpp"

namespace testing {

namespace fs = std::filesystem;

inline fs::path data_dir() { return CONFLATE_TEST_DATA_DIR; }
inline fs::path golden_dir() { return CONFLATE_GOLDEN_DIR; }

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("conflate-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string operator/(const std::string& name) const { return (path_ / name).string(); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

inline CliRun run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = conflate::cli::dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

// Geographic offset of (east, north) meters from an origin, equirectangular.
inline conflate::Coordinate offset_m(const conflate::Coordinate& origin, double east, double north) {
  constexpr double kDeg = std::numbers::pi / 180;
  const double lat = origin.lat + north / (conflate::kEarthRadiusM * kDeg);
  const double lon = origin.lon + east / (conflate::kEarthRadiusM * kDeg * std::cos(origin.lat * kDeg));
  return {lon, lat};
}

// 50 roads and 200 sidewalks scattered over about 1.5 km of Seattle. Half the
// sidewalks run beside a road at 2-16 m, so many sit near the 10 m buffer edge.
struct CandidateFixture {
  conflate::FeatureSet roads, sidewalks;
};

inline CandidateFixture candidate_fixture(std::uint64_t seed) {
  const conflate::Coordinate origin{-122.335, 47.608};
  conflate::Rng rng(seed);
  CandidateFixture fx;
  const char* types[] = {"secondary", "residential", "tertiary", "primary", "living_street"};
  struct Road {
    double x, y, heading, len;
  };
  std::vector<Road> layout;
  for (int i = 0; i < 50; ++i) {
    Road r{rng.uniform(0, 1500), rng.uniform(0, 1500), rng.uniform(0, std::numbers::pi), rng.uniform(80, 300)};
    layout.push_back(r);
    conflate::LineStringFeature f;
    f.id = "road" + std::to_string(i);
    f.properties["highway"] = types[i % 5];
    const int verts = 2 + static_cast<int>(rng.below(3));
    for (int k = 0; k < verts; ++k) {
      const double t = r.len * k / (verts - 1);
      const double wiggle = k == 0 || k == verts - 1 ? 0 : rng.uniform(-3, 3);
      f.coords.push_back(offset_m(origin, r.x + t * std::cos(r.heading) - wiggle * std::sin(r.heading),
                                  r.y + t * std::sin(r.heading) + wiggle * std::cos(r.heading)));
    }
    fx.roads.features.push_back(std::move(f));
  }
  for (int i = 0; i < 200; ++i) {
    conflate::LineStringFeature f;
    f.id = "walk" + std::to_string(i);
    f.properties["footway"] = "sidewalk";
    if (i % 2 == 0) {
      const auto& r = layout[rng.below(layout.size())];
      const double off = rng.uniform(2, 16) * (rng.bernoulli() ? 1 : -1);
      const double start = rng.uniform(0, r.len * 0.5), len = rng.uniform(20, r.len * 0.5);
      const double tilt = rng.uniform(-0.1, 0.1);
      for (double t : {start, start + len}) {
        const double h = r.heading + tilt * (t == start ? 0 : 1);
        f.coords.push_back(offset_m(origin, r.x + t * std::cos(r.heading) - off * std::sin(h),
                                    r.y + t * std::sin(r.heading) + off * std::cos(h)));
      }
    } else {
      const double x = rng.uniform(0, 1500), y = rng.uniform(0, 1500), h = rng.uniform(0, 2 * std::numbers::pi);
      const double len = rng.uniform(10, 120);
      f.coords = {offset_m(origin, x, y), offset_m(origin, x + len * std::cos(h), y + len * std::sin(h))};
    }
    fx.sidewalks.features.push_back(std::move(f));
  }
  return fx;
}

}  // namespace testing
