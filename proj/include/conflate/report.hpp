#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace conflate {

inline constexpr int kReportSchemaVersion = 1;

// Rounds to `digits` significant digits so reports stay byte-stable.
double round_sig(double value, int digits = 6);

// 64-bit FNV-1a, rendered as 16 lowercase hex digits.
std::uint64_t fnv1a64(std::string_view bytes);
std::string fnv1a_hex(std::string_view bytes);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

// Pretty-printed JSON document with a trailing newline.
void write_json_file(const std::string& path, const nlohmann::json& doc);
nlohmann::json read_json_file(const std::string& path);

}  // namespace conflate
