#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

namespace qlock {

// Shared metadata block embedded in every CLI artifact: tool, version, seed
// and the fully resolved configuration. The timestamp is the one field
// excluded from reproducibility comparisons.
nlohmann::json artifact_metadata(std::uint64_t seed, nlohmann::json config);

// "# key=value" comment lines carrying the same metadata for CSV artifacts;
// the timestamp sits on its own line so it is easy to strip.
std::string csv_metadata_comments(std::uint64_t seed, const nlohmann::json& config);

std::string iso8601_now();

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json_file(const std::filesystem::path& path);

// 17-significant-digit decimal rendering (round-trips doubles exactly)
std::string format_double(double v);

} // namespace qlock
