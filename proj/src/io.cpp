#include "qlock/io.hpp"

#include <chrono>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "qlock/version.hpp"

namespace qlock {

nlohmann::json artifact_metadata(std::uint64_t seed, nlohmann::json config) {
    nlohmann::json j;
    j["tool"] = kToolName;
    j["version"] = kVersion;
    j["seed"] = seed;
    j["config"] = std::move(config);
    j["timestamp"] = iso8601_now();
    return j;
}

std::string csv_metadata_comments(std::uint64_t seed, const nlohmann::json& config) {
    std::ostringstream os;
    os << "# tool=" << kToolName << " version=" << kVersion << " seed=" << seed
       << " config=" << config.dump() << '\n';
    os << "# timestamp=" << iso8601_now() << '\n';
    return os.str();
}

std::string iso8601_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
    f << text;
    if (!f) throw std::runtime_error("write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for reading: " + path.string());
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
    return nlohmann::json::parse(read_text_file(path));
}

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

} // namespace qlock
