#pragma once

#include <chrono>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "bankdyn/engine.hpp"
#include "bankdyn/model.hpp"

namespace bankdyn::cli {

/// A malformed or inconsistent command-line flag (exit code 2).
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// `start:stop:step` (inclusive of stop within 1e-12), `a,b,c`, or one value.
[[nodiscard]] std::vector<double> parse_range(std::string_view text);

/// Lowercase hex SHA-256 of a file's bytes.
[[nodiscard]] std::string sha256_file(const std::filesystem::path& path);

[[nodiscard]] nlohmann::ordered_json params_json(const ModelParams& params);
[[nodiscard]] nlohmann::ordered_json config_json(const IntegratorConfig& cfg);

/// Accumulates everything needed to re-run a command, then writes
/// `manifest.json` next to the outputs.
class Manifest {
public:
    Manifest(std::string command, std::vector<std::string> argv);

    void set(const std::string& key, nlohmann::ordered_json value);
    void add_input(const std::filesystem::path& path);
    void add_output(const std::filesystem::path& path);
    /// Writes `dir/manifest.json`; output digests are taken at this point.
    void write(const std::filesystem::path& dir) const;

private:
    std::string command_;
    std::vector<std::string> argv_;
    nlohmann::ordered_json fields_ = nlohmann::ordered_json::object();
    std::vector<std::filesystem::path> inputs_;
    std::vector<std::filesystem::path> outputs_;
    std::chrono::system_clock::time_point started_;
    std::chrono::steady_clock::time_point start_tick_;
};

inline constexpr std::string_view kToolVersion = BANKDYN_VERSION;

}  // namespace bankdyn::cli
