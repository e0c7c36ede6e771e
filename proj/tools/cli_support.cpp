#include "cli_support.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include "bankdyn/error.hpp"

namespace bankdyn::cli {

namespace {

double parse_number(std::string_view s, std::string_view whole) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
        throw UsageError("bad number '" + std::string(s) + "' in '" + std::string(whole) + "'");
    }
    return v;
}

/// Removes accumulated round-off so that 0.1:0.3:0.1 yields 0.3, not 0.30000000000000004.
double snap(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return std::strtod(buf, nullptr);
}

std::string utc_timestamp(std::chrono::system_clock::time_point tp) {
    const std::time_t t = std::chrono::system_clock::to_time_t(tp);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream out;
    out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return out.str();
}

}  // namespace

std::vector<double> parse_range(std::string_view text) {
    constexpr std::size_t kMaxPoints = 1'000'000;
    if (text.find(':') != std::string_view::npos) {
        const auto c1 = text.find(':');
        const auto c2 = text.find(':', c1 + 1);
        if (c2 == std::string_view::npos || text.find(':', c2 + 1) != std::string_view::npos) {
            throw UsageError("range '" + std::string(text) + "' must be start:stop:step");
        }
        const double start = parse_number(text.substr(0, c1), text);
        const double stop = parse_number(text.substr(c1 + 1, c2 - c1 - 1), text);
        const double step = parse_number(text.substr(c2 + 1), text);
        if (!(step > 0.0) || stop < start) {
            throw UsageError("range '" + std::string(text) + "' needs step > 0 and stop >= start");
        }
        const double tol = 1e-12 * std::max(1.0, std::abs(stop));
        const double span = (stop - start) / step;
        if (span > static_cast<double>(kMaxPoints)) {
            throw UsageError("range '" + std::string(text) + "' has too many points");
        }
        auto count = static_cast<std::size_t>(std::floor(span)) + 1;
        if (start + static_cast<double>(count) * step <= stop + tol) ++count;
        while (count > 1 && start + static_cast<double>(count - 1) * step > stop + tol) --count;
        std::vector<double> out(count);
        for (std::size_t k = 0; k < count; ++k) {
            out[k] = snap(start + static_cast<double>(k) * step);
        }
        return out;
    }
    std::vector<double> out;
    std::size_t pos = 0;
    while (true) {
        const auto comma = text.find(',', pos);
        out.push_back(parse_number(text.substr(pos, comma - pos), text));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "' for hashing");
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                                &EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 unavailable");
    }
    std::array<char, 1 << 16> buf{};
    while (in) {
        in.read(buf.data(), buf.size());
        if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), in.gcount());
    }
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
    std::ostringstream hex;
    for (unsigned int k = 0; k < len; ++k) {
        hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[k]);
    }
    return hex.str();
}

nlohmann::ordered_json params_json(const ModelParams& p) {
    return {{"alpha", p.alpha}, {"beta", p.beta}, {"tau_a", p.tau_a}, {"tau_b", p.tau_b}};
}

nlohmann::ordered_json config_json(const IntegratorConfig& c) {
    return {{"dt", c.dt},
            {"t_max", c.t_max},
            {"vel_tol", c.vel_tol},
            {"hold_steps", c.hold_steps},
            {"p_floor", c.p_floor},
            {"p_cap", c.p_cap},
            {"eps_e", c.eps_e},
            {"eps_a", c.eps_a},
            {"sample_stride", c.sample_stride}};
}

Manifest::Manifest(std::string command, std::vector<std::string> argv)
    : command_(std::move(command)),
      argv_(std::move(argv)),
      started_(std::chrono::system_clock::now()),
      start_tick_(std::chrono::steady_clock::now()) {}

void Manifest::set(const std::string& key, nlohmann::ordered_json value) {
    fields_[key] = std::move(value);
}

void Manifest::add_input(const std::filesystem::path& path) { inputs_.push_back(path); }
void Manifest::add_output(const std::filesystem::path& path) { outputs_.push_back(path); }

void Manifest::write(const std::filesystem::path& dir) const {
    nlohmann::ordered_json j;
    j["tool"] = "bankdyn";
    j["version"] = std::string(kToolVersion);
    j["command"] = command_;
    j["argv"] = argv_;
    for (const auto& [key, value] : fields_.items()) j[key] = value;
    auto inputs = nlohmann::ordered_json::array();
    for (const auto& p : inputs_) {
        inputs.push_back({{"path", p.string()}, {"sha256", sha256_file(p)}});
    }
    j["inputs"] = std::move(inputs);
    auto outputs = nlohmann::ordered_json::array();
    for (const auto& p : outputs_) {
        outputs.push_back({{"file", p.filename().string()}, {"sha256", sha256_file(p)}});
    }
    j["outputs"] = std::move(outputs);
    const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                       start_tick_).count();
    j["wall_clock"] = {{"started_utc", utc_timestamp(started_)}, {"elapsed_s", elapsed}};

    const auto path = dir / "manifest.json";
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << j.dump(2) << '\n';
}

}  // namespace bankdyn::cli
