#include "bankdyn/calibration.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <unordered_map>

#include "bankdyn/csv.hpp"
#include "bankdyn/error.hpp"

namespace bankdyn {

namespace {

bool is_iso_date(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    for (std::size_t k : {0, 1, 2, 3, 5, 6, 8, 9}) {
        if (!std::isdigit(static_cast<unsigned char>(s[k]))) return false;
    }
    return true;
}

}  // namespace

PricePanel::PricePanel(std::vector<std::string> dates, std::vector<std::string> asset_ids,
                       Matrix bond, Matrix equity)
    : dates_(std::move(dates)),
      asset_ids_(std::move(asset_ids)),
      bond_(std::move(bond)),
      equity_(std::move(equity)) {
    if (dates_.empty() || asset_ids_.empty()) throw ValidationError("empty price panel");
    if (bond_.rows() != dates_.size() || bond_.cols() != asset_ids_.size() ||
        equity_.rows() != dates_.size() || equity_.cols() != asset_ids_.size()) {
        throw ValidationError("panel series are not aligned with dates and assets");
    }
    for (std::size_t t = 1; t < dates_.size(); ++t) {
        if (!(dates_[t - 1] < dates_[t])) {
            throw ValidationError("panel dates must be strictly increasing ('" + dates_[t - 1] +
                                  "' then '" + dates_[t] + "')");
        }
    }
    for (std::size_t t = 0; t < dates_.size(); ++t) {
        for (std::size_t mu = 0; mu < asset_ids_.size(); ++mu) {
            if (!(bond_(t, mu) > 0.0) || !std::isfinite(bond_(t, mu)) || !(equity_(t, mu) > 0.0) ||
                !std::isfinite(equity_(t, mu))) {
                throw ValidationError("non-positive price for '" + asset_ids_[mu] + "' on " +
                                      dates_[t]);
            }
        }
    }
}

PricePanel PricePanel::smoothed(std::size_t days) const {
    if (days <= 1) return *this;
    auto average = [&](const Matrix& x) {
        Matrix out(x.rows(), x.cols(), 0.0);
        for (std::size_t mu = 0; mu < x.cols(); ++mu) {
            double sum = 0.0;
            for (std::size_t t = 0; t < x.rows(); ++t) {
                sum += x(t, mu);
                if (t >= days) sum -= x(t - days, mu);
                out(t, mu) = sum / static_cast<double>(std::min(t + 1, days));
            }
        }
        return out;
    };
    return PricePanel(dates_, asset_ids_, average(bond_), average(equity_));
}

PricePanel parse_panel(std::istream& in, std::string_view source) {
    const std::string name(source);
    csv::Reader reader(in, name);
    reader.expect_header({"date", "series_id", "series_type", "value"});

    // (date, asset) -> {bond, equity}
    std::map<std::string, std::unordered_map<std::string, std::pair<double, double>>> cells;
    std::vector<std::string> asset_ids;
    std::unordered_map<std::string, std::size_t> asset_pos;
    const double missing = std::numeric_limits<double>::quiet_NaN();
    while (auto row = reader.next()) {
        if (row->fields.size() != 4) throw ParseError(name, row->line, "expected 4 fields");
        const auto& date = row->fields[0];
        const auto& id = row->fields[1];
        const auto& type = row->fields[2];
        if (!is_iso_date(date)) {
            throw ParseError(name, row->line, "date '" + date + "' is not YYYY-MM-DD");
        }
        if (id.empty()) throw ParseError(name, row->line, "empty series_id");
        if (type != "bond" && type != "equity") {
            throw ParseError(name, row->line,
                             "series_type must be bond or equity, got '" + type + "'");
        }
        const double value = csv::parse_double(row->fields[3], name, row->line);
        if (asset_pos.emplace(id, asset_ids.size()).second) asset_ids.push_back(id);
        auto [it, fresh] = cells[date].try_emplace(id, missing, missing);
        double& slot = type == "bond" ? it->second.first : it->second.second;
        if (!std::isnan(slot)) {
            throw ValidationError(name + ":" + std::to_string(row->line) + ": duplicate " + type +
                                  " value for '" + id + "' on " + date);
        }
        slot = value;
    }
    if (cells.empty()) throw ValidationError(name + ": empty panel");

    std::vector<std::string> dates;
    Matrix bond(cells.size(), asset_ids.size(), missing);
    Matrix equity(cells.size(), asset_ids.size(), missing);
    for (const auto& [date, per_asset] : cells) {
        const std::size_t t = dates.size();
        dates.push_back(date);
        for (const auto& [id, values] : per_asset) {
            const std::size_t mu = asset_pos.at(id);
            bond(t, mu) = values.first;
            equity(t, mu) = values.second;
        }
        for (std::size_t mu = 0; mu < asset_ids.size(); ++mu) {
            if (std::isnan(bond(t, mu)) || std::isnan(equity(t, mu))) {
                throw ValidationError(name + ": '" + asset_ids[mu] +
                                      "' lacks a bond or equity value on " + date);
            }
        }
    }
    return PricePanel(std::move(dates), std::move(asset_ids), std::move(bond), std::move(equity));
}

PricePanel load_panel(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "'");
    return parse_panel(in, path);
}

void write_panel(std::ostream& out, const PricePanel& panel) {
    out << "date,series_id,series_type,value\n";
    for (std::size_t t = 0; t < panel.n_dates(); ++t) {
        for (std::size_t mu = 0; mu < panel.n_assets(); ++mu) {
            const auto id = csv::escape(panel.asset_ids()[mu]);
            out << panel.dates()[t] << ',' << id << ",bond,"
                << csv::format_double(panel.bond()(t, mu)) << '\n';
            out << panel.dates()[t] << ',' << id << ",equity,"
                << csv::format_double(panel.equity()(t, mu)) << '\n';
        }
    }
}

double symmetric_return(double x_start, double x_end) {
    if (!(x_start > 0.0) || !(x_end > 0.0)) {
        throw ValidationError("symmetric return needs positive prices");
    }
    return (x_end - x_start) / ((x_end + x_start) / 2.0);
}

std::vector<GammaEstimate> estimate_gamma(const PricePanel& input,
                                          const CalibrationOptions& options) {
    if (options.window_days < 2) throw ValidationError("window_days must be >= 2");
    if (options.stride < 1) throw ValidationError("stride must be >= 1");
    if (!(options.denominator_floor >= 0.0)) {
        throw ValidationError("denominator floor must be >= 0");
    }
    if (input.n_dates() < options.window_days) {
        throw ValidationError("panel has " + std::to_string(input.n_dates()) +
                              " dates, fewer than one window of " +
                              std::to_string(options.window_days));
    }
    const PricePanel panel = input.smoothed(options.smoothing_days);

    std::vector<GammaEstimate> out;
    for (std::size_t k = 0; k + options.window_days <= panel.n_dates(); k += options.stride) {
        const std::size_t last = k + options.window_days - 1;
        GammaEstimate g;
        g.window_start = panel.dates()[k];
        g.window_end = panel.dates()[last];
        for (std::size_t mu = 0; mu < panel.n_assets(); ++mu) {
            const double den = symmetric_return(panel.equity()(k, mu), panel.equity()(last, mu));
            if (std::abs(den) < options.denominator_floor || den == 0.0) continue;
            const double num = symmetric_return(panel.bond()(k, mu), panel.bond()(last, mu));
            g.asset_ids.push_back(panel.asset_ids()[mu]);
            g.per_asset.push_back(num / den);
        }
        if (g.per_asset.empty()) {
            g.all_dropped = true;
            g.mean = std::numeric_limits<double>::quiet_NaN();
            g.std = std::numeric_limits<double>::quiet_NaN();
        } else {
            const double n = static_cast<double>(g.per_asset.size());
            double sum = 0.0;
            for (double v : g.per_asset) sum += v;
            g.mean = sum / n;
            double ss = 0.0;
            for (double v : g.per_asset) ss += (v - g.mean) * (v - g.mean);
            g.std = std::sqrt(ss / n);
        }
        out.push_back(std::move(g));
    }
    return out;
}

std::string_view to_string(Regime r) noexcept {
    switch (r) {
        case Regime::Stable: return "Stable";
        case Regime::Unstable: return "Unstable";
        case Regime::Indeterminate: return "Indeterminate";
    }
    return "Indeterminate";
}

Regime classify_regime(const GammaEstimate& estimate) noexcept {
    if (estimate.all_dropped) return Regime::Indeterminate;
    if (estimate.mean + estimate.std < 1.0) return Regime::Stable;
    if (estimate.mean - estimate.std > 1.0) return Regime::Unstable;
    return Regime::Indeterminate;
}

void write_gamma_csv(std::ostream& out, const std::vector<GammaEstimate>& estimates) {
    out << "window_start,window_end,asset_id,gamma,gamma_std\n";
    for (const auto& g : estimates) {
        for (std::size_t k = 0; k < g.per_asset.size(); ++k) {
            out << g.window_start << ',' << g.window_end << ',' << csv::escape(g.asset_ids[k])
                << ',' << csv::format_double(g.per_asset[k]) << ",\n";
        }
        out << g.window_start << ',' << g.window_end << ",MEAN,";
        if (!g.all_dropped) {
            out << csv::format_double(g.mean) << ',' << csv::format_double(g.std);
        } else {
            out << ',';
        }
        out << '\n';
    }
}

}  // namespace bankdyn
