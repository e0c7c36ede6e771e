#include "bankdyn/model.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "bankdyn/error.hpp"

namespace bankdyn {

namespace {

bool identity_holds(double equity, double holdings, double cash) {
    const double scale = std::max({std::abs(equity), std::abs(holdings), std::abs(cash)});
    return std::abs(equity - (holdings + cash)) <= kEquityIdentityTol * scale;
}

}  // namespace

HoldingsMatrix::HoldingsMatrix(std::vector<BankRecord> banks, std::vector<std::string> asset_ids,
                               Matrix weights, Options options)
    : banks_(std::move(banks)), weights_(std::move(weights)), options_(options) {
    if (banks_.empty()) throw ValidationError("network has no banks");
    if (asset_ids.empty()) throw ValidationError("network has no assets");
    if (weights_.rows() != banks_.size() || weights_.cols() != asset_ids.size()) {
        throw ValidationError("weights shape does not match bank/asset counts");
    }

    std::unordered_set<std::string> seen;
    for (const auto& b : banks_) {
        if (b.id.empty()) throw ValidationError("empty bank id");
        if (!seen.insert(b.id).second) throw ValidationError("duplicate bank id '" + b.id + "'");
    }
    seen.clear();
    for (const auto& id : asset_ids) {
        if (id.empty()) throw ValidationError("empty asset id");
        if (!seen.insert(id).second) throw ValidationError("duplicate asset id '" + id + "'");
    }

    for (std::size_t i = 0; i < banks_.size(); ++i) {
        bool any_positive = false;
        for (std::size_t mu = 0; mu < asset_ids.size(); ++mu) {
            const double w = weights_(i, mu);
            if (!std::isfinite(w)) {
                throw ValidationError("non-finite weight for bank '" + banks_[i].id + "'");
            }
            if (w < 0.0) {
                throw ValidationError("negative weight for bank '" + banks_[i].id + "', asset '" +
                                      asset_ids[mu] + "'");
            }
            any_positive = any_positive || w > 0.0;
        }
        if (!any_positive && !options_.allow_idle_banks) {
            throw ValidationError("bank '" + banks_[i].id + "' holds no assets");
        }
        const auto& b = banks_[i];
        if (!std::isfinite(b.equity0) || !(b.equity0 > 0.0)) {
            throw ValidationError("bank '" + b.id + "' has non-positive equity");
        }
        if (!identity_holds(b.equity0, holdings_value(i), b.cash_minus_liability)) {
            throw ValidationError("bank '" + b.id +
                                  "': equity disagrees with holdings + cash_minus_liability");
        }
    }

    assets_.reserve(asset_ids.size());
    for (std::size_t mu = 0; mu < asset_ids.size(); ++mu) {
        AssetRecord rec{std::move(asset_ids[mu]), 1.0, weights_.col_sum(mu)};
        if (!(rec.total0 > 0.0)) {
            throw ValidationError("asset '" + rec.id + "' has zero total holdings");
        }
        assets_.push_back(std::move(rec));
    }
}

std::optional<std::size_t> HoldingsMatrix::bank_index(std::string_view id) const {
    for (std::size_t i = 0; i < banks_.size(); ++i) {
        if (banks_[i].id == id) return i;
    }
    return std::nullopt;
}

std::optional<std::size_t> HoldingsMatrix::asset_index(std::string_view id) const {
    for (std::size_t mu = 0; mu < assets_.size(); ++mu) {
        if (assets_[mu].id == id) return mu;
    }
    return std::nullopt;
}

double HoldingsMatrix::total_value() const noexcept {
    double s = 0.0;
    for (const auto& a : assets_) s += a.total0 * a.price0;
    return s;
}

std::size_t HoldingsMatrix::largest_holder() const noexcept {
    std::size_t best = 0;
    double best_value = -1.0;
    for (std::size_t i = 0; i < banks_.size(); ++i) {
        const double v = holdings_value(i);
        if (v > best_value) {
            best_value = v;
            best = i;
        }
    }
    return best;
}

HoldingsMatrix HoldingsMatrix::with_equity(std::size_t bank, double equity0) const {
    auto banks = banks_;
    banks.at(bank).equity0 = equity0;
    banks[bank].cash_minus_liability = equity0 - holdings_value(bank);
    std::vector<std::string> ids;
    ids.reserve(assets_.size());
    for (const auto& a : assets_) ids.push_back(a.id);
    return HoldingsMatrix(std::move(banks), std::move(ids), weights_, options_);
}

HoldingsMatrix HoldingsMatrix::with_weights(Matrix weights, Options options) const {
    if (weights.rows() != weights_.rows() || weights.cols() != weights_.cols()) {
        throw ValidationError("replacement weights have the wrong shape");
    }
    auto banks = banks_;
    for (std::size_t i = 0; i < banks.size(); ++i) {
        banks[i].cash_minus_liability = banks[i].equity0 - weights.row_sum(i);
    }
    std::vector<std::string> ids;
    ids.reserve(assets_.size());
    for (const auto& a : assets_) ids.push_back(a.id);
    return HoldingsMatrix(std::move(banks), std::move(ids), std::move(weights), options);
}

void ModelParams::validate() const {
    if (!std::isfinite(alpha) || !std::isfinite(beta)) {
        throw ValidationError("alpha and beta must be finite");
    }
    if (!(tau_a > 0.0) || !(tau_b > 0.0) || !std::isfinite(tau_a) || !std::isfinite(tau_b)) {
        throw ValidationError("response times must be positive");
    }
}

void ShockSpec::validate() const {
    if (!std::isfinite(magnitude) || magnitude <= -1.0) {
        throw ValidationError("shock magnitude must be > -1");
    }
}

std::size_t SystemState::failure_count() const noexcept {
    return static_cast<std::size_t>(std::count(failed.begin(), failed.end(), std::uint8_t{1}));
}

double SystemState::holdings_value() const noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t mu = 0; mu < a.cols(); ++mu) s += a(i, mu) * p[mu];
    }
    return s;
}

SystemState initial_state(const HoldingsMatrix& net) {
    const std::size_t n = net.n_banks();
    const std::size_t m = net.n_assets();
    SystemState s;
    s.t = 0.0;
    s.a = net.weights();
    s.da = Matrix(n, m, 0.0);
    s.p.resize(m);
    for (std::size_t mu = 0; mu < m; ++mu) s.p[mu] = net.assets()[mu].price0;
    s.dp.assign(m, 0.0);
    s.e.resize(n);
    for (std::size_t i = 0; i < n; ++i) s.e[i] = net.banks()[i].equity0;
    s.de.assign(n, 0.0);
    s.failed.assign(n, 0);
    return s;
}

double equity_identity_error(const HoldingsMatrix& net, const SystemState& state) {
    double worst = 0.0;
    for (std::size_t i = 0; i < net.n_banks(); ++i) {
        double v = net.banks()[i].cash_minus_liability;
        for (std::size_t mu = 0; mu < net.n_assets(); ++mu) v += state.a(i, mu) * state.p[mu];
        worst = std::max(worst, std::abs(state.e[i] - v) / std::abs(state.e[i]));
    }
    return worst;
}

}  // namespace bankdyn
