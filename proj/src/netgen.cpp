#include "bankdyn/netgen.hpp"

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "bankdyn/error.hpp"
#include "bankdyn/rng.hpp"

namespace bankdyn {

namespace {

std::string asset_name(std::size_t mu, std::size_t n_assets) {
    static constexpr const char* kGiips[] = {"GR", "IT", "PT", "ES", "IE"};
    if (n_assets == 5) return kGiips[mu];
    return "A" + std::to_string(mu + 1);
}

std::string bank_name(std::size_t i, std::size_t n_banks) {
    const int width = n_banks >= 1000 ? static_cast<int>(std::to_string(n_banks).size()) : 3;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "B%0*zu", width, i + 1);
    return buf;
}

}  // namespace

void GenSpec::validate() const {
    if (n_banks < 1 || n_assets < 1) throw ValidationError("counts must be >= 1");
    if (!(sparsity > 0.0 && sparsity <= 1.0)) throw ValidationError("sparsity must be in (0, 1]");
    if (!std::isfinite(log_mean) || !std::isfinite(log_sigma) || log_sigma < 0.0) {
        throw ValidationError("log-normal parameters must be finite, log_sigma >= 0");
    }
    if (!(equity_multiple_min > 0.0) || !(equity_multiple_max >= equity_multiple_min) ||
        !std::isfinite(equity_multiple_max)) {
        throw ValidationError("equity multiples must satisfy 0 < min <= max");
    }
}

HoldingsMatrix generate(const GenSpec& spec) {
    spec.validate();
    const std::size_t n = spec.n_banks;
    const std::size_t m = spec.n_assets;
    Matrix w(n, m, 0.0);
    std::vector<BankRecord> banks;
    banks.reserve(n);

    for (std::size_t i = 0; i < n; ++i) {
        Rng rng(derive_seed(spec.seed, "netgen.bank", i));
        bool any = false;
        while (!any) {
            for (std::size_t mu = 0; mu < m; ++mu) {
                const bool held = rng.uniform() < spec.sparsity;
                const double z = rng.normal();
                w(i, mu) = held ? std::exp(spec.log_mean + spec.log_sigma * z) : 0.0;
                any = any || held;
            }
        }
        const double multiple = rng.uniform(spec.equity_multiple_min, spec.equity_multiple_max);
        const double holdings = w.row_sum(i);
        const double equity = multiple * holdings;
        banks.push_back({bank_name(i, n), equity - holdings, equity});
    }

    std::vector<std::size_t> cols;
    for (std::size_t mu = 0; mu < m; ++mu) {
        if (w.col_sum(mu) > 0.0) cols.push_back(mu);
    }
    if (cols.empty()) throw ValidationError("generated network is empty");

    Matrix kept(n, cols.size(), 0.0);
    std::vector<std::string> ids;
    for (std::size_t c = 0; c < cols.size(); ++c) {
        ids.push_back(asset_name(cols[c], m));
        for (std::size_t i = 0; i < n; ++i) kept(i, c) = w(i, cols[c]);
    }
    // Dropping an empty column can leave a bank idle only if it held nothing,
    // which the redraw loop rules out.
    return HoldingsMatrix(std::move(banks), std::move(ids), std::move(kept));
}

}  // namespace bankdyn
