#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "bankdyn/engine.hpp"
#include "bankdyn/matrix.hpp"
#include "bankdyn/model.hpp"

namespace bankdyn {

// ---------------------------------------------------------------------------
// Per-bank shock sweep

struct ShockOutcome {
    std::string bank_id;
    std::vector<double> final_prices;
    Verdict verdict = Verdict::Timeout;
    std::size_t failures = 0;
    std::string error;  // non-empty if this run threw; the sweep continues
};

/// One run per bank, each shocking only that bank with magnitude `s`.
[[nodiscard]] std::vector<ShockOutcome> shock_each_bank(const HoldingsMatrix& net,
                                                        const ModelParams& params, double s,
                                                        const IntegratorConfig& cfg,
                                                        std::size_t jobs = 1);

// ---------------------------------------------------------------------------
// Survival threshold and BankRank

enum class ThresholdFlag : std::uint8_t {
    Converged,
    NeverFails,    // survives even at the lower bracket end
    FailsAtUpper,  // fails even at the upper bracket end
};

[[nodiscard]] std::string_view to_string(ThresholdFlag f) noexcept;

struct SurvivalSearch {
    double lower = 1e-8;  // multipliers of E_i(0)
    double upper = 1e3;
    double rel_tol = 1e-3;
    int max_iter = 40;
};

struct ThresholdResult {
    double lambda_star = 0.0;   // smallest multiplier found at which the bank survives
    double lambda_below = 0.0;  // lambda_star * (1 - 10 rel_tol): just below the threshold
    ThresholdFlag flag = ThresholdFlag::Converged;
    int iterations = 0;
};

/// True if bank `target` fails at any time when its initial equity is
/// multiplied by `multiplier` and `probe` is applied.
[[nodiscard]] bool fails_with_equity(const HoldingsMatrix& net, const ModelParams& params,
                                     std::size_t target, double multiplier,
                                     const ShockSpec& probe, const IntegratorConfig& cfg);

/// Geometric bisection on the equity multiplier of `target` under the probe
/// shock on another bank. Below lambda_star the target fails during the run.
[[nodiscard]] ThresholdResult survival_threshold(const HoldingsMatrix& net,
                                                 const ModelParams& params, std::size_t target,
                                                 const ShockSpec& probe,
                                                 const IntegratorConfig& cfg,
                                                 const SurvivalSearch& search = {});

struct BankRankReport {
    std::string bank_id;
    double rank_value = 0.0;             // R^i = sum (A p)(t_f) / sum (A p)(0)
    double survival_equity_ratio = 0.0;  // lambda_star
    double final_holdings = 0.0;
    double total_holdings = 0.0;         // sum_mu A_imu(0)
    double equity0 = 0.0;                // after fortification, before tuning
    ThresholdFlag threshold_flag = ThresholdFlag::Converged;
    Verdict verdict = Verdict::Timeout;
    bool out_of_bounds = false;  // R^i > 1 although alpha, beta >= 0 and the probe is negative
    std::string error;
};

struct BankRankOptions {
    bool fortify = true;
    SurvivalSearch search;
    std::size_t jobs = 1;
};

struct BankRankResult {
    std::vector<BankRankReport> reports;  // ascending by rank_value (ties by input order)
    std::vector<std::string> fortified;   // banks whose equity was raised to their holdings
    double baseline_rank = 0.0;           // holdings ratio of the probe-only run
};

/// Ranks every bank other than the probe target by the damage its failure
/// causes. With `fortify`, banks failing under the probe alone first get
/// E_i(0) raised to sum_mu A_imu(0); fortified equities stay in place for all
/// subsequent runs.
[[nodiscard]] BankRankResult bank_rank(const HoldingsMatrix& net, const ModelParams& params,
                                       const ShockSpec& probe, const IntegratorConfig& cfg,
                                       const BankRankOptions& options = {});

// ---------------------------------------------------------------------------
// Phase diagram

struct PhaseGrid {
    std::vector<double> alphas;
    std::vector<double> betas;
    Matrix order_param;  // sum_mu p_mu(t_f) / n_assets
    Matrix relax_time;
    std::vector<Verdict> verdicts;      // row-major |alphas| x |betas|
    std::vector<std::size_t> failures;  // row-major
    std::vector<std::string> errors;    // row-major; non-empty marks Timeout-with-error

    [[nodiscard]] Verdict verdict(std::size_t ia, std::size_t ib) const {
        return verdicts[ia * betas.size() + ib];
    }
    [[nodiscard]] std::size_t failure_count(std::size_t ia, std::size_t ib) const {
        return failures[ia * betas.size() + ib];
    }
};

/// One run per (alpha, beta) cell; tau_a and tau_b are taken from `base`.
[[nodiscard]] PhaseGrid phase_diagram(const HoldingsMatrix& net, const std::vector<double>& alphas,
                                      const std::vector<double>& betas, const ShockSpec& shock,
                                      const IntegratorConfig& cfg, const ModelParams& base = {},
                                      std::size_t jobs = 1);

// ---------------------------------------------------------------------------
// Network rewiring

enum class RewireMode : std::uint8_t {
    PerColumn,  // independent permutation of bank indices within each asset column
    GlobalRow,  // one permutation of whole holdings rows
};

class Rng;

/// Permuted copy of the holdings. Asset totals are preserved exactly, equities
/// are kept and cash_minus_liability is re-derived. Banks may end up idle.
[[nodiscard]] HoldingsMatrix rewire(const HoldingsMatrix& net, Rng& rng, RewireMode mode);

struct RewireTrial {
    std::size_t trial = 0;
    std::vector<double> final_prices;
    Verdict verdict = Verdict::Timeout;
    std::size_t failures = 0;
    std::string error;
};

[[nodiscard]] std::vector<RewireTrial> rewire_experiment(
    const HoldingsMatrix& net, const ModelParams& params, const ShockSpec& shock,
    const IntegratorConfig& cfg, std::uint64_t seed, std::size_t trials,
    RewireMode mode = RewireMode::PerColumn, std::size_t jobs = 1);

/// Index of the asset with the lowest final price (first on ties).
[[nodiscard]] std::size_t worst_hit_asset(const std::vector<double>& final_prices);

}  // namespace bankdyn
