#include "bankdyn/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bankdyn/error.hpp"
#include "bankdyn/parallel.hpp"
#include "bankdyn/rng.hpp"

namespace bankdyn {

namespace {

/// Sweeps only need the final state.
IntegratorConfig sweep_config(const IntegratorConfig& cfg) {
    IntegratorConfig c = cfg;
    c.sample_stride = 0;
    return c;
}

std::size_t require_bank(const HoldingsMatrix& net, const std::string& id) {
    const auto idx = net.bank_index(id);
    if (!idx) throw ValidationError("unknown bank id '" + id + "'");
    return *idx;
}

}  // namespace

std::vector<ShockOutcome> shock_each_bank(const HoldingsMatrix& net, const ModelParams& params,
                                          double s, const IntegratorConfig& cfg,
                                          std::size_t jobs) {
    const auto c = sweep_config(cfg);
    std::vector<ShockOutcome> out(net.n_banks());
    parallel_for(net.n_banks(), jobs, [&](std::size_t i) {
        auto& o = out[i];
        o.bank_id = net.banks()[i].id;
        try {
            const auto traj = run(net, params, ShockSpec{o.bank_id, s}, c);
            o.final_prices = traj.final_state().p;
            o.verdict = traj.verdict;
            o.failures = traj.final_state().failure_count();
        } catch (const Error& e) {
            o.error = e.what();
        }
    });
    return out;
}

std::string_view to_string(ThresholdFlag f) noexcept {
    switch (f) {
        case ThresholdFlag::Converged: return "converged";
        case ThresholdFlag::NeverFails: return "never-fails-at-lower-bracket";
        case ThresholdFlag::FailsAtUpper: return "fails-at-upper-bracket";
    }
    return "converged";
}

bool fails_with_equity(const HoldingsMatrix& net, const ModelParams& params, std::size_t target,
                       double multiplier, const ShockSpec& probe, const IntegratorConfig& cfg) {
    const auto tuned = net.with_equity(target, multiplier * net.banks().at(target).equity0);
    const Engine engine(tuned, params, sweep_config(cfg));
    auto start = apply_shock(tuned, initial_state(tuned), probe, params);
    const auto traj = engine.run_from(std::move(start), [target](const SystemState& s) {
        return s.failed[target] != 0;
    });
    return traj.final_state().failed[target] != 0;
}

ThresholdResult survival_threshold(const HoldingsMatrix& net, const ModelParams& params,
                                   std::size_t target, const ShockSpec& probe,
                                   const IntegratorConfig& cfg, const SurvivalSearch& search) {
    if (target >= net.n_banks()) throw ValidationError("target bank index out of range");
    if (require_bank(net, probe.target_bank) == target) {
        throw ValidationError("probe shock must hit a bank other than the target");
    }
    if (!(search.lower > 0.0) || !(search.upper > search.lower) || !(search.rel_tol > 0.0) ||
        search.max_iter < 1) {
        throw ValidationError("invalid survival search bracket");
    }
    const double below = 1.0 - 10.0 * search.rel_tol;
    auto fails = [&](double lambda) {
        return fails_with_equity(net, params, target, lambda, probe, cfg);
    };

    double lo = search.lower;
    double hi = search.upper;
    if (!fails(lo)) return {lo, lo * below, ThresholdFlag::NeverFails, 0};
    if (fails(hi)) return {hi, hi * below, ThresholdFlag::FailsAtUpper, 0};

    int iterations = 0;
    while (hi / lo - 1.0 > search.rel_tol && iterations < search.max_iter) {
        const double mid = std::sqrt(lo * hi);
        if (fails(mid)) lo = mid;
        else hi = mid;
        ++iterations;
    }
    return {hi, hi * below, ThresholdFlag::Converged, iterations};
}

BankRankResult bank_rank(const HoldingsMatrix& net, const ModelParams& params,
                         const ShockSpec& probe, const IntegratorConfig& cfg,
                         const BankRankOptions& options) {
    const std::size_t probe_idx = require_bank(net, probe.target_bank);
    const auto c = sweep_config(cfg);
    BankRankResult result;

    HoldingsMatrix working = net;
    if (options.fortify) {
        const auto baseline = run(net, params, probe, c);
        for (const auto& f : baseline.failed_banks) {
            const double holdings = net.holdings_value(f.bank_index);
            const double equity = net.banks()[f.bank_index].equity0;
            working = working.with_equity(f.bank_index, std::max(equity, holdings));
            result.fortified.push_back(f.bank_id);
        }
    }
    const double initial_value = working.total_value();
    {
        const auto baseline = run(working, params, probe, c);
        result.baseline_rank = baseline.final_state().holdings_value() / initial_value;
    }

    std::vector<std::size_t> targets;
    for (std::size_t i = 0; i < net.n_banks(); ++i) {
        if (i != probe_idx) targets.push_back(i);
    }
    const bool bounded = params.alpha >= 0.0 && params.beta >= 0.0 && probe.magnitude < 0.0;

    std::vector<BankRankReport> reports(targets.size());
    parallel_for(targets.size(), options.jobs, [&](std::size_t k) {
        const std::size_t i = targets[k];
        auto& r = reports[k];
        r.bank_id = working.banks()[i].id;
        r.total_holdings = working.holdings_value(i);
        r.equity0 = working.banks()[i].equity0;
        try {
            const auto th = survival_threshold(working, params, i, probe, c, options.search);
            r.survival_equity_ratio = th.lambda_star;
            r.threshold_flag = th.flag;
            const auto tuned = working.with_equity(i, th.lambda_below * r.equity0);
            const auto traj = run(tuned, params, probe, c);
            r.final_holdings = traj.final_state().holdings_value();
            r.rank_value = r.final_holdings / initial_value;
            r.verdict = traj.verdict;
            r.out_of_bounds = bounded && r.rank_value > 1.0 + 1e-12;
        } catch (const Error& e) {
            r.error = e.what();
        }
    });

    std::stable_sort(reports.begin(), reports.end(),
                     [](const BankRankReport& a, const BankRankReport& b) {
                         return a.rank_value < b.rank_value;
                     });
    result.reports = std::move(reports);
    return result;
}

PhaseGrid phase_diagram(const HoldingsMatrix& net, const std::vector<double>& alphas,
                        const std::vector<double>& betas, const ShockSpec& shock,
                        const IntegratorConfig& cfg, const ModelParams& base, std::size_t jobs) {
    if (alphas.empty() || betas.empty()) throw ValidationError("phase grid axes must be non-empty");
    const auto c = sweep_config(cfg);
    const std::size_t na = alphas.size();
    const std::size_t nb = betas.size();
    PhaseGrid g;
    g.alphas = alphas;
    g.betas = betas;
    g.order_param = Matrix(na, nb, 0.0);
    g.relax_time = Matrix(na, nb, 0.0);
    g.verdicts.assign(na * nb, Verdict::Timeout);
    g.failures.assign(na * nb, 0);
    g.errors.assign(na * nb, {});

    parallel_for(na * nb, jobs, [&](std::size_t cell) {
        const std::size_t ia = cell / nb;
        const std::size_t ib = cell % nb;
        ModelParams p = base;
        p.alpha = alphas[ia];
        p.beta = betas[ib];
        try {
            const auto traj = run(net, p, shock, c);
            const auto& last = traj.final_state();
            double sum = 0.0;
            for (double v : last.p) sum += v;
            g.order_param(ia, ib) = sum / static_cast<double>(last.p.size());
            g.relax_time(ia, ib) = traj.relaxation_time;
            g.verdicts[cell] = traj.verdict;
            g.failures[cell] = last.failure_count();
        } catch (const Error& e) {
            g.errors[cell] = e.what();
        }
    });
    return g;
}

HoldingsMatrix rewire(const HoldingsMatrix& net, Rng& rng, RewireMode mode) {
    const std::size_t n = net.n_banks();
    const std::size_t m = net.n_assets();
    const Matrix& w = net.weights();
    Matrix out(n, m, 0.0);
    std::vector<std::size_t> perm(n);
    if (mode == RewireMode::GlobalRow) {
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        rng.shuffle(std::span<std::size_t>(perm));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t mu = 0; mu < m; ++mu) out(i, mu) = w(perm[i], mu);
        }
    } else {
        for (std::size_t mu = 0; mu < m; ++mu) {
            std::iota(perm.begin(), perm.end(), std::size_t{0});
            rng.shuffle(std::span<std::size_t>(perm));
            for (std::size_t i = 0; i < n; ++i) out(i, mu) = w(perm[i], mu);
        }
    }
    auto opts = net.options();
    opts.allow_idle_banks = true;
    return net.with_weights(std::move(out), opts);
}

std::vector<RewireTrial> rewire_experiment(const HoldingsMatrix& net, const ModelParams& params,
                                           const ShockSpec& shock, const IntegratorConfig& cfg,
                                           std::uint64_t seed, std::size_t trials,
                                           RewireMode mode, std::size_t jobs) {
    if (trials < 1) throw ValidationError("trials must be >= 1");
    const auto c = sweep_config(cfg);
    std::vector<RewireTrial> out(trials);
    parallel_for(trials, jobs, [&](std::size_t k) {
        auto& t = out[k];
        t.trial = k;
        try {
            Rng rng(derive_seed(seed, "rewire", k));
            const auto wired = rewire(net, rng, mode);
            const auto traj = run(wired, params, shock, c);
            t.final_prices = traj.final_state().p;
            t.verdict = traj.verdict;
            t.failures = traj.final_state().failure_count();
        } catch (const Error& e) {
            t.error = e.what();
        }
    });
    return out;
}

std::size_t worst_hit_asset(const std::vector<double>& final_prices) {
    return static_cast<std::size_t>(
        std::distance(final_prices.begin(),
                      std::min_element(final_prices.begin(), final_prices.end())));
}

}  // namespace bankdyn
