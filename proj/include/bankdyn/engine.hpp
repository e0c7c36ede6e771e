#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bankdyn/model.hpp"

namespace bankdyn {

enum class Verdict : std::uint8_t { Equilibrium, Crash, Bubble, Timeout };

[[nodiscard]] std::string_view to_string(Verdict v) noexcept;
[[nodiscard]] std::optional<Verdict> verdict_from_string(std::string_view s) noexcept;

struct IntegratorConfig {
    double dt = 0.0;     // 0 selects min(tau_a, tau_b) / 50
    double t_max = 0.0;  // 0 selects 200 * max(tau_a, tau_b)
    double vel_tol = 1e-8;  // on velocities scaled by response time and holdings/price scale
    int hold_steps = 50;
    double p_floor = 1e-6;  // any price below: Crash
    double p_cap = 1e3;     // any price above: Bubble
    double eps_e = 1e-9;    // failure when E_i <= eps_e * E_i(0)
    double eps_a = 1e-12;   // price forcing off when A_mu < eps_a * A_mu(0)
    std::size_t sample_stride = 10;  // keep every k-th step; 0 keeps only first and last

    /// Copy with defaults filled in for `params`. Throws ValidationError if any
    /// value is non-positive or dt >= min(tau_a, tau_b).
    [[nodiscard]] IntegratorConfig resolved(const ModelParams& params) const;
};

struct BankFailure {
    std::string bank_id;
    std::size_t bank_index = 0;
    double t_fail = 0.0;
};

struct Trajectory {
    std::vector<SystemState> samples;
    Verdict verdict = Verdict::Timeout;
    double relaxation_time = 0.0;
    std::vector<BankFailure> failed_banks;
    std::size_t steps = 0;
    bool interrupted = false;  // a stop predicate ended the run before any verdict

    [[nodiscard]] const SystemState& final_state() const { return samples.back(); }
};

/// Called after every step; returning true stops the run early.
using StopPredicate = std::function<bool(const SystemState&)>;

/// Integrates the lagged second-order bank/asset equations
///
///   tau_B A'' + A' = beta (E'/E) A          (per bank i, asset mu)
///   tau_A p'' + p' = alpha (A_mu'/A_mu) p   (per asset mu, A_mu = sum_i A_imu)
///   E' = sum_mu A_imu p'_mu                 (between impulses)
///
/// with classical RK4 on (A, A', p, p', E). Failure and non-negativity are
/// enforced after each full step. A step in which some equity or asset total
/// would lose more than half its value is split in halves (recursively) so
/// that failures are resolved in time; the outer time grid stays fixed. The engine copies what it needs from the
/// network and is safe to share across threads.
class Engine {
public:
    Engine(const HoldingsMatrix& net, const ModelParams& params, const IntegratorConfig& cfg);

    [[nodiscard]] const ModelParams& params() const noexcept { return params_; }
    [[nodiscard]] const IntegratorConfig& config() const noexcept { return cfg_; }

    /// Advances one step of size dt in place.
    void step(SystemState& state) const;

    /// max over live holdings and prices of |velocity| * tau / scale.
    [[nodiscard]] double relative_velocity(const SystemState& state) const noexcept;

    /// Runs from `start` (already shocked) until a verdict, t_max, or `stop`.
    [[nodiscard]] Trajectory run_from(SystemState start, const StopPredicate& stop = {}) const;

private:
    struct Workspace;
    void derivative(std::span<const double> y, std::span<double> dy,
                    const std::vector<std::uint8_t>& failed) const noexcept;
    /// Trial RK4 step of size h from y into ws.out; false if it moved too far.
    bool rk4(std::span<const double> y, double h, const std::vector<std::uint8_t>& failed,
             Workspace& ws) const;
    void substep(SystemState& state, double h, int depth, Workspace& ws) const;
    void advance(SystemState& state, Workspace& ws) const;

    ModelParams params_;
    IntegratorConfig cfg_;
    std::size_t n_ = 0;
    std::size_t m_ = 0;
    std::vector<std::string> bank_ids_;
    std::vector<std::string> asset_ids_;
    std::vector<double> equity0_;
    std::vector<double> fail_level_;      // eps_e * E_i(0)
    std::vector<double> total_guard_;     // eps_a * A_mu(0)
    std::vector<double> holding_scale_;   // A_imu(0)
};

/// Applies the impulse f_j = s E_j delta(t) to a state: E_j -> (1+s) E_j and the
/// holdings velocity of bank j jumps by beta A_jmu ln(1+s) / tau_B.
[[nodiscard]] SystemState apply_shock(const HoldingsMatrix& net, const SystemState& state,
                                      const ShockSpec& shock, const ModelParams& params);

/// One integration step (convenience wrapper around Engine::step).
[[nodiscard]] SystemState step(const HoldingsMatrix& net, const SystemState& state,
                               const ModelParams& params, const IntegratorConfig& cfg);

/// Shocks the equilibrium initial state and integrates to a verdict.
[[nodiscard]] Trajectory run(const HoldingsMatrix& net, const ModelParams& params,
                             const ShockSpec& shock, const IntegratorConfig& cfg);

}  // namespace bankdyn
