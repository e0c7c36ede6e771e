#include "bankdyn/engine.hpp"

#include <algorithm>
#include <cmath>

#include "bankdyn/error.hpp"

namespace bankdyn {

std::string_view to_string(Verdict v) noexcept {
    switch (v) {
        case Verdict::Equilibrium: return "Equilibrium";
        case Verdict::Crash: return "Crash";
        case Verdict::Bubble: return "Bubble";
        case Verdict::Timeout: return "Timeout";
    }
    return "Timeout";
}

std::optional<Verdict> verdict_from_string(std::string_view s) noexcept {
    for (Verdict v : {Verdict::Equilibrium, Verdict::Crash, Verdict::Bubble, Verdict::Timeout}) {
        if (to_string(v) == s) return v;
    }
    return std::nullopt;
}

IntegratorConfig IntegratorConfig::resolved(const ModelParams& params) const {
    params.validate();
    IntegratorConfig c = *this;
    const double tau_min = std::min(params.tau_a, params.tau_b);
    const double tau_max = std::max(params.tau_a, params.tau_b);
    if (c.dt == 0.0) c.dt = tau_min / 50.0;
    if (c.t_max == 0.0) c.t_max = 200.0 * tau_max;
    auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!positive(c.dt) || !positive(c.t_max) || !positive(c.vel_tol) || !positive(c.p_floor) ||
        !positive(c.p_cap) || !positive(c.eps_e) || !positive(c.eps_a) || c.hold_steps <= 0) {
        throw ValidationError("integrator settings must be strictly positive");
    }
    if (c.dt >= tau_min) throw ValidationError("dt must be smaller than min(tau_a, tau_b)");
    if (c.p_floor >= 1.0 || c.p_cap <= 1.0) {
        throw ValidationError("p_floor must be < 1 and p_cap > 1");
    }
    return c;
}

struct Engine::Workspace {
    std::vector<double> y, k1, k2, k3, k4, tmp, out;
    std::vector<double> fail_time;  // set when a bank fails inside a substep
    Workspace(std::size_t size, std::size_t banks)
        : y(size), k1(size), k2(size), k3(size), k4(size), tmp(size), out(size),
          fail_time(banks, 0.0) {}
};

Engine::Engine(const HoldingsMatrix& net, const ModelParams& params, const IntegratorConfig& cfg)
    : params_(params), cfg_(cfg.resolved(params)), n_(net.n_banks()), m_(net.n_assets()) {
    bank_ids_.reserve(n_);
    equity0_.reserve(n_);
    fail_level_.reserve(n_);
    for (const auto& b : net.banks()) {
        bank_ids_.push_back(b.id);
        equity0_.push_back(b.equity0);
        fail_level_.push_back(cfg_.eps_e * b.equity0);
    }
    for (const auto& a : net.assets()) {
        asset_ids_.push_back(a.id);
        total_guard_.push_back(cfg_.eps_a * a.total0);
    }
    const auto w = net.weights().flat();
    holding_scale_.assign(w.begin(), w.end());
}

// State layout: [a (n*m) | da (n*m) | p (m) | dp (m) | e (n)].
void Engine::derivative(std::span<const double> y, std::span<double> dy,
                        const std::vector<std::uint8_t>& failed) const noexcept {
    const std::size_t nm = n_ * m_;
    const double* a = y.data();
    const double* da = a + nm;
    const double* p = da + nm;
    const double* dp = p + m_;
    const double* e = dp + m_;
    double* d_a = dy.data();
    double* d_da = d_a + nm;
    double* d_p = d_da + nm;
    double* d_dp = d_p + m_;
    double* d_e = d_dp + m_;

    const double inv_tau_b = 1.0 / params_.tau_b;
    const double inv_tau_a = 1.0 / params_.tau_a;

    std::copy(da, da + nm, d_a);
    for (std::size_t i = 0; i < n_; ++i) {
        const double* a_row = a + i * m_;
        const double* da_row = da + i * m_;
        double* dda_row = d_da + i * m_;
        if (failed[i]) {
            d_e[i] = 0.0;
            std::fill(dda_row, dda_row + m_, 0.0);
            continue;
        }
        double de = 0.0;
        for (std::size_t mu = 0; mu < m_; ++mu) de += a_row[mu] * dp[mu];
        d_e[i] = de;
        // Intermediate stages may overshoot below the failure level; the
        // failure rule itself is applied after the full step.
        const double rate = params_.beta * de / std::max(e[i], fail_level_[i]);
        for (std::size_t mu = 0; mu < m_; ++mu) {
            dda_row[mu] = (rate * a_row[mu] - da_row[mu]) * inv_tau_b;
        }
    }

    for (std::size_t mu = 0; mu < m_; ++mu) {
        double total = 0.0;
        double flow = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            total += a[i * m_ + mu];
            flow += da[i * m_ + mu];
        }
        const double forcing =
            total > total_guard_[mu] ? params_.alpha * (flow / total) * p[mu] : 0.0;
        d_p[mu] = dp[mu];
        d_dp[mu] = (forcing - dp[mu]) * inv_tau_a;
    }
}

namespace {

// A substep is accepted if no equity, asset total or price loses more than
// this fraction of its value within it.
constexpr double kMaxDrop = 0.5;
constexpr int kMaxRefine = 30;

}  // namespace

bool Engine::rk4(std::span<const double> y, double h, const std::vector<std::uint8_t>& failed,
                 Workspace& ws) const {
    const std::size_t nm = n_ * m_;
    const std::size_t size = y.size();
    const std::size_t e_off = 2 * nm + 2 * m_;
    bool smooth = true;
    auto check_stage = [&](std::span<const double> z) {
        for (std::size_t i = 0; i < n_; ++i) {
            if (!failed[i] && z[e_off + i] < (1.0 - kMaxDrop) * y[e_off + i]) smooth = false;
        }
        for (std::size_t mu = 0; mu < m_; ++mu) {
            double before = 0.0;
            double after = 0.0;
            for (std::size_t i = 0; i < n_; ++i) {
                before += y[i * m_ + mu];
                after += z[i * m_ + mu];
            }
            if (after < (1.0 - kMaxDrop) * before) smooth = false;
        }
    };

    derivative(y, ws.k1, failed);
    for (std::size_t k = 0; k < size; ++k) ws.tmp[k] = y[k] + 0.5 * h * ws.k1[k];
    check_stage(ws.tmp);
    derivative(ws.tmp, ws.k2, failed);
    for (std::size_t k = 0; k < size; ++k) ws.tmp[k] = y[k] + 0.5 * h * ws.k2[k];
    check_stage(ws.tmp);
    derivative(ws.tmp, ws.k3, failed);
    for (std::size_t k = 0; k < size; ++k) ws.tmp[k] = y[k] + h * ws.k3[k];
    check_stage(ws.tmp);
    derivative(ws.tmp, ws.k4, failed);
    for (std::size_t k = 0; k < size; ++k) {
        ws.out[k] = y[k] + h / 6.0 * (ws.k1[k] + 2.0 * ws.k2[k] + 2.0 * ws.k3[k] + ws.k4[k]);
    }
    check_stage(ws.out);
    for (std::size_t mu = 0; mu < m_; ++mu) {
        if (ws.out[2 * nm + mu] < (1.0 - kMaxDrop) * y[2 * nm + mu]) smooth = false;
    }
    return smooth;
}

void Engine::substep(SystemState& s, double h, int depth, Workspace& ws) const {
    const std::size_t nm = n_ * m_;
    auto& y = ws.y;
    {
        auto it = std::copy(s.a.flat().begin(), s.a.flat().end(), y.begin());
        it = std::copy(s.da.flat().begin(), s.da.flat().end(), it);
        it = std::copy(s.p.begin(), s.p.end(), it);
        it = std::copy(s.dp.begin(), s.dp.end(), it);
        std::copy(s.e.begin(), s.e.end(), it);
    }
    // Near a failure E'/E grows without bound; halve the step until the
    // equities and totals move smoothly again.
    if (!rk4(y, h, s.failed, ws) && depth < kMaxRefine) {
        substep(s, 0.5 * h, depth + 1, ws);
        substep(s, 0.5 * h, depth + 1, ws);
        return;
    }

    const auto& out = ws.out;
    const double t_new = s.t + h;
    for (std::size_t k = 0; k < out.size(); ++k) {
        if (std::isfinite(out[k])) continue;
        std::string name;
        if (k < 2 * nm) {
            const std::size_t idx = k % nm;
            name = std::string(k < nm ? "A" : "dA/dt") + "[" + bank_ids_[idx / m_] + "," +
                   asset_ids_[idx % m_] + "]";
        } else if (k < 2 * nm + 2 * m_) {
            const std::size_t idx = (k - 2 * nm) % m_;
            name = std::string(k < 2 * nm + m_ ? "p" : "dp/dt") + "[" + asset_ids_[idx] + "]";
        } else {
            name = "E[" + bank_ids_[k - 2 * nm - 2 * m_] + "]";
        }
        throw IntegrationError(name, t_new);
    }

    {
        auto it = out.begin();
        std::copy(it, it + static_cast<std::ptrdiff_t>(nm), s.a.flat().begin());
        it += static_cast<std::ptrdiff_t>(nm);
        std::copy(it, it + static_cast<std::ptrdiff_t>(nm), s.da.flat().begin());
        it += static_cast<std::ptrdiff_t>(nm);
        std::copy(it, it + static_cast<std::ptrdiff_t>(m_), s.p.begin());
        it += static_cast<std::ptrdiff_t>(m_);
        std::copy(it, it + static_cast<std::ptrdiff_t>(m_), s.dp.begin());
        it += static_cast<std::ptrdiff_t>(m_);
        std::copy(it, it + static_cast<std::ptrdiff_t>(n_), s.e.begin());
    }
    s.t = t_new;

    // Failure is absorbing: equity pinned to zero, no further trading.
    for (std::size_t i = 0; i < n_; ++i) {
        if (s.failed[i]) {
            s.e[i] = 0.0;
            continue;
        }
        if (s.e[i] <= fail_level_[i]) {
            s.failed[i] = 1;
            s.e[i] = 0.0;
            for (double& v : s.da.row(i)) v = 0.0;
            ws.fail_time[i] = t_new;
        }
    }
    // Non-negativity; a clamped quantity cannot keep moving downwards.
    for (std::size_t k = 0; k < nm; ++k) {
        if (s.a.flat()[k] < 0.0) {
            s.a.flat()[k] = 0.0;
            s.da.flat()[k] = std::max(s.da.flat()[k], 0.0);
        }
    }
    for (std::size_t mu = 0; mu < m_; ++mu) {
        if (s.p[mu] < 0.0) {
            s.p[mu] = 0.0;
            s.dp[mu] = std::max(s.dp[mu], 0.0);
        }
    }
}

void Engine::advance(SystemState& s, Workspace& ws) const {
    substep(s, cfg_.dt, 0, ws);
    for (std::size_t i = 0; i < n_; ++i) {
        double de = 0.0;
        if (!s.failed[i]) {
            for (std::size_t mu = 0; mu < m_; ++mu) de += s.a(i, mu) * s.dp[mu];
        }
        s.de[i] = de;
    }
}

void Engine::step(SystemState& state) const {
    Workspace ws(2 * n_ * m_ + 2 * m_ + n_, n_);
    advance(state, ws);
}

double Engine::relative_velocity(const SystemState& s) const noexcept {
    double worst = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
        if (s.failed[i]) continue;
        for (std::size_t mu = 0; mu < m_; ++mu) {
            const double scale = std::max(s.a(i, mu), holding_scale_[i * m_ + mu]);
            if (scale > 0.0) {
                worst = std::max(worst, std::abs(s.da(i, mu)) * params_.tau_b / scale);
            }
        }
    }
    for (std::size_t mu = 0; mu < m_; ++mu) {
        worst = std::max(worst, std::abs(s.dp[mu]) * params_.tau_a / std::max(s.p[mu], 1.0));
    }
    return worst;
}

Trajectory Engine::run_from(SystemState start, const StopPredicate& stop) const {
    Trajectory traj;
    Workspace ws(2 * n_ * m_ + 2 * m_ + n_, n_);
    const auto max_steps =
        static_cast<std::size_t>(std::llround(std::ceil(cfg_.t_max / cfg_.dt - 1e-9)));
    const double t0 = start.t;

    SystemState s = std::move(start);
    for (std::size_t i = 0; i < n_; ++i) {
        if (s.failed[i]) traj.failed_banks.push_back({bank_ids_[i], i, s.t});
    }
    traj.samples.push_back(s);

    int quiet = 0;
    double quiet_since = s.t;
    auto note_quiet = [&](const SystemState& st) {
        if (relative_velocity(st) < cfg_.vel_tol) {
            if (quiet == 0) quiet_since = st.t;
            ++quiet;
        } else {
            quiet = 0;
        }
    };
    note_quiet(s);

    bool decided = false;
    std::size_t k = 0;
    while (!decided) {
        if (k >= max_steps) {
            traj.verdict = Verdict::Timeout;
            traj.relaxation_time = s.t;
            break;
        }
        std::vector<std::uint8_t> before = s.failed;
        s.t = t0 + static_cast<double>(k) * cfg_.dt;
        advance(s, ws);
        ++k;
        s.t = t0 + static_cast<double>(k) * cfg_.dt;
        for (std::size_t i = 0; i < n_; ++i) {
            if (s.failed[i] && !before[i]) {
                traj.failed_banks.push_back({bank_ids_[i], i, ws.fail_time[i]});
            }
        }

        if (std::any_of(s.p.begin(), s.p.end(), [&](double v) { return v < cfg_.p_floor; })) {
            traj.verdict = Verdict::Crash;
            traj.relaxation_time = s.t;
            decided = true;
        } else if (std::any_of(s.p.begin(), s.p.end(),
                               [&](double v) { return v > cfg_.p_cap; })) {
            traj.verdict = Verdict::Bubble;
            traj.relaxation_time = s.t;
            decided = true;
        } else {
            note_quiet(s);
            if (quiet >= cfg_.hold_steps) {
                traj.verdict = Verdict::Equilibrium;
                traj.relaxation_time = quiet_since;
                decided = true;
            }
        }
        if (!decided && stop && stop(s)) {
            traj.interrupted = true;
            traj.verdict = Verdict::Timeout;
            traj.relaxation_time = s.t;
            decided = true;
        }
        if (!decided && cfg_.sample_stride > 0 && k % cfg_.sample_stride == 0) {
            traj.samples.push_back(s);
        }
    }
    traj.steps = k;
    if (traj.samples.back().t != s.t) traj.samples.push_back(std::move(s));
    return traj;
}

SystemState apply_shock(const HoldingsMatrix& net, const SystemState& state,
                        const ShockSpec& shock, const ModelParams& params) {
    shock.validate();
    params.validate();
    const auto j = net.bank_index(shock.target_bank);
    if (!j) throw ValidationError("unknown bank id '" + shock.target_bank + "'");
    if (state.failed.at(*j) || !(state.e.at(*j) > 0.0)) {
        throw ValidationError("cannot shock failed bank '" + shock.target_bank + "'");
    }
    SystemState out = state;
    if (!shock.is_genuine()) return out;
    out.e[*j] = (1.0 + shock.magnitude) * state.e[*j];
    const double jump = params.beta * std::log1p(shock.magnitude) / params.tau_b;
    for (std::size_t mu = 0; mu < out.n_assets(); ++mu) {
        out.da(*j, mu) = state.da(*j, mu) + jump * state.a(*j, mu);
    }
    return out;
}

SystemState step(const HoldingsMatrix& net, const SystemState& state, const ModelParams& params,
                 const IntegratorConfig& cfg) {
    Engine engine(net, params, cfg);
    SystemState out = state;
    engine.step(out);
    return out;
}

Trajectory run(const HoldingsMatrix& net, const ModelParams& params, const ShockSpec& shock,
               const IntegratorConfig& cfg) {
    Engine engine(net, params, cfg);
    return engine.run_from(apply_shock(net, initial_state(net), shock, params));
}

}  // namespace bankdyn
