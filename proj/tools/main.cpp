// bankdyn: command-line front end for the bank/asset network dynamics.
//
// Every subcommand writes its result files plus manifest.json into --out.
// Exit codes: 0 ok, 2 bad flags, 3 input/output or validation error,
// 4 integration error, 1 anything else (including a failed replay check).

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bankdyn/analysis.hpp"
#include "bankdyn/analysis_io.hpp"
#include "bankdyn/calibration.hpp"
#include "bankdyn/engine.hpp"
#include "bankdyn/error.hpp"
#include "bankdyn/netgen.hpp"
#include "bankdyn/network_io.hpp"
#include "bankdyn/trajectory_io.hpp"
#include "cli_support.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace bankdyn::cli {
namespace {

struct Globals {
    std::string out = "out";
    std::uint64_t seed = 7;
    std::size_t jobs = 1;
    double dt = 0.0;
    double t_max = 0.0;
    bool quiet = false;
};

struct NetFlags {
    std::string dir;
    std::string holdings;
    std::string banks;
};

struct ModelFlags {
    double alpha = 0.6;
    double beta = 0.6;
    double tau_a = 1.0;
    double tau_b = 1.0;
    double shock = -0.1;
    std::string shock_bank;  // empty: largest holder
};

struct EngineFlags {
    double vel_tol = 1e-8;
    int hold_steps = 50;
    double p_floor = 1e-6;
    double p_cap = 1e3;
    double eps_e = 1e-9;
    std::size_t sample_stride = 10;
};

void add_net_flags(CLI::App* sub, NetFlags& f) {
    sub->add_option("--net", f.dir, "Directory holding holdings.csv and banks.csv");
    sub->add_option("--holdings", f.holdings, "Holdings CSV (bank_id,asset_id,amount)");
    sub->add_option("--banks", f.banks, "Banks CSV (bank_id,equity,cash_minus_liability)");
}

void add_model_flags(CLI::App* sub, ModelFlags& f, bool with_alpha_beta) {
    if (with_alpha_beta) {
        sub->add_option("--alpha", f.alpha, "Inverse market depth")->capture_default_str();
        sub->add_option("--beta", f.beta, "Panic factor")->capture_default_str();
    }
    sub->add_option("--tau-a", f.tau_a, "Market response time")->capture_default_str();
    sub->add_option("--tau-b", f.tau_b, "Bank response time")->capture_default_str();
    sub->add_option("--shock", f.shock, "Relative equity shock s > -1")->capture_default_str();
    sub->add_option("--shock-bank", f.shock_bank, "Shocked bank id (default: largest holder)");
}

void add_engine_flags(CLI::App* sub, EngineFlags& f) {
    sub->add_option("--vel-tol", f.vel_tol, "Equilibrium velocity tolerance")
        ->capture_default_str();
    sub->add_option("--hold-steps", f.hold_steps, "Quiet steps before Equilibrium")
        ->capture_default_str();
    sub->add_option("--p-floor", f.p_floor, "Crash price threshold")->capture_default_str();
    sub->add_option("--p-cap", f.p_cap, "Bubble price threshold")->capture_default_str();
    sub->add_option("--eps-e", f.eps_e, "Failure level as a fraction of E(0)")
        ->capture_default_str();
}

std::size_t resolve_jobs(std::size_t jobs) {
    if (jobs > 0) return jobs;
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Network from files, or the default synthetic network for --seed.
HoldingsMatrix load_net(const NetFlags& f, const Globals& g, Manifest& manifest) {
    std::string holdings = f.holdings;
    std::string banks = f.banks;
    if (!f.dir.empty()) {
        if (!holdings.empty() || !banks.empty()) {
            throw UsageError("--net cannot be combined with --holdings/--banks");
        }
        holdings = (fs::path(f.dir) / "holdings.csv").string();
        banks = (fs::path(f.dir) / "banks.csv").string();
    }
    if (holdings.empty() != banks.empty()) {
        throw UsageError("--holdings and --banks must be given together");
    }
    if (holdings.empty()) {
        GenSpec spec;
        spec.seed = g.seed;
        manifest.set("network", {{"generated", {{"n_banks", spec.n_banks},
                                                {"n_assets", spec.n_assets},
                                                {"log_mean", spec.log_mean},
                                                {"log_sigma", spec.log_sigma},
                                                {"sparsity", spec.sparsity},
                                                {"equity_multiple_min", spec.equity_multiple_min},
                                                {"equity_multiple_max", spec.equity_multiple_max},
                                                {"seed", spec.seed}}}});
        return generate(spec);
    }
    auto loaded = load_network(holdings, banks);
    manifest.add_input(holdings);
    manifest.add_input(banks);
    if (!g.quiet) {
        for (const auto& w : loaded.warnings) std::cerr << "warning: " << w << '\n';
    }
    manifest.set("network", {{"holdings", holdings},
                             {"banks", banks},
                             {"dropped_banks", loaded.dropped_banks},
                             {"dropped_assets", loaded.dropped_assets}});
    return std::move(loaded.network);
}

ModelParams make_params(const ModelFlags& f) {
    ModelParams p{f.alpha, f.beta, f.tau_a, f.tau_b};
    try {
        p.validate();
    } catch (const ValidationError& e) {
        throw UsageError(e.what());
    }
    return p;
}

IntegratorConfig make_config(const Globals& g, const EngineFlags& f, const ModelParams& params) {
    IntegratorConfig c;
    c.dt = g.dt;
    c.t_max = g.t_max;
    c.vel_tol = f.vel_tol;
    c.hold_steps = f.hold_steps;
    c.p_floor = f.p_floor;
    c.p_cap = f.p_cap;
    c.eps_e = f.eps_e;
    c.sample_stride = f.sample_stride;
    try {
        return c.resolved(params);
    } catch (const ValidationError& e) {
        throw UsageError(e.what());
    }
}

ShockSpec make_shock(const ModelFlags& f, const HoldingsMatrix& net) {
    ShockSpec s;
    s.magnitude = f.shock;
    s.target_bank = f.shock_bank.empty() ? net.banks()[net.largest_holder()].id : f.shock_bank;
    if (!net.bank_index(s.target_bank)) {
        throw UsageError("--shock-bank '" + s.target_bank + "' is not in the network");
    }
    try {
        s.validate();
    } catch (const ValidationError& e) {
        throw UsageError(e.what());
    }
    return s;
}

ordered_json shock_json(const ShockSpec& s) {
    return {{"target_bank", s.target_bank}, {"magnitude", s.magnitude}};
}

fs::path prepare_out(const Globals& g) {
    const fs::path dir(g.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw Error("cannot create output directory '" + g.out + "'");
    }
    return dir;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    return out;
}

template <typename WriteFn>
void emit(const fs::path& path, Manifest& manifest, WriteFn&& write) {
    {
        auto out = open_out(path);
        write(out);
        out.flush();
        if (!out) throw Error("error while writing '" + path.string() + "'");
    }
    manifest.add_output(path);
}

// ---------------------------------------------------------------------------

int cmd_simulate(const Globals& g, const NetFlags& nf, const ModelFlags& mf,
                 const EngineFlags& ef, Manifest& manifest) {
    const auto params = make_params(mf);
    const auto cfg = make_config(g, ef, params);
    const auto net = load_net(nf, g, manifest);
    const auto shock = make_shock(mf, net);
    manifest.set("params", params_json(params));
    manifest.set("shock", shock_json(shock));
    manifest.set("config", config_json(cfg));
    manifest.set("seed", g.seed);

    const auto traj = run(net, params, shock, cfg);
    const auto dir = prepare_out(g);
    emit(dir / "prices.csv", manifest, [&](std::ostream& o) { write_prices_csv(o, net, traj); });
    emit(dir / "equities.csv", manifest,
         [&](std::ostream& o) { write_equities_csv(o, net, traj); });
    emit(dir / "verdict.json", manifest,
         [&](std::ostream& o) { o << verdict_json(net, traj).dump(2) << '\n'; });
    manifest.write(dir);
    if (!g.quiet) {
        std::cout << to_string(traj.verdict) << " at t=" << traj.relaxation_time << ", "
                  << traj.failed_banks.size() << " failed bank(s)\n";
    }
    return 0;
}

int cmd_sweep(const Globals& g, const NetFlags& nf, const ModelFlags& mf, const EngineFlags& ef,
              Manifest& manifest) {
    const auto params = make_params(mf);
    const auto cfg = make_config(g, ef, params);
    const auto net = load_net(nf, g, manifest);
    if (!(mf.shock > -1.0)) throw UsageError("--shock must be > -1");
    manifest.set("params", params_json(params));
    manifest.set("shock_magnitude", mf.shock);
    manifest.set("config", config_json(cfg));
    manifest.set("seed", g.seed);

    const auto outcomes = shock_each_bank(net, params, mf.shock, cfg, resolve_jobs(g.jobs));
    const auto dir = prepare_out(g);
    emit(dir / "sweep.csv", manifest,
         [&](std::ostream& o) { write_shock_sweep_csv(o, net, outcomes); });
    manifest.write(dir);
    if (!g.quiet) std::cout << outcomes.size() << " shocked runs\n";
    return 0;
}

int cmd_bankrank(const Globals& g, const NetFlags& nf, const ModelFlags& mf,
                 const EngineFlags& ef, bool no_fortify, double rel_tol, Manifest& manifest) {
    const auto params = make_params(mf);
    const auto cfg = make_config(g, ef, params);
    const auto net = load_net(nf, g, manifest);
    const auto probe = make_shock(mf, net);
    if (!(rel_tol > 0.0 && rel_tol < 0.1)) throw UsageError("--rel-tol must be in (0, 0.1)");
    BankRankOptions options;
    options.fortify = !no_fortify;
    options.search.rel_tol = rel_tol;
    options.jobs = resolve_jobs(g.jobs);
    manifest.set("params", params_json(params));
    manifest.set("probe", shock_json(probe));
    manifest.set("config", config_json(cfg));
    manifest.set("search", {{"lower", options.search.lower},
                            {"upper", options.search.upper},
                            {"rel_tol", options.search.rel_tol},
                            {"max_iter", options.search.max_iter},
                            {"fortify", options.fortify}});
    manifest.set("seed", g.seed);

    const auto result = bank_rank(net, params, probe, cfg, options);
    manifest.set("fortified", result.fortified);
    manifest.set("baseline_rank", result.baseline_rank);
    const auto dir = prepare_out(g);
    emit(dir / "bankrank.csv", manifest,
         [&](std::ostream& o) { write_bankrank_csv(o, result); });
    manifest.write(dir);
    if (!g.quiet) {
        std::cout << result.reports.size() << " banks ranked, " << result.fortified.size()
                  << " fortified";
        if (!result.reports.empty()) {
            std::cout << "; most systemic: " << result.reports.front().bank_id;
        }
        std::cout << '\n';
        for (const auto& r : result.reports) {
            if (r.out_of_bounds) std::cerr << "warning: R > 1 for bank " << r.bank_id << '\n';
        }
    }
    return 0;
}

int cmd_phase(const Globals& g, const NetFlags& nf, const ModelFlags& mf, const EngineFlags& ef,
              const std::string& alpha_range, const std::string& beta_range,
              Manifest& manifest) {
    const auto alphas = parse_range(alpha_range);
    const auto betas = parse_range(beta_range);
    const auto base = make_params(mf);
    const auto cfg = make_config(g, ef, base);
    const auto net = load_net(nf, g, manifest);
    const auto shock = make_shock(mf, net);
    manifest.set("alphas", alphas);
    manifest.set("betas", betas);
    manifest.set("params", {{"tau_a", base.tau_a}, {"tau_b", base.tau_b}});
    manifest.set("shock", shock_json(shock));
    manifest.set("config", config_json(cfg));
    manifest.set("seed", g.seed);

    const auto grid = phase_diagram(net, alphas, betas, shock, cfg, base, resolve_jobs(g.jobs));
    const auto dir = prepare_out(g);
    emit(dir / "phase.csv", manifest, [&](std::ostream& o) { write_phase_csv(o, grid); });
    manifest.write(dir);
    if (!g.quiet) std::cout << alphas.size() * betas.size() << " grid cells\n";
    return 0;
}

int cmd_rewire(const Globals& g, const NetFlags& nf, const ModelFlags& mf, const EngineFlags& ef,
               std::size_t trials, const std::string& mode_name, Manifest& manifest) {
    RewireMode mode = RewireMode::PerColumn;
    if (mode_name == "global-row") mode = RewireMode::GlobalRow;
    else if (mode_name != "per-column") throw UsageError("--mode must be per-column or global-row");
    if (trials < 1) throw UsageError("--trials must be >= 1");
    const auto params = make_params(mf);
    const auto cfg = make_config(g, ef, params);
    const auto net = load_net(nf, g, manifest);
    const auto shock = make_shock(mf, net);
    manifest.set("params", params_json(params));
    manifest.set("shock", shock_json(shock));
    manifest.set("config", config_json(cfg));
    manifest.set("trials", trials);
    manifest.set("mode", mode_name);
    manifest.set("seed", g.seed);

    const auto out =
        rewire_experiment(net, params, shock, cfg, g.seed, trials, mode, resolve_jobs(g.jobs));
    const auto dir = prepare_out(g);
    emit(dir / "rewire.csv", manifest, [&](std::ostream& o) { write_rewire_csv(o, net, out); });
    manifest.write(dir);
    if (!g.quiet) std::cout << trials << " rewiring trials\n";
    return 0;
}

int cmd_calibrate(const Globals& g, const std::string& panel_path,
                  const CalibrationOptions& options, Manifest& manifest) {
    if (options.window_days < 2) throw UsageError("--window must be >= 2");
    if (options.stride < 1) throw UsageError("--stride must be >= 1");
    if (!(options.denominator_floor >= 0.0)) throw UsageError("--floor must be >= 0");
    const auto panel = load_panel(panel_path);
    manifest.add_input(panel_path);
    manifest.set("calibration", {{"window_days", options.window_days},
                                 {"stride", options.stride},
                                 {"denominator_floor", options.denominator_floor},
                                 {"smoothing_days", options.smoothing_days}});
    manifest.set("seed", g.seed);

    const auto estimates = estimate_gamma(panel, options);
    const auto dir = prepare_out(g);
    emit(dir / "gamma.csv", manifest,
         [&](std::ostream& o) { write_gamma_csv(o, estimates); });
    manifest.write(dir);
    if (!g.quiet && !estimates.empty()) {
        const auto& last = estimates.back();
        std::cout << estimates.size() << " windows; last " << last.window_start << ".."
                  << last.window_end << ": " << to_string(classify_regime(last)) << '\n';
    }
    return 0;
}

int cmd_generate(const Globals& g, GenSpec spec, Manifest& manifest) {
    spec.seed = g.seed;
    try {
        spec.validate();
    } catch (const ValidationError& e) {
        throw UsageError(e.what());
    }
    manifest.set("spec", {{"n_banks", spec.n_banks},
                          {"n_assets", spec.n_assets},
                          {"log_mean", spec.log_mean},
                          {"log_sigma", spec.log_sigma},
                          {"sparsity", spec.sparsity},
                          {"equity_multiple_min", spec.equity_multiple_min},
                          {"equity_multiple_max", spec.equity_multiple_max}});
    manifest.set("seed", g.seed);

    const auto net = generate(spec);
    const auto dir = prepare_out(g);
    save_network(net, dir / "holdings.csv", dir / "banks.csv");
    manifest.add_output(dir / "holdings.csv");
    manifest.add_output(dir / "banks.csv");
    manifest.write(dir);
    if (!g.quiet) {
        std::cout << net.n_banks() << " banks x " << net.n_assets() << " assets\n";
    }
    return 0;
}

int run_cli(std::vector<std::string> args);

int cmd_replay(const std::string& manifest_path, const Globals& g, bool out_given) {
    std::ifstream in(manifest_path);
    if (!in) throw Error("cannot open '" + manifest_path + "'");
    nlohmann::json m;
    try {
        in >> m;
    } catch (const nlohmann::json::exception& e) {
        throw Error(manifest_path + ": " + e.what());
    }
    if (!m.contains("argv") || !m["argv"].is_array()) {
        throw Error(manifest_path + ": no argv recorded");
    }
    std::vector<std::string> args = m["argv"].get<std::vector<std::string>>();
    if (!args.empty() && args.front() == "replay") throw Error("cannot replay a replay");
    // The original --out is superseded by the replay target.
    const std::string out = out_given ? g.out : g.out + "/replay";
    args.push_back("--out");
    args.push_back(out);
    const int code = run_cli(args);
    if (code != 0) return code;

    int mismatches = 0;
    for (const auto& o : m.value("outputs", nlohmann::json::array())) {
        const auto file = o.at("file").get<std::string>();
        const auto expected = o.at("sha256").get<std::string>();
        const auto actual = sha256_file(fs::path(out) / file);
        if (actual != expected) {
            ++mismatches;
            std::cerr << "mismatch: " << file << '\n';
        }
    }
    if (!g.quiet) {
        std::cout << (mismatches == 0 ? "replay reproduced all outputs\n"
                                      : "replay differs from the recorded outputs\n");
    }
    return mismatches == 0 ? 0 : 1;
}

int run_cli(std::vector<std::string> args) {
    CLI::App app{"Bank/asset network dynamics: simulation, BankRank, phase diagrams, "
                 "calibration"};
    app.require_subcommand(1);
    app.fallthrough();
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.set_version_flag("--version", std::string(kToolVersion));

    Globals g;
    app.add_option("--out", g.out, "Output directory")->capture_default_str();
    app.add_option("--seed", g.seed, "Root seed for all randomness")->capture_default_str();
    app.add_option("--jobs", g.jobs, "Worker threads (0: all cores)")->capture_default_str();
    app.add_option("--dt", g.dt, "Time step (0: min(tau)/50)")->capture_default_str();
    app.add_option("--tmax", g.t_max, "Horizon (0: 200 max(tau))")->capture_default_str();
    app.add_flag("--quiet", g.quiet, "No progress output");

    NetFlags nf;
    ModelFlags mf;
    EngineFlags ef;

    auto* simulate = app.add_subcommand("simulate", "Shock one bank and integrate to a verdict");
    add_net_flags(simulate, nf);
    add_model_flags(simulate, mf, true);
    add_engine_flags(simulate, ef);
    simulate->add_option("--sample-stride", ef.sample_stride, "Keep every k-th step (0: ends)")
        ->capture_default_str();

    auto* sweep = app.add_subcommand("sweep", "Shock each bank in turn");
    add_net_flags(sweep, nf);
    add_model_flags(sweep, mf, true);
    add_engine_flags(sweep, ef);

    bool no_fortify = false;
    double rel_tol = 1e-3;
    auto* bankrank = app.add_subcommand("bankrank", "Rank banks by systemic importance");
    add_net_flags(bankrank, nf);
    add_model_flags(bankrank, mf, true);
    add_engine_flags(bankrank, ef);
    bankrank->add_flag("--no-fortify", no_fortify, "Skip raising equity of baseline failures");
    bankrank->add_option("--rel-tol", rel_tol, "Bisection tolerance on the equity multiplier")
        ->capture_default_str();

    std::string alpha_range = "0.1:3:0.1";
    std::string beta_range = "0.1:3:0.1";
    auto* phase = app.add_subcommand("phase", "Sweep an (alpha, beta) grid");
    add_net_flags(phase, nf);
    add_model_flags(phase, mf, false);
    add_engine_flags(phase, ef);
    phase->add_option("--alpha", alpha_range, "start:stop:step, a,b,c, or one value")
        ->capture_default_str();
    phase->add_option("--beta", beta_range, "start:stop:step, a,b,c, or one value")
        ->capture_default_str();

    std::size_t trials = 20;
    std::string mode = "per-column";
    auto* rewire_cmd = app.add_subcommand("rewire", "Rerun a shock on permuted networks");
    add_net_flags(rewire_cmd, nf);
    add_model_flags(rewire_cmd, mf, true);
    add_engine_flags(rewire_cmd, ef);
    rewire_cmd->add_option("--trials", trials, "Number of rewired networks")
        ->capture_default_str();
    rewire_cmd->add_option("--mode", mode, "per-column or global-row")->capture_default_str();

    std::string panel;
    CalibrationOptions copt;
    auto* calibrate = app.add_subcommand("calibrate", "Estimate gamma from price series");
    calibrate->add_option("--panel", panel, "Panel CSV (date,series_id,series_type,value)")
        ->required();
    calibrate->add_option("--window", copt.window_days, "Window length in observations")
        ->capture_default_str();
    calibrate->add_option("--stride", copt.stride, "Offset between windows")
        ->capture_default_str();
    calibrate->add_option("--floor", copt.denominator_floor,
                          "Drop assets whose equity return is below this in magnitude")
        ->capture_default_str();
    calibrate->add_option("--smooth", copt.smoothing_days, "Trailing moving average (0: off)")
        ->capture_default_str();

    GenSpec spec;
    auto* gen = app.add_subcommand("generate", "Write a synthetic network");
    gen->add_option("--n-banks", spec.n_banks)->capture_default_str();
    gen->add_option("--n-assets", spec.n_assets)->capture_default_str();
    gen->add_option("--log-mean", spec.log_mean)->capture_default_str();
    gen->add_option("--log-sigma", spec.log_sigma)->capture_default_str();
    gen->add_option("--sparsity", spec.sparsity)->capture_default_str();
    gen->add_option("--equity-min", spec.equity_multiple_min)->capture_default_str();
    gen->add_option("--equity-max", spec.equity_multiple_max)->capture_default_str();

    std::string manifest_path;
    auto* replay = app.add_subcommand("replay", "Re-run a manifest and compare outputs");
    replay->add_option("manifest", manifest_path, "manifest.json to replay")->required();

    const std::vector<std::string> original = args;
    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (*replay) return cmd_replay(manifest_path, g, app.get_option("--out")->count() > 0);

    CLI::App* chosen = app.get_subcommands().front();
    Manifest manifest(chosen->get_name(), original);
    if (chosen == simulate) return cmd_simulate(g, nf, mf, ef, manifest);
    if (chosen == sweep) {
        ef.sample_stride = 0;
        return cmd_sweep(g, nf, mf, ef, manifest);
    }
    ef.sample_stride = 0;
    if (chosen == bankrank) return cmd_bankrank(g, nf, mf, ef, no_fortify, rel_tol, manifest);
    if (chosen == phase) return cmd_phase(g, nf, mf, ef, alpha_range, beta_range, manifest);
    if (chosen == rewire_cmd) return cmd_rewire(g, nf, mf, ef, trials, mode, manifest);
    if (chosen == calibrate) return cmd_calibrate(g, panel, copt, manifest);
    return cmd_generate(g, spec, manifest);
}

}  // namespace
}  // namespace bankdyn::cli

int main(int argc, char** argv) {
    using namespace bankdyn;
    try {
        return cli::run_cli(std::vector<std::string>(argv + 1, argv + argc));
    } catch (const cli::UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const IntegrationError& e) {
        std::cerr << "integration error: " << e.what() << '\n';
        return 4;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 1;
    }
}
