#include <catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "bankdyn/calibration.hpp"
#include "bankdyn/error.hpp"
#include "oracles.hpp"

using namespace bankdyn;
using Catch::Matchers::WithinAbs;

namespace {

PricePanel to_panel(const oracle::PlantedPanel& pp) {
    const std::size_t t_count = pp.dates.size();
    const std::size_t m = pp.bond.size();
    Matrix bond(t_count, m, 0.0), equity(t_count, m, 0.0);
    std::vector<std::string> ids;
    for (std::size_t mu = 0; mu < m; ++mu) {
        ids.push_back("S" + std::to_string(mu));
        for (std::size_t t = 0; t < t_count; ++t) {
            bond(t, mu) = pp.bond[mu][t];
            equity(t, mu) = pp.equity[mu][t];
        }
    }
    return PricePanel(pp.dates, ids, bond, equity);
}

PricePanel scaled(const PricePanel& p, double bond_factor, double equity_factor) {
    Matrix b = p.bond(), e = p.equity();
    for (double& v : b.flat()) v *= bond_factor;
    for (double& v : e.flat()) v *= equity_factor;
    return PricePanel(p.dates(), p.asset_ids(), b, e);
}

}  // namespace

TEST_CASE("symmetric return") {
    CHECK(symmetric_return(1.0, 1.0) == 0.0);
    CHECK(symmetric_return(1.0, 3.0) == 1.0);
    CHECK(symmetric_return(3.0, 1.0) == -1.0);
    CHECK(std::abs(symmetric_return(1e-3, 1e3)) < 2.0);
    CHECK_THROWS_AS(symmetric_return(0.0, 1.0), ValidationError);
    CHECK_THROWS_AS(symmetric_return(1.0, -2.0), ValidationError);
}

TEST_CASE("a planted constant gamma is recovered exactly") {
    for (double gamma : {2.0, 0.5, -1.3}) {
        const auto panel = to_panel(oracle::planted_panel(300, 5, 84, gamma, 17));
        const auto est = estimate_gamma(panel);
        REQUIRE(est.size() == 300 - 84 + 1);
        for (const auto& g : est) {
            REQUIRE_FALSE(g.all_dropped);
            for (double v : g.per_asset) CHECK_THAT(v, WithinAbs(gamma, 1e-12));
            CHECK_THAT(g.mean, WithinAbs(gamma, 1e-12));
            CHECK(g.std <= 1e-12);
        }
    }
}

TEST_CASE("window endpoints and stride") {
    const auto panel = to_panel(oracle::planted_panel(20, 2, 5, 1.0, 3));
    CalibrationOptions opt;
    opt.window_days = 5;
    opt.stride = 4;
    const auto est = estimate_gamma(panel, opt);
    REQUIRE(est.size() == 4);
    CHECK(est[0].window_start == panel.dates()[0]);
    CHECK(est[0].window_end == panel.dates()[4]);
    CHECK(est[3].window_start == panel.dates()[12]);
    CHECK(est[3].window_end == panel.dates()[16]);
}

TEST_CASE("flat bond prices give gamma zero") {
    auto pp = oracle::planted_panel(100, 3, 10, 1.0, 5);
    for (auto& series : pp.bond) std::fill(series.begin(), series.end(), 0.97);
    CalibrationOptions opt;
    opt.window_days = 10;
    for (const auto& g : estimate_gamma(to_panel(pp), opt)) {
        for (double v : g.per_asset) CHECK(v == 0.0);
    }
}

TEST_CASE("gamma is invariant to rescaling either series") {
    const auto panel = to_panel(oracle::planted_panel(150, 4, 30, 1.0, 9));
    // Perturb so the estimates are not all identical.
    Matrix b = panel.bond();
    for (std::size_t t = 0; t < b.rows(); ++t) b(t, 1) *= 1.0 + 0.01 * std::sin(0.3 * t);
    const PricePanel base(panel.dates(), panel.asset_ids(), b, panel.equity());
    CalibrationOptions opt;
    opt.window_days = 30;
    const auto ref = estimate_gamma(base, opt);
    const auto other = estimate_gamma(scaled(base, 7.5, 0.02), opt);
    REQUIRE(ref.size() == other.size());
    for (std::size_t k = 0; k < ref.size(); ++k) {
        REQUIRE(ref[k].per_asset.size() == other[k].per_asset.size());
        for (std::size_t q = 0; q < ref[k].per_asset.size(); ++q) {
            CHECK_THAT(other[k].per_asset[q], WithinAbs(ref[k].per_asset[q], 1e-10));
        }
    }
}

TEST_CASE("reversing a window negates both returns and keeps gamma") {
    const auto pp = oracle::planted_panel(60, 3, 20, 1.7, 21);
    const auto panel = to_panel(pp);
    for (std::size_t mu = 0; mu < 3; ++mu) {
        const double fwd = symmetric_return(pp.bond[mu][10], pp.bond[mu][29]) /
                           symmetric_return(pp.equity[mu][10], pp.equity[mu][29]);
        const double bwd = symmetric_return(pp.bond[mu][29], pp.bond[mu][10]) /
                           symmetric_return(pp.equity[mu][29], pp.equity[mu][10]);
        CHECK(symmetric_return(pp.bond[mu][29], pp.bond[mu][10]) ==
              -symmetric_return(pp.bond[mu][10], pp.bond[mu][29]));
        CHECK(fwd == bwd);
    }
}

TEST_CASE("assets with flat equities are dropped; all dropped is flagged") {
    auto pp = oracle::planted_panel(40, 2, 10, 2.0, 8);
    std::fill(pp.equity[0].begin(), pp.equity[0].end(), 12.0);
    CalibrationOptions opt;
    opt.window_days = 10;
    for (const auto& g : estimate_gamma(to_panel(pp), opt)) {
        CHECK(g.asset_ids == std::vector<std::string>{"S1"});
    }
    std::fill(pp.equity[1].begin(), pp.equity[1].end(), 3.0);
    const auto est = estimate_gamma(to_panel(pp), opt);
    for (const auto& g : est) {
        CHECK(g.all_dropped);
        CHECK(g.per_asset.empty());
        CHECK(classify_regime(g) == Regime::Indeterminate);
    }
    std::ostringstream out;
    write_gamma_csv(out, {est.front()});
    CHECK(out.str() == "window_start,window_end,asset_id,gamma,gamma_std\n" +
                           est.front().window_start + "," + est.front().window_end + ",MEAN,,\n");
}

TEST_CASE("dispersion is the population standard deviation") {
    Matrix bond(2, 2, 1.0), equity(2, 2, 1.0);
    // Asset 0: gamma 1; asset 1: gamma 3 (same equity move).
    equity(1, 0) = equity(1, 1) = 1.1;
    const double r = symmetric_return(1.0, 1.1);
    auto solve = [&](double gamma) {
        const double q = gamma * r;
        return (2.0 + q) / (2.0 - q);
    };
    bond(1, 0) = solve(1.0);
    bond(1, 1) = solve(3.0);
    const PricePanel panel({"2020-01-01", "2020-01-02"}, {"A", "B"}, bond, equity);
    CalibrationOptions opt;
    opt.window_days = 2;
    const auto est = estimate_gamma(panel, opt);
    REQUIRE(est.size() == 1);
    CHECK_THAT(est[0].mean, WithinAbs(2.0, 1e-12));
    CHECK_THAT(est[0].std, WithinAbs(1.0, 1e-12));
}

TEST_CASE("regime classification") {
    GammaEstimate g;
    g.per_asset = {0.0};
    g.mean = 0.5;
    g.std = 0.2;
    CHECK(classify_regime(g) == Regime::Stable);
    g.mean = 2.0;
    g.std = 0.3;
    CHECK(classify_regime(g) == Regime::Unstable);
    g.mean = 1.0;
    g.std = 0.5;
    CHECK(classify_regime(g) == Regime::Indeterminate);
}

TEST_CASE("smoothing is a trailing moving average") {
    Matrix bond(4, 1, 0.0), equity(4, 1, 1.0);
    bond(0, 0) = 1.0;
    bond(1, 0) = 3.0;
    bond(2, 0) = 5.0;
    bond(3, 0) = 7.0;
    const PricePanel p({"2020-01-01", "2020-01-02", "2020-01-03", "2020-01-04"}, {"A"}, bond,
                       equity);
    const auto s = p.smoothed(2);
    CHECK(s.bond()(0, 0) == 1.0);
    CHECK(s.bond()(1, 0) == 2.0);
    CHECK(s.bond()(2, 0) == 4.0);
    CHECK(s.bond()(3, 0) == 6.0);
}

TEST_CASE("panel CSV round trip and validation") {
    const auto panel = to_panel(oracle::planted_panel(12, 2, 5, 2.0, 4));
    std::ostringstream out;
    write_panel(out, panel);
    std::istringstream in(out.str());
    const auto back = parse_panel(in);
    CHECK(back.dates() == panel.dates());
    CHECK(back.asset_ids() == panel.asset_ids());
    CHECK(back.bond() == panel.bond());
    CHECK(back.equity() == panel.equity());

    auto parse = [](const std::string& text) {
        std::istringstream s(text);
        return parse_panel(s);
    };
    const std::string head = "date,series_id,series_type,value\n";
    CHECK_THROWS_AS(parse(head), ValidationError);
    CHECK_THROWS_AS(parse(head + "2020-01-01,GR,bond,1\n"), ValidationError);
    CHECK_THROWS_AS(parse(head + "2020-01-01,GR,stock,1\n"), ParseError);
    CHECK_THROWS_AS(parse(head + "01/02/2020,GR,bond,1\n"), ParseError);
    CHECK_THROWS_AS(parse(head + "2020-01-01,GR,bond,1\n2020-01-01,GR,equity,2\n"
                                 "2020-01-01,GR,bond,1\n"),
                    ValidationError);
    CHECK_THROWS_AS(parse(head + "2020-01-01,GR,bond,-1\n2020-01-01,GR,equity,2\n"),
                    ValidationError);
    // Row order does not matter; dates are sorted.
    const auto ok = parse(head + "2020-01-02,GR,bond,1\n2020-01-02,GR,equity,2\n"
                                 "2020-01-01,GR,equity,2\n2020-01-01,GR,bond,1.5\n");
    CHECK(ok.dates() == std::vector<std::string>{"2020-01-01", "2020-01-02"});
    CHECK(ok.bond()(0, 0) == 1.5);
}

TEST_CASE("estimate_gamma preconditions") {
    const auto panel = to_panel(oracle::planted_panel(10, 1, 5, 2.0, 4));
    CalibrationOptions opt;
    CHECK_THROWS_AS(estimate_gamma(panel, opt), ValidationError);  // 84 > 10 dates
    opt.window_days = 1;
    CHECK_THROWS_AS(estimate_gamma(panel, opt), ValidationError);
    opt.window_days = 10;
    CHECK(estimate_gamma(panel, opt).size() == 1);
    CHECK_THROWS_AS(PricePanel({"2020-01-02", "2020-01-01"}, {"A"}, Matrix(2, 1, 1.0),
                               Matrix(2, 1, 1.0)),
                    ValidationError);
}
