#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <functional>

#include "bankdyn/error.hpp"
#include "bankdyn/netgen.hpp"

using namespace bankdyn;

TEST_CASE("generation is deterministic in the seed") {
    GenSpec spec;
    const auto a = generate(spec);
    const auto b = generate(spec);
    CHECK(a.weights() == b.weights());
    for (std::size_t i = 0; i < a.n_banks(); ++i) {
        CHECK(a.banks()[i].equity0 == b.banks()[i].equity0);
    }
    spec.seed = 8;
    CHECK_FALSE(generate(spec).weights() == a.weights());
}

TEST_CASE("default spec gives the GIIPS shape") {
    const auto net = generate(GenSpec{});
    CHECK(net.n_banks() == 121);
    CHECK(net.n_assets() == 5);
    CHECK(net.assets()[0].id == "GR");
    CHECK(net.assets()[4].id == "IE");
    for (std::size_t i = 0; i < net.n_banks(); ++i) {
        const double ratio = net.banks()[i].equity0 / net.holdings_value(i);
        CHECK(ratio >= 0.05);
        CHECK(ratio < 1.0);
    }
}

TEST_CASE("zero log-sigma makes all present weights equal") {
    GenSpec spec;
    spec.log_sigma = 0.0;
    spec.n_banks = 40;
    const auto net = generate(spec);
    const double expected = std::exp(spec.log_mean);
    for (double v : net.weights().flat()) {
        if (v != 0.0) CHECK(v == Catch::Approx(expected).epsilon(1e-14));
    }
}

TEST_CASE("full sparsity fills every cell; no bank is empty") {
    GenSpec spec;
    spec.sparsity = 1.0;
    spec.n_banks = 20;
    const auto net = generate(spec);
    for (double v : net.weights().flat()) CHECK(v > 0.0);

    spec.sparsity = 0.05;
    spec.n_banks = 200;
    const auto sparse = generate(spec);
    for (std::size_t i = 0; i < sparse.n_banks(); ++i) CHECK(sparse.holdings_value(i) > 0.0);
}

TEST_CASE("sample log-moments match the spec within 3 standard errors") {
    GenSpec spec;
    spec.n_banks = 4000;
    spec.n_assets = 5;
    spec.sparsity = 0.6;
    spec.log_mean = 1.3;
    spec.log_sigma = 0.8;
    spec.seed = 2024;
    const auto net = generate(spec);
    std::vector<double> logs;
    for (double v : net.weights().flat()) {
        if (v > 0.0) logs.push_back(std::log(v));
    }
    REQUIRE(logs.size() >= 10000);
    const double n = static_cast<double>(logs.size());
    double mean = 0.0;
    for (double x : logs) mean += x;
    mean /= n;
    double var = 0.0;
    for (double x : logs) var += (x - mean) * (x - mean);
    var /= n - 1.0;
    const double sd = std::sqrt(var);
    CHECK(std::abs(mean - spec.log_mean) <= 3.0 * spec.log_sigma / std::sqrt(n));
    // Standard error of the sample standard deviation: sigma / sqrt(2(n-1)).
    CHECK(std::abs(sd - spec.log_sigma) <= 3.0 * spec.log_sigma / std::sqrt(2.0 * (n - 1.0)));
}

TEST_CASE("a handful of holders own most of each asset in most seeds") {
    int majority = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        GenSpec spec;
        spec.seed = seed;
        const auto net = generate(spec);
        std::vector<double> shares;
        for (std::size_t mu = 0; mu < net.n_assets(); ++mu) {
            std::vector<double> col;
            for (std::size_t i = 0; i < net.n_banks(); ++i) col.push_back(net.weights()(i, mu));
            std::partial_sort(col.begin(), col.begin() + 4, col.end(), std::greater<>());
            shares.push_back((col[0] + col[1] + col[2] + col[3]) / net.assets()[mu].total0);
        }
        std::nth_element(shares.begin(), shares.begin() + 2, shares.end());
        if (shares[2] >= 0.5) ++majority;
    }
    CHECK(majority > 50);
}

TEST_CASE("invalid specs are rejected") {
    GenSpec spec;
    spec.n_banks = 0;
    CHECK_THROWS_AS(generate(spec), ValidationError);
    spec = {};
    spec.sparsity = 0.0;
    CHECK_THROWS_AS(generate(spec), ValidationError);
    spec = {};
    spec.sparsity = 1.5;
    CHECK_THROWS_AS(generate(spec), ValidationError);
    spec = {};
    spec.equity_multiple_min = 0.0;
    CHECK_THROWS_AS(generate(spec), ValidationError);
    spec = {};
    spec.equity_multiple_min = 2.0;
    spec.equity_multiple_max = 1.0;
    CHECK_THROWS_AS(generate(spec), ValidationError);
    spec = {};
    spec.log_sigma = -1.0;
    CHECK_THROWS_AS(generate(spec), ValidationError);
}
