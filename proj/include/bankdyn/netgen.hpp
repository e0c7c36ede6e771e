#pragma once

#include <cstddef>
#include <cstdint>

#include "bankdyn/model.hpp"

namespace bankdyn {

/// Shape of a synthetic bank/asset network. Defaults give a 121 x 5 network
/// whose per-asset holdings are heavy-tailed, so that a handful of holders own
/// most of each asset.
struct GenSpec {
    std::size_t n_banks = 121;
    std::size_t n_assets = 5;
    double log_mean = 5.7;   // ln of a typical holding (~300, in millions)
    double log_sigma = 2.0;
    double sparsity = 0.5;   // probability that a bank holds a given asset
    double equity_multiple_min = 0.05;  // E_i(0) / sum_mu A_imu(0)
    double equity_multiple_max = 1.0;
    std::uint64_t seed = 7;

    /// Throws ValidationError on counts < 1, sparsity outside (0, 1], or bad multiples.
    void validate() const;
};

/// Draws log-normal weights where a Bernoulli(sparsity) mask is set, redrawing
/// empty rows, and equities as U[min, max) multiples of each bank's holdings.
/// Assets nobody holds are dropped; the result is deterministic in `seed`.
[[nodiscard]] HoldingsMatrix generate(const GenSpec& spec);

}  // namespace bankdyn
