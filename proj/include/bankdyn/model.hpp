#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bankdyn/matrix.hpp"

namespace bankdyn {

/// A bank (or fund, insurer) holding sovereign debt.
/// equity0 = sum_mu A_imu(0) * p_mu(0) + cash_minus_liability.
struct BankRecord {
    std::string id;
    double cash_minus_liability = 0.0;  // c_i = C_i - L_i
    double equity0 = 0.0;               // E_i(0)
};

struct AssetRecord {
    std::string id;
    double price0 = 1.0;  // price ratio, normalized to 1 at t = 0
    double total0 = 0.0;  // A_mu(0) = sum_i A_imu(0)
};

/// Relative tolerance for the equity identity at load time.
inline constexpr double kEquityIdentityTol = 1e-9;

/// Weighted bipartite bank/asset adjacency. Immutable once constructed; all
/// invariants are checked by the constructor.
class HoldingsMatrix {
public:
    struct Options {
        /// Admit banks with an all-zero holdings row. Loading prunes such banks;
        /// experiments (rewiring, decoupled-bank checks) may need to keep them.
        bool allow_idle_banks = false;
    };

    HoldingsMatrix(std::vector<BankRecord> banks, std::vector<std::string> asset_ids,
                   Matrix weights, Options options);
    HoldingsMatrix(std::vector<BankRecord> banks, std::vector<std::string> asset_ids,
                   Matrix weights)
        : HoldingsMatrix(std::move(banks), std::move(asset_ids), std::move(weights), Options{}) {}

    [[nodiscard]] std::size_t n_banks() const noexcept { return banks_.size(); }
    [[nodiscard]] std::size_t n_assets() const noexcept { return assets_.size(); }
    [[nodiscard]] const std::vector<BankRecord>& banks() const noexcept { return banks_; }
    [[nodiscard]] const std::vector<AssetRecord>& assets() const noexcept { return assets_; }
    [[nodiscard]] const Matrix& weights() const noexcept { return weights_; }
    [[nodiscard]] const Options& options() const noexcept { return options_; }

    [[nodiscard]] std::optional<std::size_t> bank_index(std::string_view id) const;
    [[nodiscard]] std::optional<std::size_t> asset_index(std::string_view id) const;

    /// Total holdings of bank i at t = 0, sum_mu A_imu(0).
    [[nodiscard]] double holdings_value(std::size_t bank) const noexcept {
        return weights_.row_sum(bank);
    }
    /// Sum over all banks and assets of A_imu(0).
    [[nodiscard]] double total_value() const noexcept;
    /// Index of the bank with the largest total holdings (first on ties).
    [[nodiscard]] std::size_t largest_holder() const noexcept;

    /// Copy with bank i's initial equity replaced. c_i is re-derived so the
    /// equity identity keeps holding.
    [[nodiscard]] HoldingsMatrix with_equity(std::size_t bank, double equity0) const;

    /// Copy with new weights (same shape). Equities are kept and every c_i is
    /// re-derived; asset totals are recomputed.
    [[nodiscard]] HoldingsMatrix with_weights(Matrix weights, Options options) const;

private:
    std::vector<BankRecord> banks_;
    std::vector<AssetRecord> assets_;
    Matrix weights_;
    Options options_;
};

struct ModelParams {
    double alpha = 0.6;  // inverse market depth
    double beta = 0.6;   // panic factor
    double tau_a = 1.0;  // market response time
    double tau_b = 1.0;  // bank response time

    [[nodiscard]] double gamma() const noexcept { return alpha * beta; }
    /// Throws ValidationError unless both response times are positive and all fields finite.
    void validate() const;
};

/// Impulsive equity shock f_i(t) = s * E_j * delta_ij * delta(t) on one bank.
struct ShockSpec {
    std::string target_bank;
    double magnitude = -0.1;  // s

    [[nodiscard]] bool is_genuine() const noexcept { return magnitude != 0.0; }
    /// Throws ValidationError if magnitude <= -1 or is not finite.
    void validate() const;
};

/// Full dynamical state. Failed banks have e = 0 and a frozen (zero) da row.
struct SystemState {
    double t = 0.0;
    Matrix a;                     // A_imu(t)
    Matrix da;                    // dA_imu/dt
    std::vector<double> p;        // p_mu(t)
    std::vector<double> dp;       // dp_mu/dt
    std::vector<double> e;        // E_i(t)
    std::vector<double> de;       // dE_i/dt implied by the equity equation (0 for failed banks)
    std::vector<std::uint8_t> failed;

    [[nodiscard]] std::size_t n_banks() const noexcept { return e.size(); }
    [[nodiscard]] std::size_t n_assets() const noexcept { return p.size(); }
    [[nodiscard]] std::size_t failure_count() const noexcept;
    /// sum_i sum_mu a_imu * p_mu
    [[nodiscard]] double holdings_value() const noexcept;

    friend bool operator==(const SystemState&, const SystemState&) = default;
};

/// Equilibrium state at t = 0: a = weights, p = 1, e = equity0, all velocities 0.
[[nodiscard]] SystemState initial_state(const HoldingsMatrix& net);

/// max_i |e_i - (sum_mu a_imu p_mu + c_i)| / |e_i|; the t = 0 equity identity.
[[nodiscard]] double equity_identity_error(const HoldingsMatrix& net, const SystemState& state);

}  // namespace bankdyn
