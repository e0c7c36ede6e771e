#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "bankdyn/matrix.hpp"

namespace bankdyn {

/// Paired daily series per asset: bond price p_mu(t) and the equity proxy
/// E*_(mu)(t) built from the asset's dominant holders.
class PricePanel {
public:
    /// Rows of `bond` and `equity` follow `dates`, columns follow `asset_ids`.
    PricePanel(std::vector<std::string> dates, std::vector<std::string> asset_ids, Matrix bond,
               Matrix equity);

    [[nodiscard]] std::size_t n_dates() const noexcept { return dates_.size(); }
    [[nodiscard]] std::size_t n_assets() const noexcept { return asset_ids_.size(); }
    [[nodiscard]] const std::vector<std::string>& dates() const noexcept { return dates_; }
    [[nodiscard]] const std::vector<std::string>& asset_ids() const noexcept { return asset_ids_; }
    [[nodiscard]] const Matrix& bond() const noexcept { return bond_; }
    [[nodiscard]] const Matrix& equity() const noexcept { return equity_; }

    /// Trailing moving average over `days` observations (fewer at the start).
    [[nodiscard]] PricePanel smoothed(std::size_t days) const;

private:
    std::vector<std::string> dates_;
    std::vector<std::string> asset_ids_;
    Matrix bond_;
    Matrix equity_;
};

/// Long-format CSV `date,series_id,series_type,value`, series_type bond|equity.
/// Every asset needs both series on every date.
[[nodiscard]] PricePanel parse_panel(std::istream& in, std::string_view source = "panel");
[[nodiscard]] PricePanel load_panel(const std::string& path);
void write_panel(std::ostream& out, const PricePanel& panel);

/// (end - start) / ((end + start) / 2), bounded in (-2, 2).
[[nodiscard]] double symmetric_return(double x_start, double x_end);

struct CalibrationOptions {
    std::size_t window_days = 84;
    std::size_t stride = 1;
    double denominator_floor = 1e-3;  // |symmetric return of E*| below this drops the asset
    std::size_t smoothing_days = 0;   // 0 disables pre-smoothing
};

struct GammaEstimate {
    std::string window_start;
    std::string window_end;
    std::vector<std::string> asset_ids;  // retained assets only
    std::vector<double> per_asset;
    double mean = 0.0;
    double std = 0.0;  // population standard deviation across retained assets
    bool all_dropped = false;
};

/// One estimate per window [k, k + window_days - 1], k advancing by `stride`.
[[nodiscard]] std::vector<GammaEstimate> estimate_gamma(const PricePanel& panel,
                                                        const CalibrationOptions& options = {});

enum class Regime : std::uint8_t { Stable, Unstable, Indeterminate };

[[nodiscard]] std::string_view to_string(Regime r) noexcept;

/// Stable if mean + std < 1, Unstable if mean - std > 1.
[[nodiscard]] Regime classify_regime(const GammaEstimate& estimate) noexcept;

/// `window_start,window_end,asset_id,gamma,gamma_std`; each window ends with a
/// MEAN row carrying the mean and std (left empty when every asset was dropped).
void write_gamma_csv(std::ostream& out, const std::vector<GammaEstimate>& estimates);

}  // namespace bankdyn
