#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "bankdyn/model.hpp"

namespace bankdyn {

struct LoadResult {
    HoldingsMatrix network;
    std::vector<std::string> warnings;
    std::size_t dropped_banks = 0;   // non-positive equity or no holdings
    std::size_t dropped_assets = 0;  // no remaining holders
};

/// Reads the holdings/banks CSV pair.
///
/// holdings: `bank_id,asset_id,amount`; banks: `bank_id,equity,cash_minus_liability`
/// where one of the last two may be empty. A missing equity is derived from the
/// identity E = sum_mu A_imu + c, a missing c from c = E - sum_mu A_imu; when both
/// are given they must agree to 1e-9 relative or the file is rejected.
///
/// Banks with equity <= 0 or no positive holdings are dropped and counted.
[[nodiscard]] LoadResult load_network(const std::filesystem::path& holdings_csv,
                                      const std::filesystem::path& banks_csv);
[[nodiscard]] LoadResult parse_network(std::istream& holdings, std::istream& banks,
                                       const std::string& holdings_name = "holdings",
                                       const std::string& banks_name = "banks");

/// Writes the same CSV pair. Only positive weights are written. Numbers use the
/// shortest round-trip representation, so load(save(net)) is bit-identical.
void save_network(const HoldingsMatrix& net, const std::filesystem::path& holdings_csv,
                  const std::filesystem::path& banks_csv);
void write_network(const HoldingsMatrix& net, std::ostream& holdings, std::ostream& banks);

}  // namespace bankdyn
