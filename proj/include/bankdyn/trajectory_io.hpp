#pragma once

#include <iosfwd>

#include <json.hpp>

#include "bankdyn/engine.hpp"
#include "bankdyn/model.hpp"

namespace bankdyn {

/// `t,asset_id,price`, one row per sample and asset.
void write_prices_csv(std::ostream& out, const HoldingsMatrix& net, const Trajectory& traj);
/// `t,bank_id,equity`, one row per sample and bank.
void write_equities_csv(std::ostream& out, const HoldingsMatrix& net, const Trajectory& traj);
/// `{verdict, relaxation_time, failed_banks: [{id, t_fail}], final_prices: {id: p}}`
[[nodiscard]] nlohmann::ordered_json verdict_json(const HoldingsMatrix& net,
                                                  const Trajectory& traj);

}  // namespace bankdyn
