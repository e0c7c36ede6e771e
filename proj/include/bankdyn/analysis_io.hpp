#pragma once

#include <iosfwd>
#include <vector>

#include "bankdyn/analysis.hpp"
#include "bankdyn/model.hpp"

namespace bankdyn {

/// `bank_id,rank_value,survival_equity_ratio,total_holdings,equity0,threshold,verdict,error`
void write_bankrank_csv(std::ostream& out, const BankRankResult& result);

/// `alpha,beta,order_param,relax_time,verdict,failures,error`, alpha-major.
void write_phase_csv(std::ostream& out, const PhaseGrid& grid);

/// `trial,worst_asset,verdict,failures,<asset ids...>,error`; prices per asset.
void write_rewire_csv(std::ostream& out, const HoldingsMatrix& net,
                      const std::vector<RewireTrial>& trials);

/// `bank_id,verdict,failures,<asset ids...>,error`
void write_shock_sweep_csv(std::ostream& out, const HoldingsMatrix& net,
                           const std::vector<ShockOutcome>& outcomes);

}  // namespace bankdyn
