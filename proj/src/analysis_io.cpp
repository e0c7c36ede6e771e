#include "bankdyn/analysis_io.hpp"

#include <ostream>

#include "bankdyn/csv.hpp"

namespace bankdyn {

namespace {

using csv::escape;
using csv::format_double;

void write_asset_header(std::ostream& out, const HoldingsMatrix& net) {
    for (const auto& a : net.assets()) out << ',' << escape(a.id);
}

void write_prices(std::ostream& out, const HoldingsMatrix& net, const std::vector<double>& p) {
    for (std::size_t mu = 0; mu < net.n_assets(); ++mu) {
        out << ',';
        if (mu < p.size()) out << format_double(p[mu]);
    }
}

}  // namespace

void write_bankrank_csv(std::ostream& out, const BankRankResult& result) {
    out << "bank_id,rank_value,survival_equity_ratio,total_holdings,equity0,threshold,verdict,"
           "error\n";
    for (const auto& r : result.reports) {
        out << escape(r.bank_id) << ',';
        if (r.error.empty()) {
            out << format_double(r.rank_value) << ',' << format_double(r.survival_equity_ratio);
        } else {
            out << ',';
        }
        out << ',' << format_double(r.total_holdings) << ',' << format_double(r.equity0) << ','
            << to_string(r.threshold_flag) << ',' << to_string(r.verdict) << ','
            << escape(r.error) << '\n';
    }
}

void write_phase_csv(std::ostream& out, const PhaseGrid& grid) {
    out << "alpha,beta,order_param,relax_time,verdict,failures,error\n";
    for (std::size_t ia = 0; ia < grid.alphas.size(); ++ia) {
        for (std::size_t ib = 0; ib < grid.betas.size(); ++ib) {
            const std::size_t cell = ia * grid.betas.size() + ib;
            out << format_double(grid.alphas[ia]) << ',' << format_double(grid.betas[ib]) << ','
                << format_double(grid.order_param(ia, ib)) << ','
                << format_double(grid.relax_time(ia, ib)) << ','
                << to_string(grid.verdicts[cell]) << ',' << grid.failures[cell] << ','
                << escape(grid.errors[cell]) << '\n';
        }
    }
}

void write_rewire_csv(std::ostream& out, const HoldingsMatrix& net,
                      const std::vector<RewireTrial>& trials) {
    out << "trial,worst_asset,verdict,failures";
    write_asset_header(out, net);
    out << ",error\n";
    for (const auto& t : trials) {
        out << t.trial << ',';
        if (t.error.empty()) out << escape(net.assets()[worst_hit_asset(t.final_prices)].id);
        out << ',' << to_string(t.verdict) << ',' << t.failures;
        write_prices(out, net, t.final_prices);
        out << ',' << escape(t.error) << '\n';
    }
}

void write_shock_sweep_csv(std::ostream& out, const HoldingsMatrix& net,
                           const std::vector<ShockOutcome>& outcomes) {
    out << "bank_id,verdict,failures";
    write_asset_header(out, net);
    out << ",error\n";
    for (const auto& o : outcomes) {
        out << escape(o.bank_id) << ',' << to_string(o.verdict) << ',' << o.failures;
        write_prices(out, net, o.final_prices);
        out << ',' << escape(o.error) << '\n';
    }
}

}  // namespace bankdyn
