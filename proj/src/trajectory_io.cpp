#include "bankdyn/trajectory_io.hpp"

#include <ostream>

#include "bankdyn/csv.hpp"

namespace bankdyn {

void write_prices_csv(std::ostream& out, const HoldingsMatrix& net, const Trajectory& traj) {
    out << "t,asset_id,price\n";
    for (const auto& s : traj.samples) {
        const auto t = csv::format_double(s.t);
        for (std::size_t mu = 0; mu < net.n_assets(); ++mu) {
            out << t << ',' << csv::escape(net.assets()[mu].id) << ','
                << csv::format_double(s.p[mu]) << '\n';
        }
    }
}

void write_equities_csv(std::ostream& out, const HoldingsMatrix& net, const Trajectory& traj) {
    out << "t,bank_id,equity\n";
    for (const auto& s : traj.samples) {
        const auto t = csv::format_double(s.t);
        for (std::size_t i = 0; i < net.n_banks(); ++i) {
            out << t << ',' << csv::escape(net.banks()[i].id) << ','
                << csv::format_double(s.e[i]) << '\n';
        }
    }
}

nlohmann::ordered_json verdict_json(const HoldingsMatrix& net, const Trajectory& traj) {
    nlohmann::ordered_json j;
    j["verdict"] = std::string(to_string(traj.verdict));
    j["relaxation_time"] = traj.relaxation_time;
    auto failed = nlohmann::ordered_json::array();
    for (const auto& f : traj.failed_banks) {
        failed.push_back({{"id", f.bank_id}, {"t_fail", f.t_fail}});
    }
    j["failed_banks"] = std::move(failed);
    nlohmann::ordered_json prices = nlohmann::ordered_json::object();
    const auto& last = traj.final_state();
    for (std::size_t mu = 0; mu < net.n_assets(); ++mu) prices[net.assets()[mu].id] = last.p[mu];
    j["final_prices"] = std::move(prices);
    return j;
}

}  // namespace bankdyn
