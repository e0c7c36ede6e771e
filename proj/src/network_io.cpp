#include "bankdyn/network_io.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <unordered_map>

#include "bankdyn/csv.hpp"
#include "bankdyn/error.hpp"

namespace bankdyn {

namespace {

struct BankRow {
    std::string id;
    std::optional<double> equity;
    std::optional<double> cash;
    std::size_t line = 0;
};

std::optional<double> optional_number(const std::string& field, const std::string& source,
                                      std::size_t line) {
    if (field.find_first_not_of(" \t") == std::string::npos) return std::nullopt;
    return csv::parse_double(field, source, line);
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    return in;
}

}  // namespace

LoadResult parse_network(std::istream& holdings, std::istream& banks,
                         const std::string& holdings_name, const std::string& banks_name) {
    // Banks file.
    std::vector<BankRow> bank_rows;
    std::unordered_map<std::string, std::size_t> bank_pos;
    {
        csv::Reader reader(banks, banks_name);
        reader.expect_header({"bank_id", "equity", "cash_minus_liability"});
        while (auto row = reader.next()) {
            if (row->fields.size() != 3) {
                throw ParseError(banks_name, row->line, "expected 3 fields");
            }
            BankRow b;
            b.id = row->fields[0];
            b.line = row->line;
            if (b.id.empty()) throw ParseError(banks_name, row->line, "empty bank_id");
            b.equity = optional_number(row->fields[1], banks_name, row->line);
            b.cash = optional_number(row->fields[2], banks_name, row->line);
            if (!b.equity && !b.cash) {
                throw ParseError(banks_name, row->line,
                                 "equity and cash_minus_liability are both empty");
            }
            if (!bank_pos.emplace(b.id, bank_rows.size()).second) {
                throw ValidationError(banks_name + ":" + std::to_string(row->line) +
                                      ": duplicate bank id '" + b.id + "'");
            }
            bank_rows.push_back(std::move(b));
        }
    }
    if (bank_rows.empty()) throw ValidationError(banks_name + ": no banks");

    // Holdings file. Assets are ordered by first appearance.
    std::vector<std::string> asset_ids;
    std::unordered_map<std::string, std::size_t> asset_pos;
    std::map<std::pair<std::size_t, std::size_t>, double> entries;
    {
        csv::Reader reader(holdings, holdings_name);
        reader.expect_header({"bank_id", "asset_id", "amount"});
        while (auto row = reader.next()) {
            if (row->fields.size() != 3) {
                throw ParseError(holdings_name, row->line, "expected 3 fields");
            }
            const auto& bank_id = row->fields[0];
            const auto& asset_id = row->fields[1];
            if (bank_id.empty() || asset_id.empty()) {
                throw ParseError(holdings_name, row->line, "empty id");
            }
            const double amount = csv::parse_double(row->fields[2], holdings_name, row->line);
            const std::string where = holdings_name + ":" + std::to_string(row->line) + ": ";
            if (amount < 0.0) {
                throw ValidationError(where + "negative amount for bank '" + bank_id + "'");
            }
            auto bit = bank_pos.find(bank_id);
            if (bit == bank_pos.end()) {
                throw ValidationError(where + "unknown bank id '" + bank_id + "'");
            }
            auto [ait, inserted] = asset_pos.emplace(asset_id, asset_ids.size());
            if (inserted) asset_ids.push_back(asset_id);
            if (!entries.emplace(std::pair{bit->second, ait->second}, amount).second) {
                throw ValidationError(where + "duplicate entry for bank '" + bank_id +
                                      "', asset '" + asset_id + "'");
            }
        }
    }
    if (asset_ids.empty()) throw ValidationError(holdings_name + ": no holdings");

    Matrix raw(bank_rows.size(), asset_ids.size(), 0.0);
    for (const auto& [key, amount] : entries) raw(key.first, key.second) = amount;

    std::vector<std::string> warnings;

    // Resolve equity / cash and decide which banks survive pruning.
    std::vector<BankRecord> records;
    std::vector<std::size_t> kept_rows;
    for (std::size_t i = 0; i < bank_rows.size(); ++i) {
        const auto& b = bank_rows[i];
        const double holdings_sum = raw.row_sum(i);
        BankRecord rec{b.id, 0.0, 0.0};
        if (b.equity && b.cash) {
            const double scale =
                std::max({std::abs(*b.equity), std::abs(holdings_sum), std::abs(*b.cash)});
            if (std::abs(*b.equity - (holdings_sum + *b.cash)) > kEquityIdentityTol * scale) {
                throw ValidationError(banks_name + ":" + std::to_string(b.line) + ": bank '" +
                                      b.id +
                                      "': equity != holdings + cash_minus_liability");
            }
            rec.equity0 = *b.equity;
            rec.cash_minus_liability = *b.cash;
        } else if (b.equity) {
            rec.equity0 = *b.equity;
            rec.cash_minus_liability = *b.equity - holdings_sum;
        } else {
            rec.cash_minus_liability = *b.cash;
            rec.equity0 = holdings_sum + *b.cash;
        }
        if (!(rec.equity0 > 0.0)) {
            warnings.push_back("dropped bank '" + b.id + "': non-positive equity");
            continue;
        }
        if (!(holdings_sum > 0.0)) {
            warnings.push_back("dropped bank '" + b.id + "': no holdings");
            continue;
        }
        records.push_back(std::move(rec));
        kept_rows.push_back(i);
    }
    const std::size_t dropped_banks = bank_rows.size() - records.size();
    if (records.empty()) throw ValidationError("no banks left after pruning");

    std::vector<std::size_t> kept_cols;
    std::vector<std::string> kept_ids;
    for (std::size_t mu = 0; mu < asset_ids.size(); ++mu) {
        double total = 0.0;
        for (std::size_t r : kept_rows) total += raw(r, mu);
        if (total > 0.0) {
            kept_cols.push_back(mu);
            kept_ids.push_back(asset_ids[mu]);
        } else {
            warnings.push_back("dropped asset '" + asset_ids[mu] + "': no remaining holders");
        }
    }
    if (kept_cols.empty()) throw ValidationError("no assets left after pruning");

    Matrix weights(kept_rows.size(), kept_cols.size(), 0.0);
    for (std::size_t r = 0; r < kept_rows.size(); ++r) {
        for (std::size_t c = 0; c < kept_cols.size(); ++c) {
            weights(r, c) = raw(kept_rows[r], kept_cols[c]);
        }
    }

    // A bank can lose all its holdings only through a dropped asset, which
    // requires every holder of that asset to be dropped already.
    return LoadResult{HoldingsMatrix(std::move(records), std::move(kept_ids), std::move(weights)),
                      std::move(warnings), dropped_banks, asset_ids.size() - kept_cols.size()};
}

LoadResult load_network(const std::filesystem::path& holdings_csv,
                        const std::filesystem::path& banks_csv) {
    auto h = open_input(holdings_csv);
    auto b = open_input(banks_csv);
    return parse_network(h, b, holdings_csv.string(), banks_csv.string());
}

void write_network(const HoldingsMatrix& net, std::ostream& holdings, std::ostream& banks) {
    // Asset-major, so that first appearance reproduces the column order on load.
    holdings << "bank_id,asset_id,amount\n";
    for (std::size_t mu = 0; mu < net.n_assets(); ++mu) {
        for (std::size_t i = 0; i < net.n_banks(); ++i) {
            const double w = net.weights()(i, mu);
            if (w > 0.0) {
                holdings << csv::escape(net.banks()[i].id) << ',' << csv::escape(net.assets()[mu].id)
                         << ',' << csv::format_double(w) << '\n';
            }
        }
    }
    banks << "bank_id,equity,cash_minus_liability\n";
    for (const auto& b : net.banks()) {
        banks << csv::escape(b.id) << ',' << csv::format_double(b.equity0) << ','
              << csv::format_double(b.cash_minus_liability) << '\n';
    }
}

void save_network(const HoldingsMatrix& net, const std::filesystem::path& holdings_csv,
                  const std::filesystem::path& banks_csv) {
    std::ofstream h(holdings_csv, std::ios::binary);
    std::ofstream b(banks_csv, std::ios::binary);
    if (!h || !b) throw Error("cannot write network files");
    write_network(net, h, b);
    if (!h || !b) throw Error("error while writing network files");
}

}  // namespace bankdyn
