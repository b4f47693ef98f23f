#pragma once

#include "riskwave/backtest.hpp"
#include "riskwave/market_data.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace riskwave {

/// Shortest round-trip decimal representation ("%.17g").
std::string format_number(double value);

void write_stats_csv(std::ostream& out, const DescriptiveStats& stats);
void write_panel_csv(std::ostream& out, const ReturnPanel& panel);

/// asset,type rows; header required.
std::map<std::string, AssetType> read_asset_types(const std::filesystem::path& path);
void write_asset_types(std::ostream& out, const std::vector<std::string>& assets, const std::map<std::string, AssetType>& types);

/// Synthetic-panel description:
/// {"periods": T, "seed": s, "start_date": "YYYY-MM-DD",
///  "assets": [{"name": .., "vol": .., "mean": .., "type": "Bond"|"Equity"}, ...],
///  "correlation": [[..], ..]  or  {"within": {"Bond": r, "Equity": r}, "across": r}}
struct SynthDescription {
    SynthSpec spec;
    std::map<std::string, AssetType> types;
};

SynthDescription parse_synth_description(const nlohmann::json& j);
SynthDescription load_synth_description(const std::filesystem::path& path);

nlohmann::json report_to_json(const BacktestReport& report, const std::map<std::string, AssetType>& types,
                              bool include_fits);

/// Writes report.json, returns.csv, weights.csv and wealth.csv into `dir`.
void write_report_bundle(const std::filesystem::path& dir, const BacktestReport& report,
                         const std::map<std::string, AssetType>& types, bool include_fits);

/// Strategy x (AR, RISK, R/R, MaxDD) table, percentages to two decimals.
std::string format_summary_table(const std::vector<BacktestReport>& reports);
void write_summary_csv(std::ostream& out, const std::vector<BacktestReport>& reports);

}  // namespace riskwave
