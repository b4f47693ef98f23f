#pragma once

#include "riskwave/backtest.hpp"
#include "riskwave/market_data.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace riskwave::cli {

/// Resolved settings for one batch invocation.
/// Precedence: command-line flags > config file > these defaults.
struct RunConfig {
    std::filesystem::path input;
    SeriesKind kind = SeriesKind::Returns;
    std::vector<Strategy> strategies{Strategy::EW, Strategy::PCA, Strategy::HPCA, Strategy::SPCA};
    Eigen::Index window = 250;
    Eigen::Index rebalance = 20;
    std::size_t factors = 0;
    int restarts = 16;
    std::uint64_t seed = 0;
    double tolerance = 1e-8;
    int max_iterations = 5000;
    double diagonal_loading = 0.0;
    std::filesystem::path out;
    std::filesystem::path types;
    std::filesystem::path spec;  // synth only
    Eigen::Index periods = 0;    // synth only; 0 => take from spec
    bool long_only = true;
    bool excess_kurtosis = false;
    bool wealth_sum = false;
    bool dump_fits = false;
    unsigned threads = 0;
};

std::vector<Strategy> parse_strategy_list(const std::string& text);

/// Applies `key = value` pairs (or a flat JSON object) from a config file.
void apply_config_file(const std::filesystem::path& path, RunConfig& config);
void apply_setting(const std::string& key, const std::string& value, RunConfig& config);

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name. Returns the process exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace riskwave::cli
