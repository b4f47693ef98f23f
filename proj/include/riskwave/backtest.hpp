#pragma once

#include "riskwave/allocation.hpp"
#include "riskwave/market_data.hpp"

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace riskwave {

enum class Strategy { EW, PCA, HPCA, SPCA };

std::string to_string(Strategy strategy);
Strategy parse_strategy(const std::string& name);

struct BacktestConfig {
    Eigen::Index window = 250;
    Eigen::Index rebalance = 20;
    Strategy strategy = Strategy::EW;
    OptimizerOptions optimizer;
    std::size_t factors = 0;  // 0 => N
    double diagonal_loading = 0.0;
    bool wealth_sum = false;  // literal sum-of-(1+R) wealth for MaxDD
    unsigned threads = 0;     // 0 => hardware concurrency
};

/// Throws std::invalid_argument when the config cannot run on `periods` rows.
void validate(const BacktestConfig& config, Eigen::Index periods);

struct RebalanceRecord {
    std::string date;  // date of the first period the weights apply to
    Eigen::Index index = 0;
    Eigen::VectorXd weights;
    double entropy = 0.0;
    bool converged = true;
    bool failed = false;  // strategy threw; previous weights carried forward
    std::optional<PotentialFit> potential;
};

struct Performance {
    double annual_return = 0.0;
    double risk = 0.0;
    std::optional<double> return_risk;  // absent when risk == 0
};

/// AR = (250/T) sum R, RISK = sqrt(250/(T-1) sum (R - mean)^2), R/R = AR/RISK.
Performance performance(const Eigen::VectorXd& returns);

/// Wealth W_k = prod_{t<=k} (1 + R_t) (or the literal sum of (1 + R_t) when
/// `wealth_sum` is set); MaxDD = min_k min(0, W_k / max_{j<=k} W_j - 1).
double max_drawdown(const Eigen::VectorXd& returns, bool wealth_sum = false);

Eigen::VectorXd wealth_curve(const Eigen::VectorXd& returns, bool wealth_sum = false);

enum class AssetType { Bond, Equity };

std::string to_string(AssetType type);
AssetType parse_asset_type(const std::string& name);

struct AverageWeights {
    std::vector<std::string> assets;
    Eigen::VectorXd per_asset;
    std::map<std::string, double> per_type;  // empty when no types supplied
};

/// Unweighted mean of the weights over rebalance dates. With a non-empty
/// `types` map every asset must be typed; type totals sum member assets.
AverageWeights average_weights(const std::vector<RebalanceRecord>& series, const std::vector<std::string>& assets,
                               const std::map<std::string, AssetType>& types = {});

struct BacktestReport {
    Strategy strategy = Strategy::EW;
    BacktestConfig config;
    std::vector<std::string> assets;
    std::vector<std::string> return_dates;
    Eigen::VectorXd returns;  // R_t for t = window .. T-1
    std::vector<RebalanceRecord> rebalances;
    Performance metrics;
    double max_drawdown = 0.0;
    std::vector<std::string> warnings;
};

/// Rolling evaluation: at t = window, window + rebalance, ... fit the
/// strategy on rows [t - window, t) and hold the weights until the next
/// rebalance. R_t = sum_i r_{t,i} w_i with the most recent weights; no
/// drift between rebalances and no transaction costs.
BacktestReport run_backtest(const ReturnPanel& panel, const BacktestConfig& config);

/// Weights for a single window, dispatching on the strategy.
RebalanceRecord allocate(const ReturnPanel& window, const BacktestConfig& config, std::vector<std::string>& warnings);

}  // namespace riskwave
