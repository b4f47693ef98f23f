#include "riskwave/backtest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace riskwave {

namespace {

constexpr double kPeriodsPerYear = 250.0;

std::string upper(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return s;
}

}  // namespace

std::string to_string(Strategy strategy) {
    switch (strategy) {
        case Strategy::EW: return "EW";
        case Strategy::PCA: return "PCA";
        case Strategy::HPCA: return "HPCA";
        case Strategy::SPCA: return "SPCA";
    }
    return "?";
}

Strategy parse_strategy(const std::string& name) {
    const std::string u = upper(name);
    if (u == "EW") return Strategy::EW;
    if (u == "PCA") return Strategy::PCA;
    if (u == "HPCA") return Strategy::HPCA;
    if (u == "SPCA") return Strategy::SPCA;
    throw std::invalid_argument("unknown strategy '" + name + "' (expected EW, PCA, HPCA or SPCA)");
}

std::string to_string(AssetType type) { return type == AssetType::Bond ? "Bond" : "Equity"; }

AssetType parse_asset_type(const std::string& name) {
    const std::string u = upper(name);
    if (u == "BOND") return AssetType::Bond;
    if (u == "EQUITY") return AssetType::Equity;
    throw std::invalid_argument("unknown asset type '" + name + "' (expected Bond or Equity)");
}

void validate(const BacktestConfig& config, Eigen::Index periods) {
    if (config.window < 2) throw std::invalid_argument("window must be at least 2");
    if (config.rebalance < 1) throw std::invalid_argument("rebalance interval must be at least 1");
    if (config.window + config.rebalance > periods)
        throw std::invalid_argument("window + rebalance (" + std::to_string(config.window + config.rebalance) +
                                    ") exceeds the number of periods (" + std::to_string(periods) + ")");
    if (config.optimizer.restarts < 1) throw std::invalid_argument("restarts must be at least 1");
    if (config.optimizer.max_iterations < 1) throw std::invalid_argument("max iterations must be at least 1");
    if (!(config.optimizer.tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
    if (config.diagonal_loading < 0.0) throw std::invalid_argument("diagonal loading must be nonnegative");
}

Performance performance(const Eigen::VectorXd& returns) {
    const Eigen::Index t = returns.size();
    if (t < 2) throw std::invalid_argument("performance: need at least 2 returns");
    const double td = static_cast<double>(t);
    Performance p;
    p.annual_return = kPeriodsPerYear / td * returns.sum();
    const Eigen::ArrayXd shifted = returns.array() - returns(0);
    p.risk = std::sqrt(kPeriodsPerYear / (td - 1.0) * (shifted - shifted.mean()).square().sum());
    if (p.risk > 0.0) p.return_risk = p.annual_return / p.risk;
    return p;
}

Eigen::VectorXd wealth_curve(const Eigen::VectorXd& returns, bool wealth_sum) {
    if ((returns.array() <= -1.0).any()) throw std::invalid_argument("wealth_curve: returns must exceed -100%");
    Eigen::VectorXd w(returns.size());
    double acc = wealth_sum ? 0.0 : 1.0;
    for (Eigen::Index t = 0; t < returns.size(); ++t) {
        acc = wealth_sum ? acc + (1.0 + returns(t)) : acc * (1.0 + returns(t));
        w(t) = acc;
    }
    return w;
}

double max_drawdown(const Eigen::VectorXd& returns, bool wealth_sum) {
    if (returns.size() < 1) throw std::invalid_argument("max_drawdown: need at least one return");
    const Eigen::VectorXd w = wealth_curve(returns, wealth_sum);
    // Compounded wealth starts from W_0 = 1, so a first-period loss counts.
    double peak = wealth_sum ? w(0) : 1.0;
    double worst = 0.0;
    for (Eigen::Index t = 0; t < w.size(); ++t) {
        peak = std::max(peak, w(t));
        worst = std::min(worst, w(t) / peak - 1.0);
    }
    return worst;
}

AverageWeights average_weights(const std::vector<RebalanceRecord>& series, const std::vector<std::string>& assets,
                               const std::map<std::string, AssetType>& types) {
    if (series.empty()) throw std::invalid_argument("average_weights: empty weight series");
    const auto n = static_cast<Eigen::Index>(assets.size());
    AverageWeights out;
    out.assets = assets;
    out.per_asset = Eigen::VectorXd::Zero(n);
    for (const auto& r : series) {
        if (r.weights.size() != n) throw std::invalid_argument("average_weights: weight vector length mismatch");
        out.per_asset += r.weights;
    }
    out.per_asset /= static_cast<double>(series.size());
    if (!types.empty()) {
        for (const auto& type : {AssetType::Bond, AssetType::Equity}) out.per_type[to_string(type)] = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            auto it = types.find(assets[static_cast<std::size_t>(i)]);
            if (it == types.end())
                throw std::invalid_argument("average_weights: asset '" + assets[static_cast<std::size_t>(i)] + "' has no type");
            out.per_type[to_string(it->second)] += out.per_asset(i);
        }
    }
    return out;
}

RebalanceRecord allocate(const ReturnPanel& window, const BacktestConfig& config, std::vector<std::string>& warnings) {
    RebalanceRecord record;
    const Eigen::Index n = window.num_assets();
    if (config.strategy == Strategy::EW || n == 1) {
        record.weights = equal_weights(n);
        return record;
    }
    const FactorMethod method = config.strategy == Strategy::PCA    ? FactorMethod::PCA
                                : config.strategy == Strategy::HPCA ? FactorMethod::HPCA
                                                                    : FactorMethod::SPCA;
    FactorModel model = build_model(method, window, config.factors, config.diagonal_loading);
    warnings.insert(warnings.end(), model.warnings.begin(), model.warnings.end());
    const OptimizationResult opt = maximize_entropy(model, config.optimizer);
    if (!opt.converged) warnings.push_back("optimizer did not reach the gradient tolerance");
    record.weights = opt.weights;
    record.entropy = opt.entropy;
    record.converged = opt.converged;
    record.potential = std::move(model.potential);
    return record;
}

BacktestReport run_backtest(const ReturnPanel& panel, const BacktestConfig& config) {
    validate(config, panel.periods());
    const Eigen::Index t_total = panel.periods();
    const Eigen::Index n = panel.num_assets();

    std::vector<Eigen::Index> starts;
    for (Eigen::Index t = config.window; t < t_total; t += config.rebalance) starts.push_back(t);

    struct Slot {
        RebalanceRecord record;
        std::vector<std::string> warnings;
        std::string error;
    };
    std::vector<Slot> slots(starts.size());
    auto fit_one = [&](std::size_t k) {
        Slot& slot = slots[k];
        try {
            slot.record = allocate(window(panel, starts[k], config.window), config, slot.warnings);
        } catch (const std::exception& e) {
            slot.error = e.what();
        }
    };

    unsigned threads = config.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : config.threads;
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, starts.size()));
    if (threads <= 1) {
        for (std::size_t k = 0; k < starts.size(); ++k) fit_one(k);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < threads; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t k = w; k < starts.size(); k += threads) fit_one(k);
            });
        }
    }

    BacktestReport report;
    report.strategy = config.strategy;
    report.config = config;
    report.assets = panel.assets();

    Eigen::VectorXd previous = equal_weights(n);
    for (std::size_t k = 0; k < starts.size(); ++k) {
        Slot& slot = slots[k];
        const std::string& date = panel.dates()[static_cast<std::size_t>(starts[k])];
        for (const auto& w : slot.warnings) report.warnings.push_back(date + ": " + w);
        if (!slot.error.empty()) {
            report.warnings.push_back(date + ": strategy failed (" + slot.error + "); " +
                                      (k == 0 ? "using equal weights" : "carrying previous weights forward"));
            slot.record = RebalanceRecord{};
            slot.record.weights = previous;
            slot.record.failed = true;
            slot.record.converged = false;
        }
        slot.record.date = date;
        slot.record.index = starts[k];
        previous = slot.record.weights;
        report.rebalances.push_back(std::move(slot.record));
    }

    const Eigen::Index periods_out = t_total - config.window;
    report.returns.resize(periods_out);
    report.return_dates.reserve(static_cast<std::size_t>(periods_out));
    std::size_t current = 0;
    for (Eigen::Index t = config.window; t < t_total; ++t) {
        while (current + 1 < report.rebalances.size() && report.rebalances[current + 1].index <= t) ++current;
        report.returns(t - config.window) = panel.values().row(t).dot(report.rebalances[current].weights);
        report.return_dates.push_back(panel.dates()[static_cast<std::size_t>(t)]);
    }

    report.metrics = performance(report.returns);
    report.max_drawdown = max_drawdown(report.returns, config.wealth_sum);
    return report;
}

}  // namespace riskwave
