#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace riskwave {

/// Dated T x N panel of simple per-period returns (0.01 == 1%).
///
/// Rows are periods, columns are assets. The constructor enforces the
/// invariants, so any ReturnPanel in hand has strictly increasing dates,
/// unique asset names and finite values. Immutable after construction.
class ReturnPanel {
public:
    ReturnPanel(std::vector<std::string> dates, std::vector<std::string> assets, Eigen::MatrixXd values);

    const std::vector<std::string>& dates() const noexcept { return dates_; }
    const std::vector<std::string>& assets() const noexcept { return assets_; }
    const Eigen::MatrixXd& values() const noexcept { return values_; }

    Eigen::Index periods() const noexcept { return values_.rows(); }
    Eigen::Index num_assets() const noexcept { return values_.cols(); }

private:
    std::vector<std::string> dates_;
    std::vector<std::string> assets_;
    Eigen::MatrixXd values_;
};

enum class SeriesKind { Prices, Returns };

SeriesKind parse_series_kind(const std::string& text);

struct LoadedPanel {
    ReturnPanel panel;
    std::size_t dropped_rows = 0;
};

/// Reads a CSV whose first column is an ISO-8601 date and whose remaining
/// columns hold one asset each. Rows with any missing or unparsable cell are
/// dropped (listwise deletion). Prices are converted to simple returns
/// p_t / p_{t-1} - 1, which consumes the first usable row.
LoadedPanel load_panel(const std::filesystem::path& path, SeriesKind kind);

/// Same as load_panel but from in-memory CSV text; `source` names the input
/// in error messages.
LoadedPanel parse_panel(const std::string& csv_text, SeriesKind kind, const std::string& source = "<memory>");

struct DescriptiveStats {
    std::vector<std::string> assets;
    Eigen::VectorXd mean;
    Eigen::VectorXd stddev;  // 1/(T-1) divisor
    Eigen::VectorXd skewness;
    Eigen::VectorXd kurtosis;  // raw standardized fourth moment unless excess requested
};

/// Per-asset mean, sample standard deviation, skewness and kurtosis.
/// Skewness and kurtosis are the plain moment estimators m3/m2^1.5 and
/// m4/m2^2 with 1/T central moments. Requires T >= 4.
DescriptiveStats describe(const ReturnPanel& panel, bool excess_kurtosis = false);

/// Rows [end_index - length, end_index) of the panel.
ReturnPanel window(const ReturnPanel& panel, Eigen::Index end_index, Eigen::Index length);

/// Parameters for a Gaussian synthetic return panel.
struct SynthSpec {
    std::vector<std::string> assets;
    Eigen::VectorXd volatilities;
    Eigen::VectorXd means;  // empty => zero drift
    Eigen::MatrixXd correlation;
    Eigen::Index periods = 0;
    std::uint64_t seed = 0;
    std::string start_date = "2000-01-03";
};

/// Draws `periods` i.i.d. multivariate normal return vectors with the given
/// volatilities and correlation. Dates are consecutive weekdays starting at
/// `start_date`. Deterministic for a fixed seed.
ReturnPanel synthesize(const SynthSpec& spec);

/// Cumulative price path 1, 1+r_1, (1+r_1)(1+r_2), ... per asset.
Eigen::MatrixXd cumulative_prices(const ReturnPanel& panel);

}  // namespace riskwave
