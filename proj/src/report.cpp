#include "riskwave/report.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace riskwave {

using nlohmann::json;

std::string format_number(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

void write_stats_csv(std::ostream& out, const DescriptiveStats& stats) {
    out << "asset,mean,std,skew,kurt\n";
    for (std::size_t i = 0; i < stats.assets.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        out << stats.assets[i] << ',' << format_number(stats.mean(k)) << ',' << format_number(stats.stddev(k)) << ','
            << format_number(stats.skewness(k)) << ',' << format_number(stats.kurtosis(k)) << '\n';
    }
}

void write_panel_csv(std::ostream& out, const ReturnPanel& panel) {
    out << "date";
    for (const auto& a : panel.assets()) out << ',' << a;
    out << '\n';
    for (Eigen::Index t = 0; t < panel.periods(); ++t) {
        out << panel.dates()[static_cast<std::size_t>(t)];
        for (Eigen::Index j = 0; j < panel.num_assets(); ++j) out << ',' << format_number(panel.values()(t, j));
        out << '\n';
    }
}

std::map<std::string, AssetType> read_asset_types(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open asset type file '" + path.string() + "'");
    std::map<std::string, AssetType> types;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (header) {
            header = false;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw std::invalid_argument(path.string() + ": expected 'asset,type' rows");
        types[line.substr(0, comma)] = parse_asset_type(line.substr(comma + 1));
    }
    return types;
}

void write_asset_types(std::ostream& out, const std::vector<std::string>& assets, const std::map<std::string, AssetType>& types) {
    out << "asset,type\n";
    for (const auto& a : assets) {
        auto it = types.find(a);
        if (it != types.end()) out << a << ',' << to_string(it->second) << '\n';
    }
}

SynthDescription parse_synth_description(const json& j) {
    SynthDescription d;
    const auto& assets = j.at("assets");
    if (!assets.is_array() || assets.empty()) throw std::invalid_argument("synth spec: 'assets' must be a nonempty array");
    const auto n = static_cast<Eigen::Index>(assets.size());
    d.spec.volatilities.resize(n);
    d.spec.means = Eigen::VectorXd::Zero(n);
    std::vector<std::string> type_names(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& a = assets[static_cast<std::size_t>(i)];
        d.spec.assets.push_back(a.at("name").get<std::string>());
        d.spec.volatilities(i) = a.at("vol").get<double>();
        d.spec.means(i) = a.value("mean", 0.0);
        if (a.contains("type")) {
            type_names[static_cast<std::size_t>(i)] = a.at("type").get<std::string>();
            d.types[d.spec.assets.back()] = parse_asset_type(type_names[static_cast<std::size_t>(i)]);
        }
    }
    d.spec.periods = j.at("periods").get<Eigen::Index>();
    d.spec.seed = j.value("seed", std::uint64_t{0});
    d.spec.start_date = j.value("start_date", std::string("2000-01-03"));

    const auto& corr = j.at("correlation");
    d.spec.correlation = Eigen::MatrixXd::Identity(n, n);
    if (corr.is_array()) {
        if (static_cast<Eigen::Index>(corr.size()) != n) throw std::invalid_argument("synth spec: correlation must have one row per asset");
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto& row = corr[static_cast<std::size_t>(i)];
            if (static_cast<Eigen::Index>(row.size()) != n) throw std::invalid_argument("synth spec: correlation must be square");
            for (Eigen::Index k = 0; k < n; ++k) d.spec.correlation(i, k) = row[static_cast<std::size_t>(k)].get<double>();
        }
    } else if (corr.is_object()) {
        if (d.types.size() != static_cast<std::size_t>(n))
            throw std::invalid_argument("synth spec: block correlation needs a type on every asset");
        const double across = corr.value("across", 0.0);
        const auto within = corr.value("within", json::object());
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index k = 0; k < n; ++k) {
                if (i == k) continue;
                const auto ti = d.types.at(d.spec.assets[static_cast<std::size_t>(i)]);
                const auto tk = d.types.at(d.spec.assets[static_cast<std::size_t>(k)]);
                d.spec.correlation(i, k) = ti == tk ? within.value(to_string(ti), 0.0) : across;
            }
        }
    } else {
        throw std::invalid_argument("synth spec: 'correlation' must be a matrix or a block description");
    }
    return d;
}

SynthDescription load_synth_description(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open synthesis spec '" + path.string() + "'");
    try {
        return parse_synth_description(json::parse(in));
    } catch (const json::exception& e) {
        throw std::invalid_argument(path.string() + ": " + e.what());
    }
}

namespace {

json vector_json(const Eigen::VectorXd& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

json config_json(const BacktestConfig& c) {
    return {{"strategy", to_string(c.strategy)},
            {"window", c.window},
            {"rebalance", c.rebalance},
            {"factors", c.factors},
            {"restarts", c.optimizer.restarts},
            {"seed", c.optimizer.seed},
            {"tolerance", c.optimizer.tolerance},
            {"max_iterations", c.optimizer.max_iterations},
            {"long_only", c.optimizer.long_only},
            {"diagonal_loading", c.diagonal_loading},
            {"wealth_sum", c.wealth_sum}};
}

}  // namespace

json report_to_json(const BacktestReport& report, const std::map<std::string, AssetType>& types, bool include_fits) {
    json metrics = {{"annual_return_pct", 100.0 * report.metrics.annual_return},
                    {"risk_pct", 100.0 * report.metrics.risk},
                    {"return_risk", report.metrics.return_risk ? json(*report.metrics.return_risk) : json(nullptr)},
                    {"max_drawdown_pct", 100.0 * report.max_drawdown},
                    {"periods", report.returns.size()},
                    {"rebalances", report.rebalances.size()}};

    const AverageWeights avg = average_weights(report.rebalances, report.assets, types);
    json avg_assets = json::object();
    for (std::size_t i = 0; i < avg.assets.size(); ++i) avg_assets[avg.assets[i]] = avg.per_asset(static_cast<Eigen::Index>(i));
    json avg_types = json::object();
    for (const auto& [name, value] : avg.per_type) avg_types[name] = value;

    std::size_t failed = 0, unconverged = 0;
    for (const auto& r : report.rebalances) {
        failed += r.failed ? 1 : 0;
        unconverged += r.converged ? 0 : 1;
    }

    json out = {{"strategy", to_string(report.strategy)},
                {"config", config_json(report.config)},
                {"assets", report.assets},
                {"metrics", metrics},
                {"average_weights", {{"assets", avg_assets}, {"types", avg_types}}},
                {"failed_rebalances", failed},
                {"unconverged_rebalances", unconverged},
                {"warnings", report.warnings}};

    if (include_fits) {
        json fits = json::array();
        for (const auto& r : report.rebalances) {
            if (!r.potential) continue;
            const auto& p = *r.potential;
            fits.push_back({{"date", r.date},
                            {"k", p.k},
                            {"x0", p.x0},
                            {"dx", p.dx},
                            {"grid_index", p.grid_index},
                            {"residual", p.residual},
                            {"degenerate", p.degenerate},
                            {"energies", vector_json(analytic_eigenbasis(p.k, p.grid_index.size()).energies())}});
        }
        out["potential_fits"] = std::move(fits);
    }
    return out;
}

void write_report_bundle(const std::filesystem::path& dir, const BacktestReport& report,
                         const std::map<std::string, AssetType>& types, bool include_fits) {
    std::filesystem::create_directories(dir);
    auto open = [&](const char* name) {
        std::ofstream f(dir / name, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write '" + (dir / name).string() + "'");
        return f;
    };
    {
        auto f = open("report.json");
        f << report_to_json(report, types, include_fits).dump(2) << '\n';
    }
    {
        auto f = open("returns.csv");
        f << "date,return\n";
        for (Eigen::Index t = 0; t < report.returns.size(); ++t)
            f << report.return_dates[static_cast<std::size_t>(t)] << ',' << format_number(report.returns(t)) << '\n';
    }
    {
        auto f = open("weights.csv");
        f << "date";
        for (const auto& a : report.assets) f << ',' << a;
        f << '\n';
        for (const auto& r : report.rebalances) {
            f << r.date;
            for (Eigen::Index i = 0; i < r.weights.size(); ++i) f << ',' << format_number(r.weights(i));
            f << '\n';
        }
    }
    {
        auto f = open("wealth.csv");
        const Eigen::VectorXd w = wealth_curve(report.returns, report.config.wealth_sum);
        f << "date,wealth\n";
        for (Eigen::Index t = 0; t < w.size(); ++t)
            f << report.return_dates[static_cast<std::size_t>(t)] << ',' << format_number(w(t)) << '\n';
    }
}

std::string format_summary_table(const std::vector<BacktestReport>& reports) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2);
    os << std::left << std::setw(12) << "" << std::right;
    for (const auto& r : reports) os << std::setw(10) << to_string(r.strategy);
    os << '\n';
    auto row = [&](const char* label, auto get) {
        os << std::left << std::setw(12) << label << std::right;
        for (const auto& r : reports) os << std::setw(10) << get(r);
        os << '\n';
    };
    row("AR [%]", [](const BacktestReport& r) { return 100.0 * r.metrics.annual_return; });
    row("RISK [%]", [](const BacktestReport& r) { return 100.0 * r.metrics.risk; });
    os << std::left << std::setw(12) << "R/R" << std::right;
    for (const auto& r : reports) {
        if (r.metrics.return_risk) os << std::setw(10) << *r.metrics.return_risk;
        else os << std::setw(10) << "n/a";
    }
    os << '\n';
    // Drawdowns shown as positive magnitudes, as in the usual tables.
    row("MaxDD [%]", [](const BacktestReport& r) { return r.max_drawdown == 0.0 ? 0.0 : -100.0 * r.max_drawdown; });
    return os.str();
}

void write_summary_csv(std::ostream& out, const std::vector<BacktestReport>& reports) {
    out << "strategy,ar,risk,rr,maxdd\n";
    for (const auto& r : reports) {
        out << to_string(r.strategy) << ',' << format_number(r.metrics.annual_return) << ',' << format_number(r.metrics.risk) << ','
            << (r.metrics.return_risk ? format_number(*r.metrics.return_risk) : std::string()) << ',' << format_number(r.max_drawdown)
            << '\n';
    }
}

}  // namespace riskwave
