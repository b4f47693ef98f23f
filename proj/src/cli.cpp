#include "riskwave/cli.hpp"

#include "riskwave/report.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace riskwave::cli {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

bool parse_bool(const std::string& key, const std::string& value) {
    std::string v = value;
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw std::invalid_argument("setting '" + key + "': expected a boolean, got '" + value + "'");
}

template <typename T>
T parse_integer(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    long long parsed = 0;
    try {
        parsed = std::stoll(value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != value.size()) throw std::invalid_argument("setting '" + key + "': expected an integer, got '" + value + "'");
    if constexpr (std::is_unsigned_v<T>) {
        if (parsed < 0) throw std::invalid_argument("setting '" + key + "': must be nonnegative");
    }
    return static_cast<T>(parsed);
}

double parse_real(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    double parsed = 0.0;
    try {
        parsed = std::stod(value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != value.size()) throw std::invalid_argument("setting '" + key + "': expected a number, got '" + value + "'");
    return parsed;
}

}  // namespace

std::vector<Strategy> parse_strategy_list(const std::string& text) {
    std::vector<Strategy> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        const Strategy s = parse_strategy(item);
        if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
    }
    if (out.empty()) throw std::invalid_argument("strategy list is empty");
    return out;
}

void apply_setting(const std::string& raw_key, const std::string& raw_value, RunConfig& c) {
    std::string key = trim(raw_key);
    std::replace(key.begin(), key.end(), '-', '_');
    const std::string value = trim(raw_value);
    if (key == "input") c.input = value;
    else if (key == "kind") c.kind = parse_series_kind(value);
    else if (key == "strategies") c.strategies = parse_strategy_list(value);
    else if (key == "window") c.window = parse_integer<Eigen::Index>(key, value);
    else if (key == "rebalance") c.rebalance = parse_integer<Eigen::Index>(key, value);
    else if (key == "factors") c.factors = parse_integer<std::size_t>(key, value);
    else if (key == "restarts") c.restarts = parse_integer<int>(key, value);
    else if (key == "seed") c.seed = parse_integer<std::uint64_t>(key, value);
    else if (key == "tolerance") c.tolerance = parse_real(key, value);
    else if (key == "max_iterations") c.max_iterations = parse_integer<int>(key, value);
    else if (key == "diagonal_loading") c.diagonal_loading = parse_real(key, value);
    else if (key == "out") c.out = value;
    else if (key == "types") c.types = value;
    else if (key == "spec") c.spec = value;
    else if (key == "periods") c.periods = parse_integer<Eigen::Index>(key, value);
    else if (key == "long_only") c.long_only = parse_bool(key, value);
    else if (key == "allow_short") c.long_only = !parse_bool(key, value);
    else if (key == "excess_kurtosis") c.excess_kurtosis = parse_bool(key, value);
    else if (key == "wealth_sum") c.wealth_sum = parse_bool(key, value);
    else if (key == "dump_fits") c.dump_fits = parse_bool(key, value);
    else if (key == "threads") c.threads = parse_integer<unsigned>(key, value);
    else throw std::invalid_argument("unknown setting '" + raw_key + "'");
}

void apply_config_file(const std::filesystem::path& path, RunConfig& config) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file '" + path.string() + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    const std::string body = trim(text);
    if (!body.empty() && body.front() == '{') {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(body);
        } catch (const nlohmann::json::exception& e) {
            throw std::invalid_argument(path.string() + ": " + e.what());
        }
        for (const auto& [key, value] : j.items()) {
            if (value.is_string()) apply_setting(key, value.get<std::string>(), config);
            else if (value.is_array()) {
                std::string joined;
                for (const auto& v : value) joined += (joined.empty() ? "" : ",") + v.get<std::string>();
                apply_setting(key, joined, config);
            } else if (value.is_number_integer() || value.is_number_unsigned()) {
                apply_setting(key, std::to_string(value.get<long long>()), config);
            } else if (value.is_number_float()) {
                apply_setting(key, format_number(value.get<double>()), config);
            } else {
                apply_setting(key, value.dump(), config);
            }
        }
        return;
    }
    std::istringstream lines(text);
    std::string line;
    int number = 0;
    while (std::getline(lines, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(path.string() + ":" + std::to_string(number) + ": expected key = value");
        apply_setting(line.substr(0, eq), line.substr(eq + 1), config);
    }
}

namespace {

BacktestConfig backtest_config(const RunConfig& c, Strategy strategy) {
    BacktestConfig b;
    b.window = c.window;
    b.rebalance = c.rebalance;
    b.strategy = strategy;
    b.factors = c.factors;
    b.diagonal_loading = c.diagonal_loading;
    b.wealth_sum = c.wealth_sum;
    b.threads = c.threads;
    b.optimizer.restarts = c.restarts;
    b.optimizer.seed = c.seed;
    b.optimizer.tolerance = c.tolerance;
    b.optimizer.max_iterations = c.max_iterations;
    b.optimizer.long_only = c.long_only;
    return b;
}

void check_output_dir(const std::filesystem::path& dir) {
    if (!dir.empty() && std::filesystem::exists(dir) && !std::filesystem::is_directory(dir))
        throw std::invalid_argument("output path '" + dir.string() + "' exists and is not a directory");
}

void prepare_output_dir(const std::filesystem::path& dir) {
    if (dir.empty()) return;
    check_output_dir(dir);
    std::filesystem::create_directories(dir);
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
    return f;
}

LoadedPanel load_input(const RunConfig& c) {
    if (c.input.empty()) throw std::invalid_argument("--input is required");
    if (!std::filesystem::exists(c.input)) throw std::invalid_argument("input file '" + c.input.string() + "' does not exist");
    return load_panel(c.input, c.kind);
}

int cmd_stats(const RunConfig& c, std::ostream& out, std::ostream& err) {
    const LoadedPanel loaded = load_input(c);
    const DescriptiveStats stats = describe(loaded.panel, c.excess_kurtosis);
    if (loaded.dropped_rows > 0) err << "dropped " << loaded.dropped_rows << " row(s) with missing or invalid cells\n";
    if (c.out.empty()) {
        write_stats_csv(out, stats);
        return 0;
    }
    prepare_output_dir(c.out);
    auto f = open_output(c.out / "stats.csv");
    write_stats_csv(f, stats);
    out << "wrote " << (c.out / "stats.csv").string() << '\n';
    return 0;
}

int cmd_synth(const RunConfig& c, bool explicit_seed, std::ostream& out) {
    if (c.spec.empty()) throw std::invalid_argument("--spec is required");
    SynthDescription d = load_synth_description(c.spec);
    if (explicit_seed) d.spec.seed = c.seed;
    if (c.periods > 0) d.spec.periods = c.periods;
    const ReturnPanel panel = synthesize(d.spec);
    if (c.out.empty()) {
        write_panel_csv(out, panel);
        return 0;
    }
    prepare_output_dir(c.out);
    {
        auto f = open_output(c.out / "returns.csv");
        write_panel_csv(f, panel);
    }
    if (!d.types.empty()) {
        auto f = open_output(c.out / "types.csv");
        write_asset_types(f, panel.assets(), d.types);
    }
    out << "wrote " << (c.out / "returns.csv").string() << " (" << panel.periods() << " periods, " << panel.num_assets()
        << " assets)\n";
    return 0;
}

int cmd_backtest(const RunConfig& c, std::ostream& out, std::ostream& err) {
    const LoadedPanel loaded = load_input(c);
    const ReturnPanel& panel = loaded.panel;
    std::map<std::string, AssetType> types;
    if (!c.types.empty()) {
        types = read_asset_types(c.types);
        for (const auto& a : panel.assets()) {
            if (!types.count(a)) throw std::invalid_argument("asset '" + a + "' has no entry in " + c.types.string());
        }
    }
    if (c.factors > static_cast<std::size_t>(panel.num_assets()))
        throw std::invalid_argument("--factors " + std::to_string(c.factors) + " exceeds the number of assets");
    std::vector<BacktestConfig> configs;
    for (const Strategy s : c.strategies) {
        configs.push_back(backtest_config(c, s));
        validate(configs.back(), panel.periods());
    }
    check_output_dir(c.out);
    if (loaded.dropped_rows > 0) err << "dropped " << loaded.dropped_rows << " row(s) with missing or invalid cells\n";

    std::vector<BacktestReport> reports;
    for (const auto& cfg : configs) reports.push_back(run_backtest(panel, cfg));

    if (!c.out.empty()) {
        prepare_output_dir(c.out);
        for (const auto& r : reports) write_report_bundle(c.out / to_string(r.strategy), r, types, c.dump_fits);
        auto f = open_output(c.out / "summary.csv");
        write_summary_csv(f, reports);
    }
    out << format_summary_table(reports);
    for (const auto& r : reports) {
        if (!r.warnings.empty()) err << to_string(r.strategy) << ": " << r.warnings.size() << " warning(s); see report.json\n";
    }
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Maximum-entropy factor-risk allocation: descriptive statistics, synthetic data and rolling backtests"};
    app.require_subcommand(1);

    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;
    std::vector<std::pair<std::string, CLI::Option*>> flags;
    std::string config_path;

    auto add_value = [&](CLI::App* sub, const std::string& key, const std::string& flag, const std::string& help) {
        options[sub->get_name() + ":" + key] = sub->add_option(flag, values[sub->get_name() + ":" + key], help);
    };
    auto add_flag = [&](CLI::App* sub, const std::string& key, const std::string& flag, const std::string& help) {
        flags.emplace_back(sub->get_name() + ":" + key, sub->add_flag(flag, help));
    };

    auto* stats = app.add_subcommand("stats", "Per-asset mean, std, skewness and kurtosis as CSV");
    auto* backtest = app.add_subcommand("backtest", "Rolling-window backtest of one or more strategies");
    auto* synth = app.add_subcommand("synth", "Generate a synthetic Gaussian return panel");

    for (auto* sub : {stats, backtest, synth}) {
        sub->add_option("--config", config_path, "Config file (key = value lines or a JSON object)");
        add_value(sub, "out", "--out", "Output directory");
        add_value(sub, "seed", "--seed", "Random seed");
    }
    for (auto* sub : {stats, backtest}) {
        add_value(sub, "input", "--input", "Input CSV (first column date, one column per asset)");
        add_value(sub, "kind", "--kind", "prices or returns");
    }
    add_flag(stats, "excess_kurtosis", "--excess-kurtosis", "Report kurtosis minus 3");

    add_value(backtest, "strategies", "--strategies", "Comma-separated subset of EW,PCA,HPCA,SPCA");
    add_value(backtest, "window", "--window", "Estimation window in periods (default 250)");
    add_value(backtest, "rebalance", "--rebalance", "Rebalance interval in periods (default 20)");
    add_value(backtest, "factors", "--factors", "Number of retained factors L (default N)");
    add_value(backtest, "restarts", "--restarts", "Optimizer starts including equal weights (default 16)");
    add_value(backtest, "tolerance", "--tolerance", "Gradient-norm tolerance (default 1e-8)");
    add_value(backtest, "max_iterations", "--max-iterations", "Iterations per start (default 5000)");
    add_value(backtest, "diagonal_loading", "--diagonal-loading", "Add eps * I to window covariances");
    add_value(backtest, "types", "--types", "CSV of asset,type (Bond|Equity) for type-level average weights");
    add_value(backtest, "threads", "--threads", "Worker threads for rebalance fits (default: all cores)");
    add_flag(backtest, "long_only", "--long-only", "Constrain weights to the simplex (default)");
    add_flag(backtest, "allow_short", "--allow-short", "Allow negative weights in [-1, 1] with sum 1");
    add_flag(backtest, "wealth_sum", "--wealth-sum", "MaxDD on the literal sum of (1 + R_t) instead of compounded wealth");
    add_flag(backtest, "dump_fits", "--dump-fits", "Include per-rebalance potential fits in the SPCA report");

    add_value(synth, "spec", "--spec", "Synthesis spec (JSON)");
    add_value(synth, "periods", "--periods", "Override the number of periods");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    CLI::App* active = stats->parsed() ? stats : backtest->parsed() ? backtest : synth;
    const std::string prefix = active->get_name() + ":";
    RunConfig config;
    bool explicit_seed = false;
    try {
        if (!config_path.empty()) {
            RunConfig probe;
            probe.seed = 0xFFFF'FFFF'FFFF'FFFFull;
            apply_config_file(config_path, probe);
            explicit_seed = probe.seed != 0xFFFF'FFFF'FFFF'FFFFull;
            apply_config_file(config_path, config);
        }
        for (const auto& [key, opt] : options) {
            if (key.rfind(prefix, 0) == 0 && opt->count() > 0) {
                const std::string name = key.substr(prefix.size());
                apply_setting(name, values[key], config);
                if (name == "seed") explicit_seed = true;
            }
        }
        for (const auto& [key, opt] : flags) {
            if (key.rfind(prefix, 0) == 0 && opt->count() > 0) apply_setting(key.substr(prefix.size()), "true", config);
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        if (active == stats) return cmd_stats(config, out, err);
        if (active == backtest) return cmd_backtest(config, out, err);
        return cmd_synth(config, explicit_seed, out);
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace riskwave::cli
