#include "riskwave/market_data.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace riskwave {

ReturnPanel::ReturnPanel(std::vector<std::string> dates, std::vector<std::string> assets, Eigen::MatrixXd values)
    : dates_(std::move(dates)), assets_(std::move(assets)), values_(std::move(values)) {
    if (static_cast<Eigen::Index>(dates_.size()) != values_.rows())
        throw std::invalid_argument("ReturnPanel: date count does not match row count");
    if (static_cast<Eigen::Index>(assets_.size()) != values_.cols())
        throw std::invalid_argument("ReturnPanel: asset count does not match column count");
    for (std::size_t t = 1; t < dates_.size(); ++t) {
        if (!(dates_[t - 1] < dates_[t]))
            throw std::invalid_argument("ReturnPanel: dates not strictly increasing at '" + dates_[t] + "'");
    }
    std::unordered_set<std::string> seen;
    for (const auto& a : assets_) {
        if (!seen.insert(a).second) throw std::invalid_argument("ReturnPanel: duplicate asset name '" + a + "'");
    }
    if (!values_.allFinite()) throw std::invalid_argument("ReturnPanel: non-finite value");
}

SeriesKind parse_series_kind(const std::string& text) {
    if (text == "prices") return SeriesKind::Prices;
    if (text == "returns") return SeriesKind::Returns;
    throw std::invalid_argument("unknown series kind '" + text + "' (expected prices or returns)");
}

namespace {

std::string trim(std::string_view s) {
    auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return std::string(s);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string::size_type start = 0;
    while (true) {
        auto pos = line.find(',', start);
        cells.push_back(trim(std::string_view(line).substr(start, pos == std::string::npos ? pos : pos - start)));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return cells;
}

std::optional<double> parse_number(const std::string& cell) {
    if (cell.empty()) return std::nullopt;
    double value = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec == std::errc::result_out_of_range && ptr == last) {
        // from_chars rejects subnormals; strtod rounds them.
        value = std::strtod(cell.c_str(), nullptr);
        ec = std::errc();
    }
    if (ec != std::errc() || ptr != last || !std::isfinite(value)) return std::nullopt;
    return value;
}

// YYYY-MM-DD, optionally followed by a time part.
bool looks_like_iso_date(const std::string& s) {
    if (s.size() < 10) return false;
    for (std::size_t i = 0; i < 10; ++i) {
        if (i == 4 || i == 7) {
            if (s[i] != '-') return false;
        } else if (s[i] < '0' || s[i] > '9') {
            return false;
        }
    }
    return s.size() == 10 || s[10] == 'T' || s[10] == ' ';
}

}  // namespace

LoadedPanel parse_panel(const std::string& csv_text, SeriesKind kind, const std::string& source) {
    std::istringstream in(csv_text);
    std::string line;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        if (!trim(line).empty()) {
            header = split_csv_line(line);
            break;
        }
    }
    if (header.size() < 2) throw std::invalid_argument(source + ": header must name a date column and at least one asset");
    std::vector<std::string> assets(header.begin() + 1, header.end());
    {
        std::unordered_set<std::string> seen;
        for (const auto& a : assets) {
            if (a.empty()) throw std::invalid_argument(source + ": empty asset name in header");
            if (!seen.insert(a).second) throw std::invalid_argument(source + ": duplicate asset name '" + a + "'");
        }
    }

    const std::size_t n = assets.size();
    std::vector<std::string> dates;
    std::vector<double> cells;
    std::size_t dropped = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto row = split_csv_line(line);
        bool ok = row.size() == n + 1 && looks_like_iso_date(row[0]);
        std::vector<double> parsed;
        parsed.reserve(n);
        for (std::size_t j = 1; ok && j < row.size(); ++j) {
            auto v = parse_number(row[j]);
            if (!v || (kind == SeriesKind::Prices && *v <= 0.0)) ok = false;
            else parsed.push_back(*v);
        }
        if (!ok) {
            ++dropped;
            continue;
        }
        if (!dates.empty() && !(dates.back() < row[0]))
            throw std::invalid_argument(source + ": dates not strictly increasing at '" + row[0] + "'");
        dates.push_back(row[0]);
        cells.insert(cells.end(), parsed.begin(), parsed.end());
    }

    const std::size_t usable = dates.size();
    const std::size_t min_rows = kind == SeriesKind::Prices ? 3 : 2;
    if (usable < min_rows)
        throw std::invalid_argument(source + ": fewer than 2 usable return rows (" + std::to_string(usable) + " usable data rows)");

    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> raw(
        cells.data(), static_cast<Eigen::Index>(usable), static_cast<Eigen::Index>(n));
    if (kind == SeriesKind::Returns) {
        return {ReturnPanel(std::move(dates), std::move(assets), Eigen::MatrixXd(raw)), dropped};
    }
    const auto rows = static_cast<Eigen::Index>(usable) - 1;
    Eigen::MatrixXd returns = (raw.bottomRows(rows).array() / raw.topRows(rows).array() - 1.0).matrix();
    dates.erase(dates.begin());
    return {ReturnPanel(std::move(dates), std::move(assets), std::move(returns)), dropped};
}

LoadedPanel load_panel(const std::filesystem::path& path, SeriesKind kind) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open input file '" + path.string() + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_panel(buffer.str(), kind, path.string());
}

DescriptiveStats describe(const ReturnPanel& panel, bool excess_kurtosis) {
    const Eigen::Index t = panel.periods();
    if (t < 4) throw std::invalid_argument("describe: need at least 4 periods, got " + std::to_string(t));
    const auto& r = panel.values();
    const double td = static_cast<double>(t);

    DescriptiveStats out;
    out.assets = panel.assets();
    const Eigen::MatrixXd shifted = r.rowwise() - r.row(0);
    const Eigen::RowVectorXd shifted_mean = shifted.colwise().mean();
    out.mean = (r.row(0) + shifted_mean).transpose();
    const Eigen::MatrixXd centered = shifted.rowwise() - shifted_mean;
    const Eigen::ArrayXd m2 = centered.array().square().colwise().sum().transpose() / td;
    const Eigen::ArrayXd m3 = centered.array().cube().colwise().sum().transpose() / td;
    const Eigen::ArrayXd m4 = centered.array().square().square().colwise().sum().transpose() / td;

    out.stddev = (m2 * td / (td - 1.0)).sqrt().matrix();
    out.skewness = (m3 / m2.pow(1.5)).matrix();
    out.kurtosis = (m4 / m2.square()).matrix();
    if (excess_kurtosis) out.kurtosis.array() -= 3.0;
    return out;
}

ReturnPanel window(const ReturnPanel& panel, Eigen::Index end_index, Eigen::Index length) {
    if (length < 1 || end_index < length || end_index > panel.periods()) {
        throw std::out_of_range("window: need 1 <= length <= end <= T (length=" + std::to_string(length) +
                                ", end=" + std::to_string(end_index) + ", T=" + std::to_string(panel.periods()) + ")");
    }
    const Eigen::Index begin = end_index - length;
    std::vector<std::string> dates(panel.dates().begin() + begin, panel.dates().begin() + end_index);
    return ReturnPanel(std::move(dates), panel.assets(), panel.values().middleRows(begin, length));
}

namespace {

std::vector<std::string> weekday_dates(const std::string& start, Eigen::Index count) {
    if (!looks_like_iso_date(start) || start.size() != 10)
        throw std::invalid_argument("synthesize: start date must be YYYY-MM-DD, got '" + start + "'");
    using namespace std::chrono;
    const int y = std::stoi(start.substr(0, 4));
    const unsigned m = static_cast<unsigned>(std::stoi(start.substr(5, 2)));
    const unsigned d = static_cast<unsigned>(std::stoi(start.substr(8, 2)));
    const year_month_day ymd{year{y}, month{m}, day{d}};
    if (!ymd.ok()) throw std::invalid_argument("synthesize: invalid start date '" + start + "'");
    sys_days day_point{ymd};

    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(count));
    while (static_cast<Eigen::Index>(out.size()) < count) {
        const unsigned wd = weekday{day_point}.c_encoding();
        if (wd != 0 && wd != 6) {
            const year_month_day cur{day_point};
            char buf[16];
            std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(cur.year()), static_cast<unsigned>(cur.month()),
                          static_cast<unsigned>(cur.day()));
            out.emplace_back(buf);
        }
        day_point += days{1};
    }
    return out;
}

}  // namespace

ReturnPanel synthesize(const SynthSpec& spec) {
    const Eigen::Index n = spec.volatilities.size();
    if (n < 1) throw std::invalid_argument("synthesize: need at least one asset");
    if (spec.correlation.rows() != n || spec.correlation.cols() != n)
        throw std::invalid_argument("synthesize: correlation matrix must be " + std::to_string(n) + "x" + std::to_string(n));
    if (spec.means.size() != 0 && spec.means.size() != n)
        throw std::invalid_argument("synthesize: means must be empty or one per asset");
    if (!spec.assets.empty() && static_cast<Eigen::Index>(spec.assets.size()) != n)
        throw std::invalid_argument("synthesize: asset names must match volatility count");
    if (spec.periods < 2) throw std::invalid_argument("synthesize: need at least 2 periods");
    if ((spec.volatilities.array() <= 0.0).any() || !spec.volatilities.allFinite())
        throw std::invalid_argument("synthesize: volatilities must be positive");
    if (!spec.correlation.allFinite() || !spec.correlation.isApprox(spec.correlation.transpose(), 1e-12))
        throw std::invalid_argument("synthesize: correlation matrix must be symmetric");

    Eigen::LLT<Eigen::MatrixXd> llt(spec.correlation);
    if (llt.info() != Eigen::Success || (llt.matrixL().toDenseMatrix().diagonal().array() <= 0.0).any())
        throw std::invalid_argument("synthesize: correlation matrix is not positive definite");
    const Eigen::MatrixXd chol = llt.matrixL();

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd z(spec.periods, n);
    for (Eigen::Index t = 0; t < spec.periods; ++t)
        for (Eigen::Index j = 0; j < n; ++j) z(t, j) = normal(rng);

    Eigen::MatrixXd values = (z * chol.transpose()) * spec.volatilities.asDiagonal();
    if (spec.means.size() == n) values.rowwise() += spec.means.transpose();

    std::vector<std::string> assets = spec.assets;
    if (assets.empty()) {
        for (Eigen::Index j = 0; j < n; ++j) assets.push_back("A" + std::to_string(j + 1));
    }
    return ReturnPanel(weekday_dates(spec.start_date, spec.periods), std::move(assets), std::move(values));
}

Eigen::MatrixXd cumulative_prices(const ReturnPanel& panel) {
    const auto& r = panel.values();
    Eigen::MatrixXd p(r.rows() + 1, r.cols());
    p.row(0).setOnes();
    for (Eigen::Index t = 0; t < r.rows(); ++t) p.row(t + 1) = p.row(t).array() * (1.0 + r.row(t).array());
    return p;
}

}  // namespace riskwave
