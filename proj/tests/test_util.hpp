#pragma once

#include "riskwave/market_data.hpp"

#include <Eigen/Dense>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace testutil {

// Unique scratch directory removed on scope exit.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("riskwave_" + tag + "_" + std::to_string(rd()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    f << text;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

inline std::vector<std::string> business_dates(std::size_t n) {
    std::vector<std::string> d;
    for (std::size_t i = 0; i < n; ++i) {
        // Strictly increasing ISO strings; 28-day months keep every date valid.
        char buf[64];
        std::snprintf(buf, sizeof buf, "%04zu-%02zu-%02zu", 2001 + i / 336, 1 + (i / 28) % 12, 1 + i % 28);
        d.emplace_back(buf);
    }
    return d;
}

inline riskwave::ReturnPanel make_panel(const Eigen::MatrixXd& values) {
    std::vector<std::string> assets;
    for (Eigen::Index j = 0; j < values.cols(); ++j) assets.push_back("A" + std::to_string(j));
    return riskwave::ReturnPanel(business_dates(static_cast<std::size_t>(values.rows())), assets, values);
}

inline Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = n(rng);
    return m;
}

}  // namespace testutil
