#pragma once

// Brute-force reference computations used only by the tests. Nothing here
// calls into the library's numerical paths.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

namespace oracle {

struct GridFit {
    double k;
    double x0;
    double rms;
};

// Dense two-level grid search over (k, x0) for the sorted variances placed
// at x0 + j. No closed form for k is used.
inline GridFit potential_grid_search(std::vector<double> variances, double k_max, double x0_max) {
    std::sort(variances.begin(), variances.end());
    auto rms = [&](double k, double x0) {
        double ss = 0.0;
        for (std::size_t j = 0; j < variances.size(); ++j) {
            const double x = x0 + static_cast<double>(j);
            const double r = 0.5 * k * x * x - variances[j];
            ss += r * r;
        }
        return std::sqrt(ss / static_cast<double>(variances.size()));
    };
    GridFit best{0.0, 0.0, std::numeric_limits<double>::infinity()};
    auto scan = [&](double k_lo, double k_hi, double x_lo, double x_hi, int steps) {
        GridFit local = best;
        for (int a = 0; a <= steps; ++a) {
            const double k = k_lo + (k_hi - k_lo) * a / steps;
            if (k <= 0.0) continue;
            for (int b = 0; b <= steps; ++b) {
                const double x0 = x_lo + (x_hi - x_lo) * b / steps;
                if (x0 < 0.0) continue;
                const double r = rms(k, x0);
                if (r < local.rms) local = {k, x0, r};
            }
        }
        best = local;
    };
    scan(0.0, k_max, 0.0, x0_max, 400);
    double dk = k_max / 400.0, dx = x0_max / 400.0;
    for (int level = 0; level < 4; ++level) {
        scan(best.k - 2 * dk, best.k + 2 * dk, best.x0 - 2 * dx, best.x0 + 2 * dx, 200);
        dk *= 4.0 / 200.0;
        dx *= 4.0 / 200.0;
    }
    return best;
}

// Entropy of v_l = s_l (w . e_l)^2 / sum, for real loadings given as rows.
inline double contribution_entropy(const std::vector<std::vector<double>>& loadings, const std::vector<double>& scales,
                                   const std::vector<double>& w) {
    std::vector<double> u(scales.size());
    double total = 0.0;
    for (std::size_t l = 0; l < scales.size(); ++l) {
        double e = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) e += loadings[l][i] * w[i];
        u[l] = scales[l] * e * e;
        total += u[l];
    }
    double h = 0.0;
    for (double x : u) {
        const double v = x / total;
        if (v > 0.0) h -= v * std::log(v);
    }
    return h;
}

// Argmax of f over the 1-simplex {(w, 1-w)} on a uniform grid.
inline double simplex2_argmax(const std::function<double(double)>& f, int steps) {
    double best_w = 0.0, best = -std::numeric_limits<double>::infinity();
    for (int i = 1; i < steps; ++i) {
        const double w = static_cast<double>(i) / steps;
        const double v = f(w);
        if (v > best) {
            best = v;
            best_w = w;
        }
    }
    return best_w;
}

// H_n(y) = n! sum_m (-1)^m (2y)^(n-2m) / (m! (n-2m)!), evaluated in long double.
inline long double hermite_explicit(int n, long double y) {
    long double sum = 0.0L;
    for (int m = 0; 2 * m <= n; ++m) {
        const long double term = std::pow(-1.0L, m) * std::pow(2.0L * y, n - 2 * m) /
                                 (std::tgamma(static_cast<long double>(m + 1)) * std::tgamma(static_cast<long double>(n - 2 * m + 1)));
        sum += term;
    }
    return sum * std::tgamma(static_cast<long double>(n + 1));
}

// L2-normalized oscillator eigenfunction psi_n(x) for V = k x^2 / 2.
inline long double oscillator_state(int n, long double k, long double x) {
    const long double y = std::pow(k, 0.25L) * x;
    const long double norm = std::sqrt(std::pow(k, 0.25L) /
                                       (std::sqrt(std::numbers::pi_v<long double>) * std::pow(2.0L, n) *
                                        std::tgamma(static_cast<long double>(n + 1))));
    return norm * hermite_explicit(n, y) * std::exp(-std::sqrt(k) * x * x / 2.0L);
}

// O(n^2) forward DFT.
inline std::vector<std::complex<double>> naive_dft(const std::vector<std::complex<double>>& x) {
    const std::size_t n = x.size();
    std::vector<std::complex<double>> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<long double> acc = 0.0L;
        for (std::size_t j = 0; j < n; ++j) {
            const long double angle = -2.0L * std::numbers::pi_v<long double> * static_cast<long double>((j * k) % n) / n;
            acc += std::complex<long double>(x[j].real(), x[j].imag()) * std::polar(1.0L, angle);
        }
        out[k] = {static_cast<double>(acc.real()), static_cast<double>(acc.imag())};
    }
    return out;
}

}  // namespace oracle
