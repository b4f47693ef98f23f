#include "riskwave/schrodinger.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

namespace riskwave {

namespace {

struct ScaleFit {
    double k;
    double rms;
};

// Optimal k for a fixed origin and the RMS residual it leaves.
ScaleFit fit_scale(const std::vector<double>& sorted_variances, double x0) {
    double aa = 0.0, as = 0.0;
    for (std::size_t j = 0; j < sorted_variances.size(); ++j) {
        const double x = x0 + static_cast<double>(j);
        const double a = 0.5 * x * x;
        aa += a * a;
        as += a * sorted_variances[j];
    }
    const double k = as / aa;
    double ss = 0.0;
    for (std::size_t j = 0; j < sorted_variances.size(); ++j) {
        const double x = x0 + static_cast<double>(j);
        const double r = 0.5 * k * x * x - sorted_variances[j];
        ss += r * r;
    }
    return {k, std::sqrt(ss / static_cast<double>(sorted_variances.size()))};
}

}  // namespace

PotentialFit fit_harmonic_potential(const Eigen::VectorXd& variances) {
    const auto n = static_cast<std::size_t>(variances.size());
    if (n < 2) throw std::invalid_argument("fit_harmonic_potential: need at least 2 assets");
    if (!variances.allFinite() || (variances.array() <= 0.0).any())
        throw std::invalid_argument("fit_harmonic_potential: variances must be finite and positive");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return variances(static_cast<Eigen::Index>(a)) < variances(static_cast<Eigen::Index>(b)); });
    std::vector<double> sorted(n);
    for (std::size_t j = 0; j < n; ++j) sorted[j] = variances(static_cast<Eigen::Index>(order[j]));

    PotentialFit fit;
    fit.grid_index.assign(n, 0);
    for (std::size_t j = 0; j < n; ++j) fit.grid_index[order[j]] = j;
    fit.degenerate = sorted.back() - sorted.front() <= 1e-12 * sorted.back();

    const double upper = 10.0 * static_cast<double>(n);
    auto objective = [&](double x0) { return fit_scale(sorted, x0).rms; };

    constexpr int kScan = 400;
    const double step = upper / kScan;
    int best = 0;
    double best_value = objective(0.0);
    for (int i = 1; i <= kScan; ++i) {
        const double v = objective(step * i);
        if (v < best_value) {
            best_value = v;
            best = i;
        }
    }

    double lo = std::max(0.0, step * (best - 1));
    double hi = std::min(upper, step * (best + 1));
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = hi - inv_phi * (hi - lo);
    double d = lo + inv_phi * (hi - lo);
    double fc = objective(c);
    double fd = objective(d);
    for (int iter = 0; iter < 300 && hi - lo > 1e-15 * std::max(1.0, hi); ++iter) {
        if (fc <= fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = objective(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = objective(d);
        }
    }
    double x0 = fc <= fd ? c : d;
    if (objective(x0) > best_value) x0 = step * best;

    const ScaleFit s = fit_scale(sorted, x0);
    fit.k = s.k;
    fit.x0 = x0;
    fit.residual = s.rms;
    return fit;
}

double hermite(int l, double y) {
    if (l < 0 || l > kMaxHermiteOrder)
        throw std::out_of_range("hermite: order must be in [0, " + std::to_string(kMaxHermiteOrder) + "], got " +
                                std::to_string(l));
    if (l == 0) return 1.0;
    double prev = 1.0;
    double cur = 2.0 * y;
    for (int n = 1; n < l; ++n) {
        const double next = 2.0 * y * cur - 2.0 * n * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

EigenBasis::EigenBasis(Eigen::VectorXd energies, Evaluator evaluator, double lower, double upper)
    : energies_(std::move(energies)),
      evaluator_(std::make_shared<const Evaluator>(std::move(evaluator))),
      lower_(lower),
      upper_(upper) {
    if (energies_.size() == 0) throw std::invalid_argument("EigenBasis: need at least one level");
    if (!*evaluator_) throw std::invalid_argument("EigenBasis: empty evaluator");
    if (!(lower_ < upper_)) throw std::invalid_argument("EigenBasis: empty domain");
}

double EigenBasis::value(std::size_t level, double x) const {
    if (level >= levels()) throw std::out_of_range("EigenBasis: level " + std::to_string(level) + " out of range");
    return (*evaluator_)(level, x);
}

EigenBasis analytic_eigenbasis(double k, std::size_t levels) {
    if (levels < 1) throw std::invalid_argument("analytic_eigenbasis: need at least one level");
    if (!(k > 0.0) || !std::isfinite(k)) throw std::invalid_argument("analytic_eigenbasis: curvature k must be positive");

    const double sqrt_k = std::sqrt(k);
    const double y_scale = std::sqrt(sqrt_k);   // k^{1/4}
    const double amplitude = std::sqrt(y_scale);  // k^{1/8}
    Eigen::VectorXd energies(static_cast<Eigen::Index>(levels));
    for (std::size_t n = 0; n < levels; ++n) energies(static_cast<Eigen::Index>(n)) = sqrt_k * (static_cast<double>(n) + 0.5);

    // Normalized Hermite functions by their three-term recurrence, which
    // stays finite where H_n itself would overflow.
    auto evaluate = [y_scale, amplitude](std::size_t level, double x) {
        const double y = y_scale * x;
        double prev = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * y * y);
        if (level == 0) return amplitude * prev;
        double cur = std::numbers::sqrt2 * y * prev;
        for (std::size_t n = 1; n < level; ++n) {
            const double nd = static_cast<double>(n);
            const double next = std::sqrt(2.0 / (nd + 1.0)) * y * cur - std::sqrt(nd / (nd + 1.0)) * prev;
            prev = cur;
            cur = next;
        }
        return amplitude * cur;
    };
    return EigenBasis(std::move(energies), evaluate);
}

EigenBasis analytic_eigenbasis(const PotentialFit& fit, std::size_t levels) {
    if (fit.degenerate) throw std::invalid_argument("analytic_eigenbasis: potential fit is degenerate");
    return analytic_eigenbasis(fit.k, levels);
}

namespace {

// Number of eigenvalues of the symmetric tridiagonal (diag, off) below lambda.
std::size_t sturm_count(const std::vector<double>& diag, double off, double lambda) {
    std::size_t count = 0;
    double q = 1.0;
    const double off2 = off * off;
    for (std::size_t i = 0; i < diag.size(); ++i) {
        q = diag[i] - lambda - (i == 0 ? 0.0 : off2 / q);
        if (q == 0.0) q = -1e-300;
        if (q < 0.0) ++count;
    }
    return count;
}

// Solves (T - shift I) x = rhs for a symmetric tridiagonal T with constant
// off-diagonal, using Gaussian elimination with partial pivoting.
std::vector<double> solve_shifted(const std::vector<double>& diag, double off, double shift, std::vector<double> rhs) {
    const std::size_t n = diag.size();
    std::vector<double> d(n), du(n, 0.0), du2(n, 0.0), dl(n, off);
    for (std::size_t i = 0; i < n; ++i) d[i] = diag[i] - shift;
    for (std::size_t i = 0; i + 1 < n; ++i) du[i] = off;

    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (std::abs(d[i]) >= std::abs(dl[i])) {
            if (d[i] == 0.0) d[i] = 1e-300;
            const double f = dl[i] / d[i];
            d[i + 1] -= f * du[i];
            rhs[i + 1] -= f * rhs[i];
            dl[i] = 0.0;
        } else {
            const double f = d[i] / dl[i];
            d[i] = dl[i];
            const double tmp = d[i + 1];
            d[i + 1] = du[i] - f * tmp;
            du[i] = tmp;
            if (i + 2 < n) {
                du2[i] = du[i + 1];
                du[i + 1] = -f * du2[i];
            }
            std::swap(rhs[i], rhs[i + 1]);
            rhs[i + 1] -= f * rhs[i];
        }
    }
    if (d[n - 1] == 0.0) d[n - 1] = 1e-300;

    std::vector<double> x(n);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = rhs[ii];
        if (ii + 1 < n) s -= du[ii] * x[ii + 1];
        if (ii + 2 < n) s -= du2[ii] * x[ii + 2];
        x[ii] = s / d[ii];
    }
    return x;
}

}  // namespace

EigenBasis numeric_eigenbasis(const std::function<double(double)>& potential, double lower, double upper,
                              std::size_t grid_points, std::size_t levels) {
    if (grid_points < 64) throw std::invalid_argument("numeric_eigenbasis: need at least 64 grid points");
    if (levels < 1 || levels >= grid_points)
        throw std::invalid_argument("numeric_eigenbasis: levels must satisfy 1 <= L < grid points");
    if (!(lower < upper) || !std::isfinite(lower) || !std::isfinite(upper))
        throw std::invalid_argument("numeric_eigenbasis: domain must be a finite interval");

    const std::size_t m = grid_points;
    const double h = (upper - lower) / static_cast<double>(m + 1);
    const double kinetic = 1.0 / (h * h);
    const double off = -0.5 * kinetic;

    std::vector<double> diag(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double x = lower + static_cast<double>(i + 1) * h;
        const double v = potential(x);
        if (!std::isfinite(v))
            throw std::invalid_argument("numeric_eigenbasis: potential is not finite at x = " + std::to_string(x));
        diag[i] = kinetic + v;
    }

    const auto [min_it, max_it] = std::minmax_element(diag.begin(), diag.end());
    const double radius = 2.0 * std::abs(off);
    const double g_lo = *min_it - radius;
    const double g_hi = *max_it + radius;
    const double span = std::max(std::abs(g_lo), std::abs(g_hi));

    Eigen::VectorXd energies(static_cast<Eigen::Index>(levels));
    auto values = std::make_shared<std::vector<std::vector<double>>>(levels, std::vector<double>(m + 2, 0.0));
    std::vector<std::vector<double>> unit_vectors;

    for (std::size_t l = 0; l < levels; ++l) {
        // Bisection for the (l+1)-th smallest eigenvalue.
        double lo = g_lo, hi = g_hi;
        for (int iter = 0; iter < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * span; ++iter) {
            const double mid = 0.5 * (lo + hi);
            if (sturm_count(diag, off, mid) > l) hi = mid;
            else lo = mid;
        }
        const double lambda = 0.5 * (lo + hi);
        energies(static_cast<Eigen::Index>(l)) = lambda;

        // Inverse iteration from a deterministic start, re-orthogonalized
        // against lower levels.
        std::vector<double> vec(m);
        for (std::size_t i = 0; i < m; ++i) vec[i] = 1.0 + 0.5 * std::sin(0.7 * static_cast<double>(i) + 0.3 * static_cast<double>(l));
        const double shift = lambda + 4.0 * std::numeric_limits<double>::epsilon() * span;
        for (int iter = 0; iter < 4; ++iter) {
            vec = solve_shifted(diag, off, shift, std::move(vec));
            for (const auto& u : unit_vectors) {
                const double proj = std::inner_product(u.begin(), u.end(), vec.begin(), 0.0);
                for (std::size_t i = 0; i < m; ++i) vec[i] -= proj * u[i];
            }
            const double norm = std::sqrt(std::inner_product(vec.begin(), vec.end(), vec.begin(), 0.0));
            for (auto& x : vec) x /= norm;
        }

        const double peak = std::abs(*std::max_element(vec.begin(), vec.end(), [](double a, double b) { return std::abs(a) < std::abs(b); }));
        for (std::size_t i = m; i-- > 0;) {
            if (std::abs(vec[i]) > 1e-3 * peak) {
                if (vec[i] < 0.0)
                    for (auto& x : vec) x = -x;
                break;
            }
        }
        unit_vectors.push_back(vec);

        // Euclidean-unit vector -> trapezoid-unit wave function (ends are zero).
        auto& psi = (*values)[l];
        const double scale = 1.0 / std::sqrt(h);
        for (std::size_t i = 0; i < m; ++i) psi[i + 1] = vec[i] * scale;
    }

    auto evaluate = [values, lower, h, m](std::size_t level, double x) {
        const auto& psi = (*values)[level];
        const double pos = (x - lower) / h;
        if (pos <= 0.0 || pos >= static_cast<double>(m + 1)) return 0.0;
        const auto i = static_cast<std::size_t>(pos);
        const double frac = pos - static_cast<double>(i);
        return psi[i] + frac * (psi[i + 1] - psi[i]);
    };
    return EigenBasis(std::move(energies), evaluate, lower, upper);
}

EigenBasis numeric_eigenbasis(const PotentialFit& fit, std::size_t levels, std::size_t grid_points) {
    if (fit.degenerate || !(fit.k > 0.0)) throw std::invalid_argument("numeric_eigenbasis: potential fit is degenerate");
    double max_coord = 0.0;
    for (std::size_t i = 0; i < fit.grid_index.size(); ++i) max_coord = std::max(max_coord, std::abs(fit.coordinate(i)));
    const double sigma_x = std::pow(fit.k, -0.25);
    const double half_width = std::max(12.0 * sigma_x, max_coord + 2.0 * sigma_x);
    const double k = fit.k;
    return numeric_eigenbasis([k](double x) { return 0.5 * k * x * x; }, -half_width, half_width, grid_points, levels);
}

SampledBasis sample_basis(const EigenBasis& basis, const PotentialFit& fit) {
    const std::size_t n = fit.grid_index.size();
    const std::size_t levels = basis.levels();
    SampledBasis out{Eigen::MatrixXd(levels, n), Eigen::VectorXd(n), basis.energies()};
    for (std::size_t i = 0; i < n; ++i) {
        const double x = fit.coordinate(i);
        if (!basis.contains(x))
            throw std::out_of_range("sample_basis: asset coordinate " + std::to_string(x) + " lies outside the basis domain [" +
                                    std::to_string(basis.lower()) + ", " + std::to_string(basis.upper()) + "]");
        out.coordinates(static_cast<Eigen::Index>(i)) = x;
        for (std::size_t l = 0; l < levels; ++l)
            out.psi(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(i)) = basis.value(l, x);
    }
    if (!out.psi.allFinite()) throw std::runtime_error("sample_basis: non-finite basis value");
    return out;
}

Eigen::MatrixXd gram_matrix(const EigenBasis& basis, double lower, double upper, std::size_t points) {
    if (points < 2 || !(lower < upper)) throw std::invalid_argument("gram_matrix: need at least 2 points on a nonempty interval");
    const std::size_t levels = basis.levels();
    const double h = (upper - lower) / static_cast<double>(points - 1);
    Eigen::MatrixXd samples(static_cast<Eigen::Index>(points), static_cast<Eigen::Index>(levels));
    for (std::size_t p = 0; p < points; ++p) {
        const double x = p + 1 == points ? upper : lower + static_cast<double>(p) * h;
        for (std::size_t l = 0; l < levels; ++l)
            samples(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(l)) = basis.value(l, x);
    }
    Eigen::VectorXd weights = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(points), h);
    weights(0) = weights(static_cast<Eigen::Index>(points) - 1) = 0.5 * h;
    return samples.transpose() * weights.asDiagonal() * samples;
}

}  // namespace riskwave
