#include "riskwave/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace riskwave {

std::string to_string(FactorMethod method) {
    switch (method) {
        case FactorMethod::PCA: return "PCA";
        case FactorMethod::HPCA: return "HPCA";
        case FactorMethod::SPCA: return "SPCA";
    }
    return "?";
}

FactorModel make_factor_model(FactorMethod method, const Eigen::MatrixXcd& loadings, const Eigen::VectorXd& scales) {
    if (loadings.rows() != scales.size())
        throw std::invalid_argument("make_factor_model: loadings rows must match the number of scales");
    if (loadings.rows() > loadings.cols())
        throw std::invalid_argument("make_factor_model: more factors than assets");
    if (!loadings.allFinite() || !scales.allFinite()) throw std::invalid_argument("make_factor_model: non-finite input");

    FactorModel model;
    model.method = method;
    std::vector<Eigen::Index> keep;
    for (Eigen::Index l = 0; l < scales.size(); ++l) {
        if (scales(l) > kScaleFloor) keep.push_back(l);
    }
    if (keep.size() != static_cast<std::size_t>(scales.size())) {
        model.warnings.push_back(to_string(method) + ": dropped " + std::to_string(scales.size() - static_cast<Eigen::Index>(keep.size())) +
                                 " factor(s) with scale <= 1e-12");
    }
    if (keep.empty()) throw std::invalid_argument("make_factor_model: every factor scale is zero");
    model.loadings.resize(static_cast<Eigen::Index>(keep.size()), loadings.cols());
    model.scales.resize(static_cast<Eigen::Index>(keep.size()));
    for (std::size_t r = 0; r < keep.size(); ++r) {
        model.loadings.row(static_cast<Eigen::Index>(r)) = loadings.row(keep[r]);
        model.scales(static_cast<Eigen::Index>(r)) = scales(keep[r]);
    }
    return model;
}

namespace {

std::size_t resolve_factors(std::size_t requested, Eigen::Index assets) {
    const auto n = static_cast<std::size_t>(assets);
    if (requested == 0) return n;
    if (requested > n)
        throw std::invalid_argument("factor count " + std::to_string(requested) + " exceeds the number of assets " + std::to_string(n));
    return requested;
}

void require_enough_history(const ReturnPanel& window) {
    if (window.periods() < window.num_assets())
        throw std::invalid_argument("factor model needs at least as many periods as assets (T=" + std::to_string(window.periods()) +
                                    ", N=" + std::to_string(window.num_assets()) + ")");
}

}  // namespace

FactorModel model_pca(const ReturnPanel& window, std::size_t factors, double diagonal_loading) {
    require_enough_history(window);
    const std::size_t l = resolve_factors(factors, window.num_assets());
    const auto eig = eig_symmetric(covariance(window, diagonal_loading));
    const auto rows = static_cast<Eigen::Index>(l);
    const Eigen::MatrixXcd loadings = eig.vectors.leftCols(rows).transpose().cast<cdouble>();
    return make_factor_model(FactorMethod::PCA, loadings, eig.values.head(rows));
}

FactorModel model_hpca(const ReturnPanel& window, std::size_t factors, double diagonal_loading) {
    require_enough_history(window);
    const std::size_t l = resolve_factors(factors, window.num_assets());
    const Eigen::Index t = window.periods();
    const Eigen::Index n = window.num_assets();

    // Demean first, then take the analytic signal of each column.
    const Eigen::MatrixXd shifted = window.values().rowwise() - window.values().row(0);
    const Eigen::MatrixXd centered = shifted.rowwise() - shifted.colwise().mean();
    Eigen::MatrixXcd z(t, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const Eigen::VectorXd col = centered.col(j);
        const auto as = analytic_signal(std::span<const double>(col.data(), static_cast<std::size_t>(t)));
        for (Eigen::Index r = 0; r < t; ++r) z(r, j) = as[static_cast<std::size_t>(r)];
    }
    Eigen::MatrixXcd c = (z.adjoint() * z) / static_cast<double>(t - 1);
    c.diagonal().array() += diagonal_loading;
    const auto eig = eig_hermitian(HermitianMatrix(c));
    const auto rows = static_cast<Eigen::Index>(l);
    const Eigen::MatrixXcd loadings = eig.vectors.leftCols(rows).adjoint();
    return make_factor_model(FactorMethod::HPCA, loadings, eig.values.head(rows));
}

FactorModel model_spca(const ReturnPanel& window, std::size_t factors) {
    require_enough_history(window);
    const std::size_t l = resolve_factors(factors, window.num_assets());
    const DescriptiveStats stats = describe(window);
    const Eigen::VectorXd variances = stats.stddev.array().square();
    PotentialFit fit = fit_harmonic_potential(variances);
    if (fit.degenerate) {
        FactorModel fallback = model_pca(window, factors);
        fallback.warnings.insert(fallback.warnings.begin(), "SPCA: degenerate potential fit (equal variances); fell back to PCA");
        fallback.potential = std::move(fit);
        return fallback;
    }
    const SampledBasis sampled = sample_basis(analytic_eigenbasis(fit, l), fit);
    FactorModel model = make_factor_model(FactorMethod::SPCA, sampled.psi.cast<cdouble>(), sampled.energies);
    model.potential = std::move(fit);
    return model;
}

FactorModel build_model(FactorMethod method, const ReturnPanel& window, std::size_t factors, double diagonal_loading) {
    switch (method) {
        case FactorMethod::PCA: return model_pca(window, factors, diagonal_loading);
        case FactorMethod::HPCA: return model_hpca(window, factors, diagonal_loading);
        case FactorMethod::SPCA: return model_spca(window, factors);
    }
    throw std::invalid_argument("build_model: unknown method");
}

namespace {

struct Exposure {
    Eigen::VectorXd risk;  // scale_l |w~_l|^2
    double total = 0.0;
};

Exposure factor_risk(const FactorModel& model, const Eigen::VectorXd& weights) {
    if (weights.size() != model.assets())
        throw std::invalid_argument("weights length " + std::to_string(weights.size()) + " does not match " +
                                    std::to_string(model.assets()) + " assets");
    const Eigen::VectorXcd exposure = model.loadings * weights.cast<cdouble>();
    Exposure out;
    out.risk = model.scales.array() * exposure.array().abs2();
    out.total = out.risk.sum();
    return out;
}

}  // namespace

Eigen::VectorXd risk_contributions(const FactorModel& model, const Eigen::VectorXd& weights) {
    const Exposure e = factor_risk(model, weights);
    if (!(e.total > 0.0) || !std::isfinite(e.total))
        throw std::domain_error("risk_contributions: weights carry no factor risk (zero denominator)");
    return e.risk / e.total;
}

double entropy(const Eigen::VectorXd& contributions) {
    double h = 0.0;
    for (Eigen::Index l = 0; l < contributions.size(); ++l) {
        const double v = contributions(l);
        if (v > 0.0) h -= v * std::log(v);
    }
    return h;
}

EntropyValue entropy_with_gradient(const FactorModel& model, const Eigen::VectorXd& weights) {
    const Eigen::MatrixXd re = model.loadings.real();
    const Eigen::MatrixXd im = model.loadings.imag();
    const Eigen::VectorXd a = re * weights;
    const Eigen::VectorXd b = im * weights;
    const Eigen::ArrayXd risk = model.scales.array() * (a.array().square() + b.array().square());
    const double total = risk.sum();
    if (!(total > 0.0) || !std::isfinite(total))
        throw std::domain_error("entropy_with_gradient: weights carry no factor risk (zero denominator)");
    const Eigen::ArrayXd v = risk / total;
    const double h = entropy(v.matrix());

    // dH/du_l = -(log v_l + H) / total, u_l = scale_l (a_l^2 + b_l^2).
    Eigen::ArrayXd du(v.size());
    for (Eigen::Index l = 0; l < v.size(); ++l) du(l) = v(l) > 0.0 ? -(std::log(v(l)) + h) / total : 0.0;
    const Eigen::VectorXd coeff = 2.0 * du * model.scales.array();
    EntropyValue out;
    out.value = h;
    out.gradient = re.transpose() * (coeff.array() * a.array()).matrix() + im.transpose() * (coeff.array() * b.array()).matrix();
    return out;
}

Eigen::VectorXd equal_weights(Eigen::Index n) {
    if (n < 1) throw std::invalid_argument("equal_weights: need at least one asset");
    return Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
}

double compensated_sum(const Eigen::VectorXd& values) {
    double sum = 0.0;
    double carry = 0.0;
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        const double x = values(i);
        const double t = sum + x;
        carry += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
        sum = t;
    }
    return sum + carry;
}

namespace {

Eigen::VectorXd softmax(const Eigen::VectorXd& z) {
    const Eigen::ArrayXd e = (z.array() - z.maxCoeff()).exp();
    return (e / e.sum()).matrix();
}

struct StartResult {
    Eigen::VectorXd weights;
    double entropy = -std::numeric_limits<double>::infinity();
    bool converged = false;
    int iterations = 0;
};

// Objective for minimization in softmax coordinates: f(z) = -H(softmax(z)).
struct SoftmaxObjective {
    const FactorModel& model;

    bool evaluate(const Eigen::VectorXd& z, double& f, Eigen::VectorXd& grad) const {
        const Eigen::VectorXd w = softmax(z);
        try {
            const EntropyValue e = entropy_with_gradient(model, w);
            f = -e.value;
            const double mean = w.dot(e.gradient);
            grad = -(w.array() * (e.gradient.array() - mean)).matrix();
            return std::isfinite(f) && grad.allFinite();
        } catch (const std::domain_error&) {
            return false;
        }
    }
};

StartResult run_softmax_bfgs(const FactorModel& model, Eigen::VectorXd z, const OptimizerOptions& opts) {
    const SoftmaxObjective objective{model};
    const Eigen::Index n = z.size();
    StartResult out;
    double f;
    Eigen::VectorXd g;
    if (!objective.evaluate(z, f, g)) return out;

    Eigen::MatrixXd inv_hessian = Eigen::MatrixXd::Identity(n, n);
    int iter = 0;
    for (; iter < opts.max_iterations; ++iter) {
        if (g.norm() <= opts.tolerance) {
            out.converged = true;
            break;
        }
        Eigen::VectorXd direction = -inv_hessian * g;
        if (direction.dot(g) >= 0.0) {
            inv_hessian.setIdentity();
            direction = -g;
        }
        double step = 1.0;
        double f_new = f;
        Eigen::VectorXd z_new, g_new;
        bool accepted = false;
        for (int halving = 0; halving < 60; ++halving, step *= 0.5) {
            z_new = z + step * direction;
            if (objective.evaluate(z_new, f_new, g_new) && f_new <= f + 1e-4 * step * direction.dot(g)) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            if (!inv_hessian.isIdentity()) {
                inv_hessian.setIdentity();
                continue;
            }
            break;  // line search failed along steepest descent
        }
        const Eigen::VectorXd s = z_new - z;
        const Eigen::VectorXd y = g_new - g;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            const double rho = 1.0 / sy;
            const Eigen::MatrixXd i_rsy = Eigen::MatrixXd::Identity(n, n) - rho * s * y.transpose();
            inv_hessian = i_rsy * inv_hessian * i_rsy.transpose() + rho * s * s.transpose();
        }
        const bool stalled = f - f_new <= 0.0 && s.norm() <= 1e-15 * (1.0 + z.norm());
        z = std::move(z_new);
        f = f_new;
        g = std::move(g_new);
        if (stalled) {
            out.converged = g.norm() <= std::sqrt(opts.tolerance);
            break;
        }
    }
    if (iter < opts.max_iterations && g.norm() <= opts.tolerance) out.converged = true;
    out.weights = softmax(z);
    out.entropy = -f;
    out.iterations = iter;
    return out;
}

// Euclidean projection onto {sum w = 1, -1 <= w_i <= 1}.
Eigen::VectorXd project_box_hyperplane(const Eigen::VectorXd& y) {
    auto total = [&](double tau) { return (y.array() - tau).cwiseMax(-1.0).cwiseMin(1.0).sum(); };
    double lo = y.minCoeff() - 2.0;  // total(lo) = N >= 1
    double hi = y.maxCoeff() + 2.0;  // total(hi) = -N < 1
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (total(mid) > 1.0) lo = mid;
        else hi = mid;
        if (hi - lo <= 1e-16 * std::max(1.0, std::abs(mid))) break;
    }
    Eigen::VectorXd w = (y.array() - 0.5 * (lo + hi)).cwiseMax(-1.0).cwiseMin(1.0).matrix();
    // Put the rounding residue on the freest coordinate.
    Eigen::Index free_index = 0;
    (1.0 - w.array().abs()).maxCoeff(&free_index);
    w(free_index) += 1.0 - compensated_sum(w);
    return w;
}

StartResult run_projected_gradient(const FactorModel& model, Eigen::VectorXd w, const OptimizerOptions& opts) {
    StartResult out;
    auto eval = [&](const Eigen::VectorXd& x, EntropyValue& e) {
        try {
            e = entropy_with_gradient(model, x);
            return std::isfinite(e.value) && e.gradient.allFinite();
        } catch (const std::domain_error&) {
            return false;
        }
    };
    EntropyValue cur;
    if (!eval(w, cur)) return out;
    double step = 1.0;
    int iter = 0;
    for (; iter < opts.max_iterations; ++iter) {
        const Eigen::VectorXd pg = project_box_hyperplane(w + cur.gradient) - w;
        if (pg.norm() <= opts.tolerance) {
            out.converged = true;
            break;
        }
        bool accepted = false;
        EntropyValue next;
        Eigen::VectorXd w_new;
        for (int halving = 0; halving < 60; ++halving, step *= 0.5) {
            w_new = project_box_hyperplane(w + step * cur.gradient);
            if (eval(w_new, next) && next.value >= cur.value + 1e-4 * cur.gradient.dot(w_new - w)) {
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
        const bool stalled = (w_new - w).norm() <= 1e-15;
        w = std::move(w_new);
        cur = std::move(next);
        step = std::min(step * 2.0, 1e6);
        if (stalled) break;
    }
    out.weights = std::move(w);
    out.entropy = cur.value;
    out.iterations = iter;
    return out;
}

}  // namespace

OptimizationResult maximize_entropy(const FactorModel& model, const OptimizerOptions& options) {
    const Eigen::Index n = model.assets();
    if (n < 1 || model.factors() < 1) throw std::invalid_argument("maximize_entropy: empty factor model");
    if (options.restarts < 1) throw std::invalid_argument("maximize_entropy: need at least one start");
    if (options.max_iterations < 1 || !(options.tolerance > 0.0))
        throw std::invalid_argument("maximize_entropy: invalid iteration budget or tolerance");

    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    auto dirichlet_log = [&]() {
        // log of unnormalized Dirichlet(1,...,1) draws: log of Exp(1) variates.
        Eigen::VectorXd z(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            double u = 0.0;
            while (u <= 0.0) u = uniform(rng);
            z(i) = std::log(-std::log(u));
        }
        return z;
    };

    OptimizationResult best;
    best.entropy = -std::numeric_limits<double>::infinity();
    bool have_best = false;
    for (int start = 0; start < options.restarts; ++start) {
        const Eigen::VectorXd z0 = start == 0 ? Eigen::VectorXd::Zero(n) : dirichlet_log();
        StartResult r = options.long_only ? run_softmax_bfgs(model, z0, options) : run_projected_gradient(model, softmax(z0), options);
        if (r.weights.size() == 0) continue;
        if (!have_best || r.entropy > best.entropy) {
            have_best = true;
            best.weights = std::move(r.weights);
            best.entropy = r.entropy;
            best.converged = r.converged;
            best.best_start = start;
            best.iterations = r.iterations;
        }
    }
    if (!have_best) {
        // Every start failed to evaluate; equal weights is still feasible.
        best.weights = equal_weights(n);
        best.entropy = -std::numeric_limits<double>::infinity();
        best.converged = false;
        return best;
    }
    if (options.long_only) {
        best.weights = best.weights.cwiseMax(0.0);
        best.weights /= compensated_sum(best.weights);
        best.entropy = entropy(risk_contributions(model, best.weights));
    }
    return best;
}

}  // namespace riskwave
