#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <vector>

namespace riskwave {

/// Harmonic potential V(x) = k x^2 / 2 fitted to asset variances.
///
/// Assets are placed on the grid x_j = x0 + j (unit spacing) in ascending
/// order of variance; `grid_index[i]` is the grid slot j of asset i.
struct PotentialFit {
    double k = 0.0;
    double x0 = 0.0;
    double dx = 1.0;
    std::vector<std::size_t> grid_index;
    double residual = 0.0;  // RMS of V(x_j(i)) - variance_i
    bool degenerate = false;  // all variances equal; k is not identified

    double coordinate(std::size_t asset) const { return x0 + dx * static_cast<double>(grid_index.at(asset)); }
    double potential(double x) const { return 0.5 * k * x * x; }
};

/// Fits (k, x0) by minimizing sum_j (k x_j^2 / 2 - s_(j))^2 over x0 >= 0 and
/// k > 0, where s_(j) are the variances sorted ascending (ties by index).
/// For fixed x0 the optimal k is closed-form; x0 is searched on [0, 10 N]
/// with a coarse scan refined by golden-section search.
PotentialFit fit_harmonic_potential(const Eigen::VectorXd& variances);

/// Physicists' Hermite polynomial H_l(y) via H_{l+1} = 2y H_l - 2l H_{l-1}.
/// Defined for l <= 64.
double hermite(int l, double y);

inline constexpr int kMaxHermiteOrder = 64;

/// Energies and eigenfunctions of a one-dimensional Schrödinger operator
/// -psi''/2 + V psi = E psi. Level l (1-based in the math, 0-based here)
/// has energy energies[l] and wave function value(l, x).
class EigenBasis {
public:
    using Evaluator = std::function<double(std::size_t level, double x)>;

    EigenBasis(Eigen::VectorXd energies, Evaluator evaluator,
               double lower = -std::numeric_limits<double>::infinity(),
               double upper = std::numeric_limits<double>::infinity());

    std::size_t levels() const noexcept { return static_cast<std::size_t>(energies_.size()); }
    const Eigen::VectorXd& energies() const noexcept { return energies_; }
    double value(std::size_t level, double x) const;

    /// Support of the basis; infinite for closed-form bases.
    double lower() const noexcept { return lower_; }
    double upper() const noexcept { return upper_; }
    bool contains(double x) const noexcept { return x >= lower_ && x <= upper_; }

private:
    Eigen::VectorXd energies_;
    std::shared_ptr<const Evaluator> evaluator_;
    double lower_;
    double upper_;
};

/// Closed-form harmonic-oscillator basis for V(x) = k x^2 / 2:
/// E_n = sqrt(k) (n + 1/2) and psi_n(x) = N_n H_n(k^{1/4} x) exp(-sqrt(k) x^2 / 2),
/// n = 0..levels-1, each L2-normalized on the real line.
EigenBasis analytic_eigenbasis(double k, std::size_t levels);
EigenBasis analytic_eigenbasis(const PotentialFit& fit, std::size_t levels);

/// Lowest `levels` eigenpairs of the central-difference discretization of
/// -psi''/2 + V psi on `grid_points` interior nodes of [lower, upper] with
/// Dirichlet ends. Eigenvalues come from Sturm-sequence bisection on the
/// tridiagonal matrix, eigenvectors from inverse iteration. Wave functions
/// are trapezoid-normalized and linearly interpolated between nodes; the
/// sign is chosen so the rightmost significant lobe is positive, matching
/// the analytic basis.
EigenBasis numeric_eigenbasis(const std::function<double(double)>& potential, double lower, double upper,
                              std::size_t grid_points, std::size_t levels);

/// Default numeric domain for a harmonic fit: [-12 k^{-1/4}, 12 k^{-1/4}].
EigenBasis numeric_eigenbasis(const PotentialFit& fit, std::size_t levels, std::size_t grid_points = 2000);

/// Psi(l, i) = psi_l(x of asset i), L x N.
struct SampledBasis {
    Eigen::MatrixXd psi;
    Eigen::VectorXd coordinates;
    Eigen::VectorXd energies;
};

SampledBasis sample_basis(const EigenBasis& basis, const PotentialFit& fit);

/// Trapezoid-rule Gram matrix G(l, m) = int psi_l psi_m dx on `points`
/// equally spaced nodes of [lower, upper] (endpoints included).
Eigen::MatrixXd gram_matrix(const EigenBasis& basis, double lower, double upper, std::size_t points);

}  // namespace riskwave
