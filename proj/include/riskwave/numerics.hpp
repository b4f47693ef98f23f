#pragma once

#include "riskwave/market_data.hpp"

#include <Eigen/Dense>

#include <complex>
#include <span>
#include <stdexcept>
#include <vector>

namespace riskwave {

using cdouble = std::complex<double>;

/// Thrown when an iterative eigensolver exhausts its sweep budget.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double off_diagonal_norm)
        : std::runtime_error(what), off_norm_(off_diagonal_norm) {}
    double off_diagonal_norm() const noexcept { return off_norm_; }

private:
    double off_norm_;
};

/// Real symmetric matrix. Construction checks |a_ij - a_ji| <= 1e-12 max(1, |a_ij|)
/// and then stores the exactly symmetrized average.
class SymmetricMatrix {
public:
    explicit SymmetricMatrix(const Eigen::MatrixXd& a);

    const Eigen::MatrixXd& matrix() const noexcept { return a_; }
    Eigen::Index order() const noexcept { return a_.rows(); }

private:
    Eigen::MatrixXd a_;
};

/// Complex Hermitian matrix; the diagonal is stored exactly real.
class HermitianMatrix {
public:
    explicit HermitianMatrix(const Eigen::MatrixXcd& a);

    const Eigen::MatrixXcd& matrix() const noexcept { return a_; }
    Eigen::Index order() const noexcept { return a_.rows(); }

private:
    Eigen::MatrixXcd a_;
};

/// Eigenvalues in descending order, eigenvectors as orthonormal columns.
template <typename Scalar>
struct EigenDecomposition {
    Eigen::VectorXd values;
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> vectors;
};

using RealEigenDecomposition = EigenDecomposition<double>;
using ComplexEigenDecomposition = EigenDecomposition<cdouble>;

/// Sample covariance of the panel columns with the 1/(T-1) divisor.
/// `diagonal_loading` adds eps * I for near-singular windows.
SymmetricMatrix covariance(const ReturnPanel& panel, double diagonal_loading = 0.0);
SymmetricMatrix covariance(const Eigen::MatrixXd& observations, double diagonal_loading = 0.0);

/// Cyclic Jacobi eigendecomposition.
///
/// Sign convention: in each eigenvector the entry of largest magnitude is
/// positive (ties resolved by the lowest index). Throws ConvergenceError if
/// the off-diagonal norm does not reach round-off within `max_sweeps`.
RealEigenDecomposition eig_symmetric(const SymmetricMatrix& a, int max_sweeps = 100);

/// Hermitian eigendecomposition through the real 2N x 2N embedding
/// [[Re A, -Im A], [Im A, Re A]]. The largest-magnitude entry of every
/// eigenvector is made real and positive.
ComplexEigenDecomposition eig_hermitian(const HermitianMatrix& a, int max_sweeps = 100);

/// In-place discrete Fourier transform of any length. Powers of two use an
/// iterative radix-2 kernel; other lengths go through Bluestein's chirp-z
/// algorithm. The inverse transform includes the 1/n factor.
void fft(std::vector<cdouble>& data, bool inverse = false);

/// Discrete analytic signal x + i H[x] by the frequency-domain construction.
/// The real part equals the input exactly. Requires at least 8 samples.
std::vector<cdouble> analytic_signal(std::span<const double> x);

}  // namespace riskwave
