#include "riskwave/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace riskwave {

SymmetricMatrix::SymmetricMatrix(const Eigen::MatrixXd& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("SymmetricMatrix: matrix is not square");
    if (!a.allFinite()) throw std::invalid_argument("SymmetricMatrix: non-finite entry");
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < a.cols(); ++j) {
            if (std::abs(a(i, j) - a(j, i)) > 1e-12 * std::max(1.0, std::abs(a(i, j))))
                throw std::invalid_argument("SymmetricMatrix: asymmetric entry at (" + std::to_string(i) + "," +
                                            std::to_string(j) + ")");
        }
    }
    a_ = 0.5 * (a + a.transpose());
}

HermitianMatrix::HermitianMatrix(const Eigen::MatrixXcd& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("HermitianMatrix: matrix is not square");
    if (!a.allFinite()) throw std::invalid_argument("HermitianMatrix: non-finite entry");
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        if (std::abs(a(i, i).imag()) > 1e-12 * std::max(1.0, std::abs(a(i, i))))
            throw std::invalid_argument("HermitianMatrix: diagonal entry is not real");
        for (Eigen::Index j = i + 1; j < a.cols(); ++j) {
            if (std::abs(a(i, j) - std::conj(a(j, i))) > 1e-12 * std::max(1.0, std::abs(a(i, j))))
                throw std::invalid_argument("HermitianMatrix: entry (" + std::to_string(i) + "," + std::to_string(j) +
                                            ") is not the conjugate of its transpose");
        }
    }
    a_ = 0.5 * (a + a.adjoint());
    a_.diagonal() = a_.diagonal().real().cast<cdouble>();
}

SymmetricMatrix covariance(const Eigen::MatrixXd& observations, double diagonal_loading) {
    const Eigen::Index t = observations.rows();
    if (t < 2) throw std::invalid_argument("covariance: need at least 2 observations, got " + std::to_string(t));
    if (diagonal_loading < 0.0) throw std::invalid_argument("covariance: diagonal loading must be nonnegative");
    // Shifting by the first row first makes a constant column center to exact zeros.
    const Eigen::MatrixXd shifted = observations.rowwise() - observations.row(0);
    const Eigen::MatrixXd centered = shifted.rowwise() - shifted.colwise().mean();
    Eigen::MatrixXd c = (centered.transpose() * centered) / static_cast<double>(t - 1);
    c = 0.5 * (c + c.transpose()).eval();
    c.diagonal().array() += diagonal_loading;
    return SymmetricMatrix(c);
}

SymmetricMatrix covariance(const ReturnPanel& panel, double diagonal_loading) {
    return covariance(panel.values(), diagonal_loading);
}

namespace {

double off_diagonal_norm(const Eigen::MatrixXd& a) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < j; ++i) sum += a(i, j) * a(i, j);
    return std::sqrt(2.0 * sum);
}

// One Jacobi rotation zeroing a(p,q); updates both a and the accumulated
// eigenvector matrix v.
void rotate(Eigen::MatrixXd& a, Eigen::MatrixXd& v, Eigen::Index p, Eigen::Index q) {
    const double apq = a(p, q);
    const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
    double t;
    if (std::abs(theta) > 1e150) {
        t = 0.5 / theta;
    } else {
        t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        if (theta < 0.0) t = -t;
    }
    const double c = 1.0 / std::sqrt(t * t + 1.0);
    const double s = t * c;

    const Eigen::Index n = a.rows();
    for (Eigen::Index r = 0; r < n; ++r) {
        if (r == p || r == q) continue;
        const double arp = a(r, p);
        const double arq = a(r, q);
        a(r, p) = a(p, r) = c * arp - s * arq;
        a(r, q) = a(q, r) = c * arq + s * arp;
    }
    a(p, p) -= t * apq;
    a(q, q) += t * apq;
    a(p, q) = a(q, p) = 0.0;

    for (Eigen::Index r = 0; r < n; ++r) {
        const double vrp = v(r, p);
        const double vrq = v(r, q);
        v(r, p) = c * vrp - s * vrq;
        v(r, q) = s * vrp + c * vrq;
    }
}

// Raw cyclic Jacobi: returns unsorted eigenvalues and eigenvectors.
RealEigenDecomposition jacobi(Eigen::MatrixXd a, int max_sweeps) {
    const Eigen::Index n = a.rows();
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
    const double scale = a.norm();
    double off = off_diagonal_norm(a);
    int sweep = 0;
    while (off > 1e-15 * scale && off > 0.0) {
        if (sweep++ >= max_sweeps) {
            throw ConvergenceError("Jacobi eigensolver did not converge in " + std::to_string(max_sweeps) +
                                       " sweeps (off-diagonal norm " + std::to_string(off) + ")",
                                   off);
        }
        for (Eigen::Index p = 0; p + 1 < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                if (a(p, q) != 0.0) rotate(a, v, p, q);
            }
        }
        off = off_diagonal_norm(a);
    }
    return {a.diagonal(), std::move(v)};
}

template <typename Scalar>
Eigen::Index largest_magnitude_index(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& col) {
    Eigen::Index best = 0;
    double best_mag = -1.0;
    for (Eigen::Index i = 0; i < col.size(); ++i) {
        const double mag = std::abs(col(i));
        if (mag > best_mag) {
            best_mag = mag;
            best = i;
        }
    }
    return best;
}

std::vector<Eigen::Index> descending_order(const Eigen::VectorXd& values) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(values.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) { return values(x) > values(y); });
    return order;
}

}  // namespace

RealEigenDecomposition eig_symmetric(const SymmetricMatrix& a, int max_sweeps) {
    const Eigen::Index n = a.order();
    RealEigenDecomposition raw = jacobi(a.matrix(), max_sweeps);
    const auto order = descending_order(raw.values);

    RealEigenDecomposition out{Eigen::VectorXd(n), Eigen::MatrixXd(n, n)};
    for (Eigen::Index k = 0; k < n; ++k) {
        const Eigen::Index src = order[static_cast<std::size_t>(k)];
        out.values(k) = raw.values(src);
        Eigen::VectorXd col = raw.vectors.col(src);
        col.normalize();
        if (col(largest_magnitude_index<double>(col)) < 0.0) col = -col;
        out.vectors.col(k) = col;
    }
    return out;
}

ComplexEigenDecomposition eig_hermitian(const HermitianMatrix& a, int max_sweeps) {
    const Eigen::Index n = a.order();
    const Eigen::MatrixXd re = a.matrix().real();
    const Eigen::MatrixXd im = a.matrix().imag();
    Eigen::MatrixXd embedded(2 * n, 2 * n);
    embedded << re, -im, im, re;

    // Every eigenvalue of A appears twice in the embedding, with real
    // eigenvectors (u; v) and (-v; u) that both map to the complex direction
    // u + i v. Within each cluster of (near-)equal eigenvalues pick, greedily,
    // the embedded vector with the largest component outside the complex span
    // already accepted.
    const RealEigenDecomposition raw = jacobi(embedded, max_sweeps);
    const auto order = descending_order(raw.values);
    const double scale = std::max(raw.values.cwiseAbs().maxCoeff(), 1e-300);

    std::vector<Eigen::VectorXcd> accepted;
    accepted.reserve(static_cast<std::size_t>(n));
    std::size_t begin = 0;
    while (begin < order.size()) {
        std::size_t end = begin + 1;
        while (end < order.size() && raw.values(order[begin]) - raw.values(order[end]) <= 1e-9 * scale) ++end;
        const std::size_t cluster_size = end - begin;
        std::vector<Eigen::VectorXcd> candidates;
        for (std::size_t k = begin; k < end; ++k) {
            const Eigen::VectorXd col = raw.vectors.col(order[k]);
            Eigen::VectorXcd z(n);
            for (Eigen::Index i = 0; i < n; ++i) z(i) = cdouble(col(i), col(i + n));
            candidates.push_back(std::move(z));
        }
        const std::size_t want = std::max<std::size_t>(1, cluster_size / 2);
        for (std::size_t pick = 0; pick < want && accepted.size() < static_cast<std::size_t>(n); ++pick) {
            Eigen::VectorXcd best;
            double best_norm = -1.0;
            for (const auto& z : candidates) {
                Eigen::VectorXcd r = z;
                for (const auto& q : accepted) r -= q * q.dot(r);
                const double nr = r.norm();
                if (nr > best_norm) {
                    best_norm = nr;
                    best = std::move(r);
                }
            }
            for (const auto& q : accepted) best -= q * q.dot(best);  // second pass for orthogonality
            accepted.push_back(best / best.norm());
        }
        begin = end;
    }

    ComplexEigenDecomposition out{Eigen::VectorXd(n), Eigen::MatrixXcd(n, n)};
    Eigen::VectorXd rayleigh(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const auto& z = accepted[static_cast<std::size_t>(k)];
        rayleigh(k) = z.dot(a.matrix() * z).real();
    }
    const auto sorted = descending_order(rayleigh);
    for (Eigen::Index k = 0; k < n; ++k) {
        const Eigen::Index src = sorted[static_cast<std::size_t>(k)];
        Eigen::VectorXcd col = accepted[static_cast<std::size_t>(src)];
        const Eigen::Index pivot = largest_magnitude_index<cdouble>(col);
        col *= std::conj(col(pivot)) / std::abs(col(pivot));
        col(pivot) = std::abs(col(pivot));
        out.values(k) = rayleigh(src);
        out.vectors.col(k) = col;
    }
    return out;
}

namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void fft_radix2(std::vector<cdouble>& a, bool inverse) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double angle = 2.0 * std::numbers::pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < len / 2; ++k) {
                // Twiddles computed directly rather than by repeated
                // multiplication, which drifts for long transforms.
                const cdouble w = std::polar(1.0, angle * static_cast<double>(k));
                const cdouble u = a[i + k];
                const cdouble v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
            }
        }
    }
}

void fft_bluestein(std::vector<cdouble>& x) {
    const std::size_t n = x.size();
    std::size_t m = 1;
    while (m < 2 * n - 1) m <<= 1;

    // chirp_k = exp(-i pi k^2 / n), with k^2 reduced mod 2n to keep the angle small.
    std::vector<cdouble> chirp(n);
    const auto two_n = static_cast<unsigned long long>(2 * n);
    for (std::size_t k = 0; k < n; ++k) {
        const unsigned long long k2 = (static_cast<unsigned long long>(k) * k) % two_n;
        chirp[k] = std::polar(1.0, -std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n));
    }
    std::vector<cdouble> a(m, cdouble{}), b(m, cdouble{});
    for (std::size_t k = 0; k < n; ++k) a[k] = x[k] * chirp[k];
    b[0] = std::conj(chirp[0]);
    for (std::size_t k = 1; k < n; ++k) b[k] = b[m - k] = std::conj(chirp[k]);

    fft_radix2(a, false);
    fft_radix2(b, false);
    for (std::size_t k = 0; k < m; ++k) a[k] *= b[k];
    fft_radix2(a, true);
    const double inv_m = 1.0 / static_cast<double>(m);
    for (std::size_t k = 0; k < n; ++k) x[k] = a[k] * inv_m * chirp[k];
}

}  // namespace

void fft(std::vector<cdouble>& data, bool inverse) {
    const std::size_t n = data.size();
    if (n <= 1) return;
    if (inverse) {
        for (auto& z : data) z = std::conj(z);
    }
    if (is_power_of_two(n)) fft_radix2(data, false);
    else fft_bluestein(data);
    if (inverse) {
        const double inv_n = 1.0 / static_cast<double>(n);
        for (auto& z : data) z = std::conj(z) * inv_n;
    }
}

std::vector<cdouble> analytic_signal(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n < 8) throw std::invalid_argument("analytic_signal: need at least 8 samples, got " + std::to_string(n));
    std::vector<cdouble> spectrum(x.begin(), x.end());
    fft(spectrum);
    // Keep DC (and Nyquist for even n), double positive frequencies, zero negative ones.
    const std::size_t half = n / 2;
    const std::size_t last_positive = n % 2 == 0 ? half - 1 : half;
    for (std::size_t k = 1; k <= last_positive; ++k) spectrum[k] *= 2.0;
    for (std::size_t k = last_positive + 1 + (n % 2 == 0 ? 1 : 0); k < n; ++k) spectrum[k] = 0.0;
    fft(spectrum, true);
    for (std::size_t t = 0; t < n; ++t) spectrum[t].real(x[t]);
    return spectrum;
}

}  // namespace riskwave
