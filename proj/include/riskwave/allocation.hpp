#pragma once

#include "riskwave/market_data.hpp"
#include "riskwave/numerics.hpp"
#include "riskwave/schrodinger.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace riskwave {

enum class FactorMethod { PCA, HPCA, SPCA };

std::string to_string(FactorMethod method);

/// Factor loadings and scales shared by the PCA, HPCA and SPCA constructions.
/// Exposures are w~ = loadings * w; factor l carries risk scale_l |w~_l|^2.
/// Loadings are complex only for HPCA; the real methods store a zero
/// imaginary part.
struct FactorModel {
    FactorMethod method = FactorMethod::PCA;
    Eigen::MatrixXcd loadings;  // L x N
    Eigen::VectorXd scales;     // L, all > 0
    std::vector<std::string> warnings;
    std::optional<PotentialFit> potential;  // set for SPCA

    Eigen::Index factors() const noexcept { return loadings.rows(); }
    Eigen::Index assets() const noexcept { return loadings.cols(); }
};

/// Scales at or below this are treated as zero and their factors dropped.
inline constexpr double kScaleFloor = 1e-12;

/// Builds a FactorModel from explicit loadings/scales, dropping factors whose
/// scale is <= kScaleFloor (with a warning).
FactorModel make_factor_model(FactorMethod method, const Eigen::MatrixXcd& loadings, const Eigen::VectorXd& scales);

/// Principal components of the sample covariance; top-L eigenvectors as
/// loading rows, eigenvalues as scales. `factors` == 0 means L = N.
FactorModel model_pca(const ReturnPanel& window, std::size_t factors = 0, double diagonal_loading = 0.0);

/// Principal components of the Hermitian covariance of the analytic signal
/// of each demeaned column. Loading rows are the conjugated eigenvectors.
FactorModel model_hpca(const ReturnPanel& window, std::size_t factors = 0, double diagonal_loading = 0.0);

/// Schrödinger construction: sample variances -> harmonic potential fit ->
/// oscillator eigenbasis -> Psi sampled at the asset coordinates. Loadings
/// are Psi and scales the energies. A degenerate fit falls back to PCA and
/// the fallback is recorded in `warnings`.
FactorModel model_spca(const ReturnPanel& window, std::size_t factors = 0);

FactorModel build_model(FactorMethod method, const ReturnPanel& window, std::size_t factors = 0,
                        double diagonal_loading = 0.0);

/// v_l = scale_l |w~_l|^2 / sum_m scale_m |w~_m|^2. Throws when the
/// denominator vanishes.
Eigen::VectorXd risk_contributions(const FactorModel& model, const Eigen::VectorXd& weights);

/// Shannon entropy -sum v log v (natural log, 0 log 0 = 0).
double entropy(const Eigen::VectorXd& contributions);

/// Entropy of the risk contributions and its gradient with respect to w.
struct EntropyValue {
    double value = 0.0;
    Eigen::VectorXd gradient;
};

EntropyValue entropy_with_gradient(const FactorModel& model, const Eigen::VectorXd& weights);

struct OptimizerOptions {
    int restarts = 16;  // including the equal-weight start
    std::uint64_t seed = 0;
    double tolerance = 1e-8;  // gradient-norm stopping rule
    int max_iterations = 5000;  // per start
    bool long_only = true;
};

struct OptimizationResult {
    Eigen::VectorXd weights;
    double entropy = 0.0;
    bool converged = false;
    int best_start = 0;  // 0 is the equal-weight start
    int iterations = 0;  // of the winning start
};

/// Maximizes the entropy of the factor risk contributions over the weight
/// simplex (long-only) or over {sum w = 1, -1 <= w <= 1} (allow-short).
///
/// Long-only runs BFGS on an unconstrained softmax parameterization; the
/// short-selling variant uses projected gradient ascent. Every start is
/// monotone, the equal-weight portfolio is always the first start, and the
/// best start wins with ties resolved towards the lower start index.
OptimizationResult maximize_entropy(const FactorModel& model, const OptimizerOptions& options = {});

/// 1/N each. Throws for N < 1.
Eigen::VectorXd equal_weights(Eigen::Index n);

/// Neumaier-compensated sum.
double compensated_sum(const Eigen::VectorXd& values);

}  // namespace riskwave
