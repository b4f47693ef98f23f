#include "oracles.hpp"
#include "riskwave/allocation.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace riskwave;
using doctest::Approx;

namespace {

// T=4 window whose sample covariance is exactly diag(a^2, b^2).
ReturnPanel diagonal_window(double a, double b) {
    Eigen::MatrixXd x(4, 2);
    const double s = std::sqrt(0.75);
    x << a * s, b * s, a * s, -b * s, -a * s, b * s, -a * s, -b * s;
    return testutil::make_panel(x);
}

FactorModel real_model(FactorMethod method, const Eigen::MatrixXd& loadings, const Eigen::VectorXd& scales) {
    return make_factor_model(method, loadings.cast<cdouble>(), scales);
}

Eigen::VectorXd random_simplex_point(Eigen::Index n, std::mt19937_64& rng) {
    std::exponential_distribution<double> e(1.0);
    Eigen::VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i) w(i) = e(rng);
    return w / w.sum();
}

FactorModel random_model(int method, Eigen::Index n, std::mt19937_64& rng) {
    const auto panel = testutil::make_panel(testutil::gaussian_matrix(32, n, rng) * Eigen::VectorXd::LinSpaced(n, 0.5, 2.0).asDiagonal());
    return build_model(static_cast<FactorMethod>(method), panel);
}

}  // namespace

TEST_CASE("factor model construction drops zero scales") {
    const Eigen::Matrix2d id = Eigen::Matrix2d::Identity();
    const auto m = real_model(FactorMethod::PCA, id, Eigen::Vector2d(2.0, 1e-13));
    CHECK(m.factors() == 1);
    CHECK(m.warnings.size() == 1);
    CHECK_THROWS_AS(real_model(FactorMethod::PCA, id, Eigen::Vector2d(0.0, -1.0)), std::invalid_argument);
    CHECK_THROWS_AS(real_model(FactorMethod::PCA, Eigen::MatrixXd::Identity(3, 2), Eigen::Vector3d(1, 1, 1)), std::invalid_argument);
    CHECK(to_string(FactorMethod::HPCA) == "HPCA");
}

TEST_CASE("model_pca") {
    SUBCASE("diag(4,1)") {
        const auto m = model_pca(diagonal_window(2.0, 1.0));
        REQUIRE(m.factors() == 2);
        CHECK(m.scales(0) == Approx(4.0).epsilon(1e-12));
        CHECK(m.scales(1) == Approx(1.0).epsilon(1e-12));
        CHECK((m.loadings.cwiseAbs() - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(m.loadings.imag().isZero());
    }
    SUBCASE("duplicated columns leave one factor") {
        std::mt19937_64 rng(1);
        Eigen::MatrixXd x(30, 2);
        x.col(0) = testutil::gaussian_matrix(30, 1, rng);
        x.col(1) = x.col(0);
        const auto m = model_pca(testutil::make_panel(x));
        CHECK(m.factors() == 1);
        CHECK_FALSE(m.warnings.empty());
        CHECK(m.scales(0) == Approx(2.0 * covariance(x).matrix()(0, 0)));
    }
    SUBCASE("scales sum to the trace when L = N") {
        std::mt19937_64 rng(2);
        for (int trial = 0; trial < 10; ++trial) {
            const auto p = testutil::make_panel(testutil::gaussian_matrix(40, 5, rng));
            const auto m = model_pca(p);
            CHECK(m.scales.sum() == Approx(covariance(p).matrix().trace()).epsilon(1e-9));
        }
    }
    SUBCASE("factor count and history guards") {
        std::mt19937_64 rng(3);
        const auto p = testutil::make_panel(testutil::gaussian_matrix(40, 4, rng));
        CHECK(model_pca(p, 2).factors() == 2);
        CHECK_THROWS_AS(model_pca(p, 5), std::invalid_argument);
        CHECK_THROWS_AS(model_pca(testutil::make_panel(testutil::gaussian_matrix(3, 4, rng))), std::invalid_argument);
    }
}

TEST_CASE("model_hpca") {
    SUBCASE("eigenvalues are about twice the real PCA eigenvalues") {
        std::mt19937_64 rng(4);
        Eigen::MatrixXd mix(3, 3);
        mix << 1.0, 0.0, 0.0, 0.6, 2.0, 0.0, -0.3, 0.8, 4.0;
        const auto p = testutil::make_panel(testutil::gaussian_matrix(1000, 3, rng) * mix.transpose() + Eigen::MatrixXd::Constant(1000, 3, 0.05));
        const auto real = model_pca(p);
        const auto complex = model_hpca(p);
        REQUIRE(real.factors() == 3);
        REQUIRE(complex.factors() == 3);
        for (Eigen::Index l = 0; l < 3; ++l) CHECK(std::abs(complex.scales(l) / (2.0 * real.scales(l)) - 1.0) < 0.05);
    }
    SUBCASE("Hermitian covariance reconstructed from the model") {
        std::mt19937_64 rng(5);
        for (int trial = 0; trial < 20; ++trial) {
            const auto m = model_hpca(testutil::make_panel(testutil::gaussian_matrix(40, 4, rng)));
            const Eigen::MatrixXcd c = m.loadings.adjoint() * m.scales.cast<cdouble>().asDiagonal() * m.loadings;
            CHECK((c - c.adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * c.cwiseAbs().maxCoeff());
        }
    }
    SUBCASE("scales real and positive on 1000 random windows") {
        std::mt19937_64 rng(6);
        int bad = 0;
        for (int trial = 0; trial < 1000; ++trial) {
            const auto m = model_hpca(testutil::make_panel(testutil::gaussian_matrix(32, 3, rng)));
            if (!m.scales.allFinite() || (m.scales.array() <= 0.0).any()) ++bad;
        }
        CHECK(bad == 0);
    }
}

TEST_CASE("model_spca") {
    // Columns share one zero-mean pattern with unit sample variance.
    Eigen::MatrixXd x(4, 3);
    const Eigen::Vector4d u = Eigen::Vector4d(1, -1, 1, -1) * std::sqrt(0.75);
    x.col(0) = u * std::sqrt(0.5);
    x.col(1) = u * std::sqrt(2.0);
    x.col(2) = u * std::sqrt(4.5);
    const auto p = testutil::make_panel(x);

    SUBCASE("engineered variances give oscillator energies") {
        const auto m = model_spca(p);
        REQUIRE(m.factors() == 3);
        CHECK(m.scales(0) == Approx(0.5).epsilon(1e-8));
        CHECK(m.scales(1) == Approx(1.5).epsilon(1e-8));
        CHECK(m.scales(2) == Approx(2.5).epsilon(1e-8));
        REQUIRE(m.potential);
        CHECK(m.potential->k == Approx(1.0).epsilon(1e-8));
    }
    SUBCASE("permuting columns permutes loading columns") {
        Eigen::MatrixXd y(4, 3);
        y.col(0) = x.col(2);
        y.col(1) = x.col(0);
        y.col(2) = x.col(1);
        const auto a = model_spca(p);
        const auto b = model_spca(testutil::make_panel(y));
        CHECK((b.loadings.col(0) - a.loadings.col(2)).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((b.loadings.col(1) - a.loadings.col(0)).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((b.loadings.col(2) - a.loadings.col(1)).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("single factor") {
        const auto m = model_spca(p, 1);
        CHECK(m.loadings.rows() == 1);
        CHECK(m.scales.size() == 1);
    }
    SUBCASE("equal variances fall back to PCA") {
        Eigen::MatrixXd e(4, 2);
        e.col(0) = u;
        e.col(1) = Eigen::Vector4d(1, 1, -1, -1) * std::sqrt(0.75);
        const auto m = model_spca(testutil::make_panel(e));
        CHECK(m.method == FactorMethod::PCA);
        REQUIRE_FALSE(m.warnings.empty());
        CHECK(m.warnings.front().find("degenerate") != std::string::npos);
    }
}

TEST_CASE("risk contributions and entropy") {
    const auto m = real_model(FactorMethod::PCA, Eigen::Matrix2d::Identity(), Eigen::Vector2d(4.0, 1.0));
    const Eigen::VectorXd v = risk_contributions(m, Eigen::Vector2d(0.5, 0.5));
    CHECK(v(0) == Approx(0.8).epsilon(1e-15));
    CHECK(v(1) == Approx(0.2).epsilon(1e-15));
    // -(0.8 ln 0.8 + 0.2 ln 0.2)
    CHECK(entropy(v) == Approx(0.5004024235381879).epsilon(1e-14));

    const auto one = real_model(FactorMethod::PCA, Eigen::RowVector2d(0.6, 0.8), Eigen::VectorXd::Constant(1, 3.0));
    CHECK(risk_contributions(one, Eigen::Vector2d(0.3, 0.7))(0) == 1.0);

    CHECK(entropy(Eigen::Vector4d::Constant(0.25)) == Approx(std::log(4.0)).epsilon(1e-15));
    CHECK(entropy(Eigen::Vector3d(0, 1, 0)) == 0.0);

    const auto ortho = real_model(FactorMethod::PCA, Eigen::RowVector2d(1.0, -1.0), Eigen::VectorXd::Constant(1, 1.0));
    CHECK_THROWS_AS(risk_contributions(ortho, Eigen::Vector2d(0.5, 0.5)), std::domain_error);
    CHECK_THROWS_AS(risk_contributions(m, Eigen::Vector3d(0.2, 0.3, 0.5)), std::invalid_argument);
}

TEST_CASE("entropy gradient matches central differences") {
    std::mt19937_64 rng(8);
    for (int method = 0; method < 3; ++method) {
        const auto m = random_model(method, 4, rng);
        const Eigen::VectorXd w = random_simplex_point(4, rng);
        const auto e = entropy_with_gradient(m, w);
        CHECK(e.value == Approx(entropy(risk_contributions(m, w))).epsilon(1e-13));
        for (Eigen::Index i = 0; i < 4; ++i) {
            Eigen::VectorXd up = w, dn = w;
            up(i) += 1e-6;
            dn(i) -= 1e-6;
            const double fd = (entropy(risk_contributions(m, up)) - entropy(risk_contributions(m, dn))) / 2e-6;
            CHECK(e.gradient(i) == Approx(fd).epsilon(1e-5));
        }
    }
}

TEST_CASE("contribution invariants on random models") {
    std::mt19937_64 rng(9);
    double worst_sum = 0.0;
    bool nonneg = true;
    for (int trial = 0; trial < 300; ++trial) {
        const auto m = random_model(trial % 3, 2 + trial % 5, rng);
        const Eigen::VectorXd v = risk_contributions(m, random_simplex_point(m.assets(), rng));
        nonneg = nonneg && (v.array() >= 0.0).all();
        worst_sum = std::max(worst_sum, std::abs(v.sum() - 1.0));

        const double c = std::exp(std::uniform_real_distribution<double>(-5.0, 5.0)(rng));
        FactorModel scaled = m;
        scaled.scales *= c;
        const Eigen::VectorXd w = random_simplex_point(m.assets(), rng);
        CHECK((risk_contributions(scaled, w) - risk_contributions(m, w)).cwiseAbs().maxCoeff() <= 1e-12);
    }
    CHECK(nonneg);
    CHECK(worst_sum <= 1e-12);
}

TEST_CASE("maximize_entropy") {
    SUBCASE("diag(4,1) matches the dense simplex grid search") {
        const auto m = model_pca(diagonal_window(2.0, 1.0));
        const auto r = maximize_entropy(m);
        const std::vector<std::vector<double>> rows{{1, 0}, {0, 1}};
        const double w_star = oracle::simplex2_argmax(
            [&](double w) { return oracle::contribution_entropy(rows, {4.0, 1.0}, {w, 1.0 - w}); }, 200000);
        CHECK(std::abs(w_star - 1.0 / 3.0) < 1e-4);
        CHECK(std::abs(r.weights(0) - w_star) < 1e-3);
        CHECK(std::abs(r.weights(1) - (1.0 - w_star)) < 1e-3);
        CHECK(r.converged);
        CHECK(r.entropy == Approx(std::log(2.0)).epsilon(1e-10));
    }
    SUBCASE("identical scales and identity loadings give equal weights") {
        const auto m = real_model(FactorMethod::PCA, Eigen::MatrixXd::Identity(5, 5), Eigen::VectorXd::Constant(5, 0.7));
        const auto r = maximize_entropy(m);
        CHECK((r.weights.array() - 0.2).abs().maxCoeff() < 1e-6);
    }
    SUBCASE("single factor returns equal weights from the first start") {
        const auto m = real_model(FactorMethod::PCA, Eigen::RowVector3d(0.2, 0.5, 0.3), Eigen::VectorXd::Constant(1, 2.0));
        const auto r = maximize_entropy(m);
        CHECK(r.best_start == 0);
        CHECK((r.weights - equal_weights(3)).cwiseAbs().maxCoeff() < 1e-15);
    }
    SUBCASE("diagonal covariance gives inverse-volatility weights") {
        std::mt19937_64 rng(10);
        std::uniform_real_distribution<double> vol(0.05, 2.0);
        int worst_trial = -1;
        double worst = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            const Eigen::Index n = 2 + trial % 7;
            Eigen::VectorXd sigma(n);
            for (Eigen::Index i = 0; i < n; ++i) sigma(i) = vol(rng);
            const auto eig = eig_symmetric(SymmetricMatrix(Eigen::MatrixXd(sigma.array().square().matrix().asDiagonal())));
            const auto m = real_model(FactorMethod::PCA, eig.vectors.transpose(), eig.values);
            const auto r = maximize_entropy(m);
            const Eigen::VectorXd expected = sigma.cwiseInverse() / sigma.cwiseInverse().sum();
            const double err = (r.weights - expected).cwiseAbs().maxCoeff();
            if (err > worst) {
                worst = err;
                worst_trial = trial;
            }
        }
        INFO("worst trial " << worst_trial);
        CHECK(worst < 1e-3);
    }
    SUBCASE("never below the equal-weight entropy, weights on the simplex") {
        std::mt19937_64 rng(11);
        for (int trial = 0; trial < 60; ++trial) {
            const auto m = random_model(trial % 3, 2 + trial % 6, rng);
            const auto r = maximize_entropy(m);
            const double ew = entropy(risk_contributions(m, equal_weights(m.assets())));
            CHECK(r.entropy >= ew - 1e-9);
            CHECK((r.weights.array() >= 0.0).all());
            CHECK(std::abs(r.weights.sum() - 1.0) <= 1e-10);
            CHECK(r.entropy == Approx(entropy(risk_contributions(m, r.weights))).epsilon(1e-12));
        }
    }
    SUBCASE("deterministic for a fixed seed") {
        std::mt19937_64 rng(12);
        const auto m = random_model(2, 6, rng);
        OptimizerOptions o;
        o.seed = 5;
        const auto a = maximize_entropy(m, o);
        const auto b = maximize_entropy(m, o);
        CHECK(a.weights == b.weights);
        CHECK(a.best_start == b.best_start);
    }
    SUBCASE("complex loadings with zero imaginary part reduce to the real case") {
        std::mt19937_64 rng(13);
        const auto pca = random_model(0, 5, rng);
        const auto as_hpca = make_factor_model(FactorMethod::HPCA, pca.loadings, pca.scales);
        const auto a = maximize_entropy(pca);
        const auto b = maximize_entropy(as_hpca);
        CHECK((a.weights - b.weights).cwiseAbs().maxCoeff() < 2e-2);
    }
    SUBCASE("allow-short stays on the hyperplane inside the box") {
        std::mt19937_64 rng(14);
        OptimizerOptions o;
        o.long_only = false;
        for (int trial = 0; trial < 20; ++trial) {
            const auto m = random_model(trial % 3, 3 + trial % 4, rng);
            const auto r = maximize_entropy(m, o);
            CHECK(std::abs(r.weights.sum() - 1.0) <= 1e-10);
            CHECK(r.weights.cwiseAbs().maxCoeff() <= 1.0 + 1e-12);
            CHECK(r.entropy >= entropy(risk_contributions(m, equal_weights(m.assets()))) - 1e-9);
        }
    }
    SUBCASE("option validation") {
        const auto m = real_model(FactorMethod::PCA, Eigen::Matrix2d::Identity(), Eigen::Vector2d(4.0, 1.0));
        OptimizerOptions o;
        o.restarts = 0;
        CHECK_THROWS_AS(maximize_entropy(m, o), std::invalid_argument);
        o.restarts = 1;
        o.tolerance = 0.0;
        CHECK_THROWS_AS(maximize_entropy(m, o), std::invalid_argument);
    }
}

TEST_CASE("equal weights and compensated sums") {
    CHECK(equal_weights(4) == Eigen::Vector4d::Constant(0.25));
    CHECK(equal_weights(1)(0) == 1.0);
    CHECK_THROWS_AS(equal_weights(0), std::invalid_argument);
    for (Eigen::Index n : {3, 7, 11, 12, 49}) CHECK(std::abs(compensated_sum(equal_weights(n)) - 1.0) <= 1e-15);
    Eigen::Vector3d tricky(1.0, 1e100, -1e100);
    CHECK(compensated_sum(tricky) == 1.0);
}
