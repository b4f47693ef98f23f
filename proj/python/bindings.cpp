#include "riskwave/allocation.hpp"
#include "riskwave/backtest.hpp"
#include "riskwave/market_data.hpp"
#include "riskwave/numerics.hpp"
#include "riskwave/schrodinger.hpp"

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace riskwave;

namespace {

FactorMethod parse_method(const std::string& name) {
    const Strategy s = parse_strategy(name);
    if (s == Strategy::PCA) return FactorMethod::PCA;
    if (s == Strategy::HPCA) return FactorMethod::HPCA;
    if (s == Strategy::SPCA) return FactorMethod::SPCA;
    throw std::invalid_argument("factor method must be PCA, HPCA or SPCA");
}

py::dict stats_dict(const DescriptiveStats& s) {
    py::dict d;
    d["assets"] = s.assets;
    d["mean"] = s.mean;
    d["std"] = s.stddev;
    d["skew"] = s.skewness;
    d["kurt"] = s.kurtosis;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Maximum-entropy factor-risk allocation (C++ core)";

    py::class_<ReturnPanel>(m, "ReturnPanel")
        .def(py::init<std::vector<std::string>, std::vector<std::string>, Eigen::MatrixXd>(), py::arg("dates"),
             py::arg("assets"), py::arg("values"))
        .def_property_readonly("dates", &ReturnPanel::dates)
        .def_property_readonly("assets", &ReturnPanel::assets)
        .def_property_readonly("values", &ReturnPanel::values)
        .def_property_readonly("periods", &ReturnPanel::periods)
        .def_property_readonly("num_assets", &ReturnPanel::num_assets)
        .def("__repr__", [](const ReturnPanel& p) {
            return "<ReturnPanel " + std::to_string(p.periods()) + " periods x " + std::to_string(p.num_assets()) + " assets>";
        });

    m.def(
        "load_panel",
        [](const std::filesystem::path& path, const std::string& kind) {
            LoadedPanel l = load_panel(path, parse_series_kind(kind));
            return py::make_tuple(std::move(l.panel), l.dropped_rows);
        },
        py::arg("path"), py::arg("kind") = "returns", "Load a CSV panel; returns (panel, dropped_rows).");
    m.def(
        "describe", [](const ReturnPanel& p, bool excess) { return stats_dict(describe(p, excess)); }, py::arg("panel"),
        py::arg("excess_kurtosis") = false);
    m.def("window", &window, py::arg("panel"), py::arg("end"), py::arg("length"));
    m.def(
        "synthesize",
        [](const Eigen::VectorXd& vols, const Eigen::MatrixXd& corr, Eigen::Index periods, std::uint64_t seed,
           std::optional<Eigen::VectorXd> means, std::vector<std::string> assets) {
            SynthSpec spec;
            spec.volatilities = vols;
            spec.correlation = corr;
            spec.periods = periods;
            spec.seed = seed;
            if (means) spec.means = *means;
            spec.assets = std::move(assets);
            return synthesize(spec);
        },
        py::arg("volatilities"), py::arg("correlation"), py::arg("periods"), py::arg("seed") = 0, py::arg("means") = py::none(),
        py::arg("assets") = std::vector<std::string>{});

    m.def(
        "covariance", [](const Eigen::MatrixXd& x, double eps) { return covariance(x, eps).matrix(); }, py::arg("observations"),
        py::arg("diagonal_loading") = 0.0);
    m.def(
        "eig_symmetric",
        [](const Eigen::MatrixXd& a) {
            auto e = eig_symmetric(SymmetricMatrix(a));
            return py::make_tuple(e.values, e.vectors);
        },
        py::arg("a"), "Descending eigenvalues and orthonormal eigenvector columns.");
    m.def(
        "eig_hermitian",
        [](const Eigen::MatrixXcd& a) {
            auto e = eig_hermitian(HermitianMatrix(a));
            return py::make_tuple(e.values, e.vectors);
        },
        py::arg("a"));
    m.def(
        "analytic_signal",
        [](const std::vector<double>& x) {
            auto z = analytic_signal(x);
            return Eigen::VectorXcd(Eigen::Map<Eigen::VectorXcd>(z.data(), static_cast<Eigen::Index>(z.size())));
        },
        py::arg("x"));

    py::class_<PotentialFit>(m, "PotentialFit")
        .def_readonly("k", &PotentialFit::k)
        .def_readonly("x0", &PotentialFit::x0)
        .def_readonly("dx", &PotentialFit::dx)
        .def_readonly("grid_index", &PotentialFit::grid_index)
        .def_readonly("residual", &PotentialFit::residual)
        .def_readonly("degenerate", &PotentialFit::degenerate)
        .def("coordinate", &PotentialFit::coordinate, py::arg("asset"));
    m.def("fit_harmonic_potential", &fit_harmonic_potential, py::arg("variances"));
    m.def("hermite", &hermite, py::arg("l"), py::arg("y"));

    py::class_<EigenBasis>(m, "EigenBasis")
        .def_property_readonly("energies", &EigenBasis::energies)
        .def_property_readonly("levels", &EigenBasis::levels)
        .def_property_readonly("lower", &EigenBasis::lower)
        .def_property_readonly("upper", &EigenBasis::upper)
        .def("value", &EigenBasis::value, py::arg("level"), py::arg("x"));
    m.def("analytic_eigenbasis", py::overload_cast<double, std::size_t>(&analytic_eigenbasis), py::arg("k"), py::arg("levels"));
    m.def(
        "numeric_eigenbasis",
        [](const std::function<double(double)>& potential, double lower, double upper, std::size_t grid_points, std::size_t levels) {
            return numeric_eigenbasis(potential, lower, upper, grid_points, levels);
        },
        py::arg("potential"), py::arg("lower"), py::arg("upper"), py::arg("grid_points"), py::arg("levels"));
    m.def(
        "sample_basis",
        [](const EigenBasis& b, const PotentialFit& f) {
            auto s = sample_basis(b, f);
            return py::make_tuple(s.psi, s.coordinates, s.energies);
        },
        py::arg("basis"), py::arg("fit"), "Returns (Psi, coordinates, energies).");
    m.def("gram_matrix", &gram_matrix, py::arg("basis"), py::arg("lower"), py::arg("upper"), py::arg("points"));

    py::class_<FactorModel>(m, "FactorModel")
        .def_property_readonly("method", [](const FactorModel& f) { return to_string(f.method); })
        .def_readonly("loadings", &FactorModel::loadings)
        .def_readonly("scales", &FactorModel::scales)
        .def_readonly("warnings", &FactorModel::warnings)
        .def_readonly("potential", &FactorModel::potential);
    m.def(
        "make_factor_model",
        [](const std::string& method, const Eigen::MatrixXcd& loadings, const Eigen::VectorXd& scales) {
            return make_factor_model(parse_method(method), loadings, scales);
        },
        py::arg("method"), py::arg("loadings"), py::arg("scales"));
    m.def(
        "build_model",
        [](const std::string& method, const ReturnPanel& w, std::size_t factors) { return build_model(parse_method(method), w, factors); },
        py::arg("method"), py::arg("window"), py::arg("factors") = 0);
    m.def("risk_contributions", &risk_contributions, py::arg("model"), py::arg("weights"));
    m.def("entropy", &entropy, py::arg("contributions"));
    m.def("equal_weights", &equal_weights, py::arg("n"));

    py::class_<OptimizationResult>(m, "OptimizationResult")
        .def_readonly("weights", &OptimizationResult::weights)
        .def_readonly("entropy", &OptimizationResult::entropy)
        .def_readonly("converged", &OptimizationResult::converged)
        .def_readonly("best_start", &OptimizationResult::best_start)
        .def_readonly("iterations", &OptimizationResult::iterations);
    m.def(
        "maximize_entropy",
        [](const FactorModel& model, int restarts, std::uint64_t seed, double tolerance, int max_iterations, bool long_only) {
            OptimizerOptions o{restarts, seed, tolerance, max_iterations, long_only};
            return maximize_entropy(model, o);
        },
        py::arg("model"), py::arg("restarts") = 16, py::arg("seed") = 0, py::arg("tolerance") = 1e-8,
        py::arg("max_iterations") = 5000, py::arg("long_only") = true);

    m.def(
        "performance",
        [](const Eigen::VectorXd& r) {
            const Performance p = performance(r);
            py::dict d;
            d["ar"] = p.annual_return;
            d["risk"] = p.risk;
            d["rr"] = p.return_risk ? py::cast(*p.return_risk) : py::none();
            return d;
        },
        py::arg("returns"));
    m.def("max_drawdown", &max_drawdown, py::arg("returns"), py::arg("wealth_sum") = false);

    py::class_<BacktestReport>(m, "BacktestReport")
        .def_property_readonly("strategy", [](const BacktestReport& r) { return to_string(r.strategy); })
        .def_readonly("assets", &BacktestReport::assets)
        .def_readonly("return_dates", &BacktestReport::return_dates)
        .def_readonly("returns", &BacktestReport::returns)
        .def_property_readonly("rebalance_dates",
                               [](const BacktestReport& r) {
                                   std::vector<std::string> d;
                                   for (const auto& x : r.rebalances) d.push_back(x.date);
                                   return d;
                               })
        .def_property_readonly("weights",
                               [](const BacktestReport& r) {
                                   Eigen::MatrixXd w(static_cast<Eigen::Index>(r.rebalances.size()), static_cast<Eigen::Index>(r.assets.size()));
                                   for (std::size_t k = 0; k < r.rebalances.size(); ++k) w.row(static_cast<Eigen::Index>(k)) = r.rebalances[k].weights.transpose();
                                   return w;
                               })
        .def_property_readonly("ar", [](const BacktestReport& r) { return r.metrics.annual_return; })
        .def_property_readonly("risk", [](const BacktestReport& r) { return r.metrics.risk; })
        .def_property_readonly("rr", [](const BacktestReport& r) { return r.metrics.return_risk; })
        .def_readonly("max_drawdown", &BacktestReport::max_drawdown)
        .def_readonly("warnings", &BacktestReport::warnings);

    m.def(
        "run_backtest",
        [](const ReturnPanel& panel, const std::string& strategy, Eigen::Index window_length, Eigen::Index rebalance,
           std::size_t factors, int restarts, std::uint64_t seed, bool long_only, bool wealth_sum, unsigned threads) {
            BacktestConfig c;
            c.strategy = parse_strategy(strategy);
            c.window = window_length;
            c.rebalance = rebalance;
            c.factors = factors;
            c.optimizer.restarts = restarts;
            c.optimizer.seed = seed;
            c.optimizer.long_only = long_only;
            c.wealth_sum = wealth_sum;
            c.threads = threads;
            py::gil_scoped_release release;
            return run_backtest(panel, c);
        },
        py::arg("panel"), py::arg("strategy") = "SPCA", py::arg("window") = 250, py::arg("rebalance") = 20, py::arg("factors") = 0,
        py::arg("restarts") = 16, py::arg("seed") = 0, py::arg("long_only") = true, py::arg("wealth_sum") = false,
        py::arg("threads") = 0);
}
