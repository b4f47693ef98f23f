import math
import os
from pathlib import Path

import numpy as np
import pytest

import riskwave

SOURCE_DIR = Path(os.environ.get("RISKWAVE_SOURCE_DIR", Path(__file__).resolve().parents[2]))


def make_panel(values):
    values = np.asarray(values, dtype=float)
    dates = [f"2001-{1 + i // 28:02d}-{1 + i % 28:02d}" for i in range(values.shape[0])]
    return riskwave.ReturnPanel(dates, [f"A{j}" for j in range(values.shape[1])], values)


def test_fit_and_basis():
    fit = riskwave.fit_harmonic_potential([0.5, 2.0, 4.5])
    assert fit.k == pytest.approx(1.0, rel=1e-10)
    assert fit.x0 == pytest.approx(1.0, rel=1e-8)
    assert list(fit.grid_index) == [0, 1, 2]
    basis = riskwave.analytic_eigenbasis(1.0, 3)
    np.testing.assert_allclose(basis.energies, [0.5, 1.5, 2.5])
    assert basis.value(0, 0.0) == pytest.approx(math.pi ** -0.25)
    psi, coords, energies = riskwave.sample_basis(basis, fit)
    assert psi.shape == (3, 3)
    np.testing.assert_allclose(coords, [1, 2, 3], rtol=1e-8)


def test_numeric_basis_from_python_potential():
    basis = riskwave.numeric_eigenbasis(lambda x: 0.5 * x * x, -12.0, 12.0, 2000, 3)
    np.testing.assert_allclose(basis.energies, [0.5, 1.5, 2.5], rtol=1e-4)


def test_eigensolvers_and_hilbert():
    values, vectors = riskwave.eig_hermitian(np.array([[2, 1j], [-1j, 2]]))
    np.testing.assert_allclose(values, [3, 1], atol=1e-12)
    values, _ = riskwave.eig_symmetric(np.array([[0.0, 1.0], [1.0, 0.0]]))
    np.testing.assert_allclose(values, [1, -1], atol=1e-15)
    t = np.arange(256)
    z = riskwave.analytic_signal(np.cos(2 * np.pi * 8 * t / 256))
    np.testing.assert_allclose(z.imag, np.sin(2 * np.pi * 8 * t / 256), atol=1e-10)


def test_optimizer_diag_case():
    model = riskwave.make_factor_model("PCA", np.eye(2, dtype=complex), np.array([4.0, 1.0]))
    result = riskwave.maximize_entropy(model)
    np.testing.assert_allclose(result.weights, [1 / 3, 2 / 3], atol=1e-3)
    v = riskwave.risk_contributions(model, np.array([0.5, 0.5]))
    np.testing.assert_allclose(v, [0.8, 0.2])
    assert riskwave.entropy(v) == pytest.approx(0.500402, abs=1e-6)


def test_metrics():
    assert riskwave.performance(np.full(500, 0.0004))["ar"] == pytest.approx(0.10, abs=1e-12)
    assert riskwave.performance(np.full(500, 0.0004))["rr"] is None
    assert riskwave.max_drawdown(np.array([0.10, -0.20, 0.05])) == pytest.approx(-0.20, abs=1e-12)


def test_backtest_round_trip():
    rng = np.random.default_rng(0)
    panel = make_panel(rng.normal(size=(320, 4)) * np.array([0.003, 0.005, 0.01, 0.015]))
    report = riskwave.run_backtest(panel, "SPCA", restarts=4)
    assert report.strategy == "SPCA"
    assert report.weights.shape == (4, 4)
    np.testing.assert_allclose(report.weights.sum(axis=1), 1.0, atol=1e-10)
    assert (report.weights >= 0).all()
    assert len(report.returns) == 70
    again = riskwave.run_backtest(panel, "SPCA", restarts=4)
    assert np.array_equal(report.returns, again.returns)


def test_load_and_describe(tmp_path):
    csv = tmp_path / "p.csv"
    csv.write_text("date,X\n2020-01-01,100\n2020-01-02,110\n2020-01-03,99\n")
    panel, dropped = riskwave.load_panel(str(csv), "prices")
    np.testing.assert_allclose(panel.values[:, 0], [0.1, -0.1])
    assert dropped == 0
    stats = riskwave.describe(make_panel(np.array([[0.01], [0.02], [0.03], [0.04], [0.05]])))
    assert stats["std"][0] == pytest.approx(0.0158113883, rel=1e-9)
