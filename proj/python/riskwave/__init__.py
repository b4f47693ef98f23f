"""Maximum-entropy factor-risk allocation with oscillator-eigenfunction factors.

Thin re-export of the compiled ``_core`` extension.
"""

from ._core import (
    BacktestReport,
    EigenBasis,
    FactorModel,
    OptimizationResult,
    PotentialFit,
    ReturnPanel,
    analytic_eigenbasis,
    analytic_signal,
    build_model,
    covariance,
    describe,
    eig_hermitian,
    eig_symmetric,
    entropy,
    equal_weights,
    fit_harmonic_potential,
    gram_matrix,
    hermite,
    load_panel,
    make_factor_model,
    max_drawdown,
    maximize_entropy,
    numeric_eigenbasis,
    performance,
    risk_contributions,
    run_backtest,
    sample_basis,
    synthesize,
    window,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
