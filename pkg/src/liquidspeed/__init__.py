"""Equilibria and Monte Carlo simulation of a two-trader speed race under
pre-committed (co-located) and on-demand (surge-priced) processor rental."""

from .analytic import EquilibriumPoint, equilibrium_point
from .params import OD, PC, ModelParams, ParamError, Regime, load_params, make_params, validate
from .simulator import SimConfig, SimEstimate, TrialOutcome, simulate
from .solver import SolveResult, SolverConfig
from .sweep import SweepRow, SweepSpec, check_claims, run_sweep

__all__ = [
    "EquilibriumPoint",
    "ModelParams",
    "OD",
    "PC",
    "ParamError",
    "Regime",
    "SimConfig",
    "SimEstimate",
    "SolveResult",
    "SolverConfig",
    "SweepRow",
    "SweepSpec",
    "TrialOutcome",
    "check_claims",
    "equilibrium_point",
    "load_params",
    "make_params",
    "run_sweep",
    "simulate",
    "validate",
]

__version__ = "0.1.0"
