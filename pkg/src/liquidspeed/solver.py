"""Numerical equilibrium solver.

Finds both regimes' equilibria from the payoff functions alone: best
responses by derivative-free unimodal search, symmetric intensities by
damped fixed-point iteration, and the quote by bracketed root-finding on the
maker/bandit indifference condition. Nothing here calls the closed-form
equilibrium expressions, so the results can be checked against them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

from scipy import optimize

from . import analytic
from .params import OD, PC, ModelParams, Regime, validate

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
_EPS = 2.220446049250313e-16
_MAX_EXPANSIONS = 60


class SolverError(RuntimeError):
    """Raised when a search cannot be set up (e.g. no sign change)."""


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-10
    max_iters: int = 10_000
    damping: float = 0.5
    bracket_hi: float | None = None  # None -> 10*sigma/kappa for lambda

    def __post_init__(self) -> None:
        if not 0 < self.tol < 1:
            raise ValueError("tol must lie in (0, 1)")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")


@dataclass
class SolveResult:
    value: float
    iterations: int
    residual: float
    converged: bool
    # (ask, lambda_b, lambda_m) for every trial quote of the on-demand indifference search
    trace: list[tuple[float, float, float]] = field(default_factory=list, repr=False)


def maximize_unimodal(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-10,
    max_iters: int = 500,
) -> tuple[float, int, float]:
    """Maximize a unimodal ``f`` on ``[lo, hi]`` with ``0 <= lo < hi``.

    Golden-section search shrinks the bracket to ~1e-6 relative width, which
    is about as far as function comparisons can resolve a flat maximum. The
    bracket is then bisected on the sign of a central difference with step
    ~eps**(1/3), which resolves the maximizer to roughly 1e-11 relative.

    Returns ``(x, evaluations, final_width)``.
    """
    a, b = lo, hi
    evals = 0
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    evals += 2
    floor = 1e-30 * (hi - lo)
    # lo >= 0 for every caller, so d is the larger probe
    coarse = max(1e-6, tol)
    while b - a > coarse * d and b - a > floor and evals < max_iters:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
        evals += 1
    stop = max(tol, 4 * _EPS)
    while evals < max_iters:
        m = 0.5 * (a + b)
        if b - a <= stop * m or b - a <= floor:
            break
        h = 6e-6 * m
        slope = f(m + h) - f(m - h)
        evals += 2
        if slope > 0:
            a = m
        elif slope < 0:
            b = m
        else:
            a = b = m
    return 0.5 * (a + b), evals, b - a


def _expand_bracket(f: Callable[[float], float], hi: float) -> float:
    """Double ``hi`` until ``f`` is no longer increasing there."""
    for _ in range(_MAX_EXPANSIONS):
        if f(hi) <= f(hi * (1.0 - 1e-3)):
            return hi
        hi *= 2.0
    raise SolverError(f"payoff still increasing at bracket bound {hi:g}")


def _lambda_hi(params: ModelParams, cfg: SolverConfig) -> float:
    return cfg.bracket_hi if cfg.bracket_hi is not None else 10.0 * params.sigma / params.kappa


def _inner_tol(cfg: SolverConfig, last_change: float) -> float:
    # Inexact inner solves: while the outer iteration still moves by a
    # relative step s, locating the best response to ~s/100 is enough.
    return max(0.1 * cfg.tol, min(1e-3, 0.01 * last_change))


def _best_response(
    payoff: Callable[[float], float], hi: float, cfg: SolverConfig, tol: float | None = None
) -> SolveResult:
    hi = _expand_bracket(payoff, hi)
    tol = 0.1 * cfg.tol if tol is None else tol
    x, evals, width = maximize_unimodal(payoff, 0.0, hi, tol=tol, max_iters=cfg.max_iters)
    residual = width / (1.0 + abs(x))
    return SolveResult(x, evals, residual, residual <= cfg.tol)


def pc_ex_ante_payoff(
    params: ModelParams, ask: float, lambda_i: float, lambda_other: float
) -> float:
    """Ex-ante payoff of HFT i before the quoting race under pre-commitment.

    HFT i becomes the market maker with probability lambda_i / total (it
    wins the quoting race) and the bandit otherwise. The rental cost is
    already inside both role payoffs, so it is counted once.
    """
    total = lambda_i + lambda_other
    w = lambda_i / total
    pm = analytic.payoff_market_maker_pc(params, ask, lambda_i, lambda_other)
    pb = analytic.payoff_bandit_pc(params, ask, lambda_i, lambda_other)
    return w * pm + (1.0 - w) * pb


def _pc_ask(params: ModelParams, cfg: SolverConfig) -> float:
    return indifference_ask(params, PC, cfg).value


def best_response_pc(
    params: ModelParams,
    lambda_other: float,
    cfg: SolverConfig = SolverConfig(),
    ask: float | None = None,
    tol: float | None = None,
) -> SolveResult:
    """Payoff-maximizing intensity against an opponent holding ``lambda_other``.

    ``ask`` defaults to the numerically solved indifference quote.
    """
    if not lambda_other > 0:
        raise ValueError("lambda_other must be positive")
    if ask is None:
        ask = _pc_ask(params, cfg)

    def payoff(lam: float) -> float:
        return pc_ex_ante_payoff(params, ask, lam, lambda_other)

    return _best_response(payoff, _lambda_hi(params, cfg), cfg, tol)


def _damped_fixed_point(
    step: Callable[[float, float], float], x0: float, cfg: SolverConfig
) -> SolveResult:
    x = x0
    delta = math.inf
    change = math.inf
    for it in range(1, cfg.max_iters + 1):
        new = (1.0 - cfg.damping) * x + cfg.damping * step(x, _inner_tol(cfg, change))
        delta = abs(new - x)
        change = delta / abs(new)
        x = new
        # Contraction ~ (1 - damping) leaves an error about the size of the
        # last step, so stop at half the tolerance.
        if delta <= 0.5 * cfg.tol * abs(x):
            return SolveResult(x, it, delta / (1.0 + abs(x)), True)
    return SolveResult(x, cfg.max_iters, delta / (1.0 + abs(x)), False)


def symmetric_equilibrium_pc(
    params: ModelParams, cfg: SolverConfig = SolverConfig(), lambda0: float | None = None
) -> SolveResult:
    """Symmetric pre-commitment intensity by damped best-response iteration."""
    validate(params)
    ask = _pc_ask(params, cfg)
    x0 = params.sigma / (4.0 * params.kappa) if lambda0 is None else lambda0
    if not x0 > 0:
        raise ValueError("initial intensity must be positive")
    return _damped_fixed_point(
        lambda lam, tol: best_response_pc(params, lam, cfg, ask, tol).value, x0, cfg
    )


def race_stage_od(
    params: ModelParams,
    ask: float,
    cfg: SolverConfig = SolverConfig(),
    lambda0: float | None = None,
    *,
    both: bool = False,
) -> SolveResult | tuple[SolveResult, float, float]:
    """Post-news speed race under on-demand rental.

    Alternates the bandit's and the maker's best responses (each maximizing
    its conditional-on-news payoff) with damping until both intensities
    settle. With ``both=True`` also returns ``(lambda_b, lambda_m)``.
    """
    if not 0 <= ask < params.sigma:
        raise ValueError("ask must lie in [0, sigma) for a race to have value")
    hi = _lambda_hi(params, cfg)
    # Scale guess from the race prize and the supply slope; not the solution.
    x0 = (params.sigma - ask) / params.kappa if lambda0 is None else lambda0
    if not x0 > 0:
        raise ValueError("initial intensity must be positive")
    lam_b = lam_m = x0
    d = cfg.damping
    change = math.inf
    for it in range(1, cfg.max_iters + 1):
        tol = _inner_tol(cfg, change)
        m_fixed = lam_m
        br_b = _best_response(
            lambda x: analytic.payoff_bandit_od(params, ask, x, m_fixed), hi, cfg, tol
        ).value
        new_b = (1.0 - d) * lam_b + d * br_b
        b_fixed = new_b
        br_m = _best_response(
            lambda x: analytic.payoff_maker_od(params, ask, x, b_fixed), hi, cfg, tol
        ).value
        new_m = (1.0 - d) * lam_m + d * br_m
        change = max(abs(new_b - lam_b) / abs(new_b), abs(new_m - lam_m) / abs(new_m))
        lam_b, lam_m = new_b, new_m
        if change <= 0.5 * cfg.tol:
            break
    value = 0.5 * (lam_b + lam_m)
    result = SolveResult(
        value, it, change * abs(value) / (1.0 + abs(value)), change <= 0.5 * cfg.tol
    )
    if both:
        return result, lam_b, lam_m
    return result


def _od_quote_payoffs(params: ModelParams, ask: float, lam_b: float, lam_m: float) -> tuple[float, float]:
    p_news = params.news_prob
    maker = p_news * analytic.payoff_maker_od(params, ask, lam_m, lam_b) + (1.0 - p_news) * ask
    bandit = p_news * analytic.payoff_bandit_od(params, ask, lam_b, lam_m)
    return maker, bandit


def _bracketed_root(
    g: Callable[[float], float], lo: float, hi: float, xtol: float, max_iters: int
) -> SolveResult:
    glo, ghi = g(lo), g(hi)
    if glo == 0:
        return SolveResult(lo, 0, 0.0, True)
    if ghi == 0:
        return SolveResult(hi, 0, 0.0, True)
    if (glo > 0) == (ghi > 0):
        raise SolverError(f"no sign change on [{lo!r}, {hi!r}]: g={glo!r}, {ghi!r}")
    root, info = optimize.brentq(
        g, lo, hi, xtol=xtol, maxiter=max_iters, full_output=True, disp=False
    )
    # brentq keeps a sign-changing bracket; its width bound is xtol + 4 eps |root|
    width = xtol + 4 * _EPS * abs(root)
    return SolveResult(root, info.iterations, width / (1.0 + abs(root)), info.converged)


def indifference_ask(
    params: ModelParams,
    regime: Regime,
    cfg: SolverConfig = SolverConfig(),
    hold_lambda: float = 1.0,
    lambda0: float | None = None,
) -> SolveResult:
    """Quote at which being market maker or bandit pays the same.

    Under pre-commitment the intensities are held fixed at ``hold_lambda``
    (the root does not depend on it). Under on-demand rental the race stage
    is re-solved at every trial quote; the visited points are recorded in
    ``result.trace``.
    """
    validate(params)
    sigma = params.sigma
    eps = 1e-12 * sigma
    trace: list[tuple[float, float, float]] = []

    if regime is PC:
        if not hold_lambda > 0:
            raise ValueError("hold_lambda must be positive")

        def g(ask: float) -> float:
            return analytic.payoff_market_maker_pc(
                params, ask, hold_lambda, hold_lambda
            ) - analytic.payoff_bandit_pc(params, ask, hold_lambda, hold_lambda)

    else:

        def g(ask: float) -> float:
            _, lam_b, lam_m = race_stage_od(params, ask, cfg, lambda0, both=True)
            trace.append((ask, lam_b, lam_m))
            maker, bandit = _od_quote_payoffs(params, ask, lam_b, lam_m)
            return maker - bandit

    result = _bracketed_root(g, eps, sigma - eps, xtol=0.1 * cfg.tol * sigma, max_iters=cfg.max_iters)
    result.trace = trace
    return result


def foc_residual_fd(params: ModelParams, regime: Regime, lam: float, ask: float) -> float:
    """Central-difference slope of the own-intensity payoff at a symmetric point.

    Pre-commitment uses the ex-ante payoff; on-demand uses the bandit's
    conditional-on-news payoff with the maker at ``lam``.
    """
    if not lam > 0:
        raise ValueError("lambda must be positive")
    h = max(1e-6, 1e-6 * lam)
    if regime is PC:
        def f(x: float) -> float:
            return pc_ex_ante_payoff(params, ask, x, lam)
    else:
        def f(x: float) -> float:
            return analytic.payoff_bandit_od(params, ask, x, lam)
    return (f(lam + h) - f(lam - h)) / (2.0 * h)


def solve(params: ModelParams, regime: Regime, cfg: SolverConfig = SolverConfig(), lambda0: float | None = None) -> tuple[SolveResult, SolveResult]:
    """Numerically solve one regime; returns ``(ask_result, lambda_result)``."""
    ask_res = indifference_ask(params, regime, cfg)
    if regime is PC:
        lam_res = symmetric_equilibrium_pc(params, cfg, lambda0)
    else:
        lam_res = race_stage_od(params, ask_res.value, cfg, lambda0)
    return ask_res, lam_res
