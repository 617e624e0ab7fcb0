"""Closed-form equilibrium and market-quality quantities for both regimes.

Every function takes validated :class:`ModelParams`; quotes are measured
relative to the fundamental value ``v`` unless stated otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .params import OD, PC, ModelParams, ParamError, Regime, validate


@dataclass(frozen=True)
class EquilibriumPoint:
    regime: Regime
    ask: float
    lambda_star: float
    speed_price: float
    expected_rental_time: float
    resource_usage: float
    price_discovery_time: float
    hft_rent: float
    v: float = 0.0

    @property
    def ask_abs(self) -> float:
        return self.v + self.ask

    @property
    def bid_abs(self) -> float:
        return self.v - self.ask

    @property
    def spread(self) -> float:
        return 2.0 * self.ask


def _check_intensities(*lams: float) -> None:
    for lam in lams:
        if not lam >= 0:
            raise ParamError(f"intensity must be nonnegative, got {lam!r}")


def _total(lambda_i: float, lambda_other: float) -> float:
    if not (lambda_i >= 0 and lambda_other >= 0):
        _check_intensities(lambda_i, lambda_other)
    total = lambda_i + lambda_other
    if total <= 0:
        raise ParamError("total speed intensity must be positive (race never resolves)")
    return total


def ask_star(params: ModelParams) -> float:
    """Equilibrium half-spread delta*sigma/(delta+mu); same in both regimes."""
    return params.delta * params.sigma / (params.delta + params.mu)


def spread(params: ModelParams) -> float:
    return 2.0 * ask_star(params)


def _pc_root(params: ModelParams) -> float:
    d, m, s, k = params.delta, params.mu, params.sigma, params.kappa
    return math.sqrt(d * d + 3.0 * d * m * s / (k * (d + m)))


def lambda_pc_star(params: ModelParams) -> float:
    """Symmetric per-HFT speed intensity under pre-commitment."""
    d = params.delta
    root = _pc_root(params)
    # (root - d) loses digits when d dominates; use the conjugate form.
    a = 3.0 * d * params.mu * params.sigma / (params.kappa * (d + params.mu))
    return a / (6.0 * (root + d)) if root > 0 else 0.0


def lambda_od_star(params: ModelParams) -> float:
    """Symmetric per-HFT speed intensity under on-demand rental."""
    d, m = params.delta, params.mu
    return m * params.sigma / (4.0 * params.kappa * (d + m))


def lambda_od_given_ask(params: ModelParams, ask: float) -> float:
    """Race-stage intensity (sigma - ask)/(4 kappa) for an arbitrary quote."""
    return max(params.sigma - ask, 0.0) / (4.0 * params.kappa)


def lambda_star(params: ModelParams, regime: Regime) -> float:
    return lambda_pc_star(params) if regime is PC else lambda_od_star(params)


def speed_price(params: ModelParams, lambda_i: float, lambda_other: float) -> float:
    """Uniform clearing price of processor capacity, kappa * total intensity."""
    _check_intensities(lambda_i, lambda_other)
    return params.kappa * (lambda_i + lambda_other)


def hft_cost_rate(params: ModelParams, lambda_i: float, lambda_other: float) -> float:
    """Rental spend per unit time of a trader holding ``lambda_i``."""
    _check_intensities(lambda_i, lambda_other)
    return params.kappa * lambda_i * (lambda_i + lambda_other)


def expected_rental_time_pc(params: ModelParams, lambda_i: float, lambda_other: float) -> float:
    """Expected rental duration under pre-commitment: wait for the trigger, then the race."""
    total = _total(lambda_i, lambda_other)
    d, m = params.delta, params.mu
    return 1.0 / (d + m) + (d / (d + m)) / total


def expected_rental_time_od(params: ModelParams, lambda_i: float, lambda_other: float) -> float:
    """Unconditional expected rental duration under on-demand rental (race only)."""
    total = _total(lambda_i, lambda_other)
    return params.news_prob / total


def expected_rental_time(
    params: ModelParams, regime: Regime, lambda_i: float, lambda_other: float
) -> float:
    if regime is PC:
        return expected_rental_time_pc(params, lambda_i, lambda_other)
    return expected_rental_time_od(params, lambda_i, lambda_other)


def _pc_cost(params: ModelParams, lambda_i: float, total: float) -> float:
    # expected rental time x cost rate, inlined for the solver's inner loops
    rate = params.delta + params.mu
    return (1.0 / rate + (params.delta / rate) / total) * params.kappa * lambda_i * total


def payoff_market_maker_pc(
    params: ModelParams, ask: float, lambda_i: float, lambda_other: float
) -> float:
    total = _total(lambda_i, lambda_other)
    p_news = params.news_prob
    sniped = -p_news * (lambda_other / total) * (params.sigma - ask)
    li_fill = (1.0 - p_news) * ask
    return sniped + li_fill - _pc_cost(params, lambda_i, total)


def payoff_bandit_pc(
    params: ModelParams, ask: float, lambda_i: float, lambda_other: float
) -> float:
    total = _total(lambda_i, lambda_other)
    snipe = params.news_prob * (lambda_i / total) * (params.sigma - ask)
    return snipe - _pc_cost(params, lambda_i, total)


def payoff_bandit_od(params: ModelParams, ask: float, lambda_b: float, lambda_m: float) -> float:
    """Bandit payoff conditional on news when speed is rented on demand."""
    total = _total(lambda_b, lambda_m)
    return (lambda_b / total) * (params.sigma - ask) - params.kappa * lambda_b


def payoff_maker_od(params: ModelParams, ask: float, lambda_m: float, lambda_b: float) -> float:
    """Market-maker payoff conditional on news when speed is rented on demand."""
    total = _total(lambda_b, lambda_m)
    return (lambda_b / total) * (ask - params.sigma) - params.kappa * lambda_m


def resource_usage(params: ModelParams, regime: Regime) -> float:
    d, m = params.delta, params.mu
    base = d / (d + m)
    if regime is OD:
        return base
    return base + 2.0 * lambda_pc_star(params) / (d + m)


def hft_rent(params: ModelParams, regime: Regime) -> float:
    """Expected equilibrium profit of one HFT net of technology cost."""
    d, m, s, k = params.delta, params.mu, params.sigma, params.kappa
    if regime is OD:
        return d * m * s / (4.0 * (d + m) ** 2)
    # (d + 6c - root) with c = m s / (k (d + m)) rewritten as 3c (d + 2 root) / (d + root),
    # which avoids cancellation when d dominates.
    root = _pc_root(params)
    return d * m * s * (d + 2.0 * root) / (6.0 * (d + m) ** 2 * (d + root))


def price_discovery_time(params: ModelParams, regime: Regime) -> float:
    return 1.0 / (2.0 * lambda_star(params, regime))


def equilibrium_point(params: ModelParams, regime: Regime) -> EquilibriumPoint:
    validate(params)
    lam = lambda_star(params, regime)
    return EquilibriumPoint(
        regime=regime,
        ask=ask_star(params),
        lambda_star=lam,
        speed_price=speed_price(params, lam, lam),
        expected_rental_time=expected_rental_time(params, regime, lam, lam),
        resource_usage=resource_usage(params, regime),
        price_discovery_time=price_discovery_time(params, regime),
        hft_rent=hft_rent(params, regime),
        v=params.v,
    )
