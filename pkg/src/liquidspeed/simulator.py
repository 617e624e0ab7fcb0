"""Monte Carlo simulation of the one-shot quoting and sniping game.

A trial draws the news and liquidity-investor arrival times, and, if news
comes first, a race between the maker's cancel and the bandit's snipe, each
an exponential arrival at the trader's speed intensity. Gross trading
payoffs and rental durations are recorded per trial; technology costs are
charged afterwards as rental time times the processor cost rate.
"""

from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import TextIO

import numpy as np

from . import analytic, rng
from .params import OD, PC, ModelParams, ParamError, Regime, validate

# Per-trial draw slots in the counter-based stream.
SLOT_NEWS, SLOT_LI, SLOT_SIGN, SLOT_MAKER, SLOT_BANDIT = range(5)
CHUNK = 1 << 16

TRACE_COLUMNS = (
    "trial",
    "trigger_type",
    "trigger_time",
    "news_sign",
    "race_winner",
    "race_duration",
    "payoff_m",
    "payoff_b",
    "rental_m",
    "rental_b",
)


class TriggerType(str, enum.Enum):
    NEWS = "News"
    LIQUIDITY_INVESTOR = "LiquidityInvestor"


class Role(str, enum.Enum):
    MAKER = "Maker"
    BANDIT = "Bandit"


@dataclass(frozen=True)
class SimConfig:
    n_trials: int
    seed: int
    regime: Regime
    lambda_m: float
    lambda_b: float
    ask: float

    def __post_init__(self) -> None:
        if isinstance(self.n_trials, bool) or int(self.n_trials) != self.n_trials or self.n_trials < 1:
            raise ParamError("n_trials must be a positive integer")
        rng.check_seed(self.seed)
        if not isinstance(self.regime, Regime):
            raise ParamError(f"regime must be a Regime, got {self.regime!r}")
        for name in ("lambda_m", "lambda_b"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ParamError(f"{name} must be finite and nonnegative")
        if not self.lambda_m + self.lambda_b > 0:
            raise ParamError("lambda_m + lambda_b must be positive")

    def check(self, params: ModelParams) -> "SimConfig":
        validate(params)
        if not 0 <= self.ask <= params.sigma:
            raise ParamError("ask must lie in [0, sigma]")
        return self

    @classmethod
    def at_equilibrium(
        cls, params: ModelParams, regime: Regime, n_trials: int, seed: int
    ) -> "SimConfig":
        """Config with both traders at the regime's closed-form equilibrium."""
        lam = analytic.lambda_star(params, regime)
        return cls(n_trials, seed, regime, lam, lam, analytic.ask_star(params))


@dataclass(frozen=True)
class TrialOutcome:
    trigger_type: TriggerType
    trigger_time: float
    news_sign: int | None
    race_winner: Role | None
    race_duration: float | None
    payoff_m: float
    payoff_b: float
    rental_time_m: float
    rental_time_b: float


@dataclass(frozen=True)
class SimEstimate:
    mean: float
    std_error: float
    n: int

    @classmethod
    def from_samples(cls, x: np.ndarray) -> "SimEstimate":
        n = int(x.size)
        if n == 0:
            return cls(math.nan, math.nan, 0)
        mean = float(np.mean(x))
        se = float(np.std(x, ddof=1) / math.sqrt(n)) if n > 1 else math.nan
        return cls(mean, se, n)

    def z_score(self, target: float) -> float:
        if not self.std_error > 0:
            if self.n > 1 and self.mean == target:
                return 0.0
            return math.nan
        return (self.mean - target) / self.std_error

    @property
    def degenerate(self) -> bool:
        return self.n < 2 or not math.isfinite(self.std_error)


@dataclass(frozen=True)
class TrialBatch:
    """Columns for a contiguous range of trials (index = ``trial``)."""

    trial: np.ndarray
    news: np.ndarray  # bool: trigger was news
    trigger_time: np.ndarray
    news_sign: np.ndarray  # +1/-1 on news trials, 0 otherwise
    bandit_wins: np.ndarray  # bool, False on liquidity-investor trials
    race_duration: np.ndarray  # NaN on liquidity-investor trials
    payoff_m: np.ndarray
    payoff_b: np.ndarray
    rental_m: np.ndarray
    rental_b: np.ndarray

    def __len__(self) -> int:
        return int(self.trial.size)

    def outcome(self, i: int) -> TrialOutcome:
        news = bool(self.news[i])
        return TrialOutcome(
            trigger_type=TriggerType.NEWS if news else TriggerType.LIQUIDITY_INVESTOR,
            trigger_time=float(self.trigger_time[i]),
            news_sign=int(self.news_sign[i]) if news else None,
            race_winner=(Role.BANDIT if self.bandit_wins[i] else Role.MAKER) if news else None,
            race_duration=float(self.race_duration[i]) if news else None,
            payoff_m=float(self.payoff_m[i]),
            payoff_b=float(self.payoff_b[i]),
            rental_time_m=float(self.rental_m[i]),
            rental_time_b=float(self.rental_b[i]),
        )

    def net_payoffs(self, params: ModelParams, cfg: SimConfig) -> tuple[np.ndarray, np.ndarray]:
        cost_m = analytic.hft_cost_rate(params, cfg.lambda_m, cfg.lambda_b)
        cost_b = analytic.hft_cost_rate(params, cfg.lambda_b, cfg.lambda_m)
        return self.payoff_m - self.rental_m * cost_m, self.payoff_b - self.rental_b * cost_b

    def write_trace(self, out: TextIO) -> None:
        out.write(",".join(TRACE_COLUMNS) + "\n")
        for i in range(len(self)):
            o = self.outcome(i)
            fields = (
                str(int(self.trial[i])),
                o.trigger_type.value,
                repr(o.trigger_time),
                "" if o.news_sign is None else str(o.news_sign),
                "" if o.race_winner is None else o.race_winner.value,
                "" if o.race_duration is None else repr(o.race_duration),
                repr(o.payoff_m),
                repr(o.payoff_b),
                repr(o.rental_time_m),
                repr(o.rental_time_b),
            )
            out.write(",".join(fields) + "\n")


def _exponential(u: np.ndarray, rate: float) -> np.ndarray:
    if rate <= 0:
        return np.full(u.shape, np.inf)
    return -np.log1p(-u) / rate


def _simulate_range(params: ModelParams, cfg: SimConfig, start: int, stop: int) -> TrialBatch:
    idx = np.arange(start, stop, dtype=np.uint64)
    seed = cfg.seed
    t_news = _exponential(rng.uniforms(seed, idx, SLOT_NEWS), params.delta)
    t_li = _exponential(rng.uniforms(seed, idx, SLOT_LI), params.mu)
    sign = np.where(rng.uniforms(seed, idx, SLOT_SIGN) < 0.5, 1, -1).astype(np.int8)
    t_maker = _exponential(rng.uniforms(seed, idx, SLOT_MAKER), cfg.lambda_m)
    t_bandit = _exponential(rng.uniforms(seed, idx, SLOT_BANDIT), cfg.lambda_b)

    news = t_news <= t_li
    trigger = np.minimum(t_news, t_li)
    # ties go to the maker's cancel
    bandit_wins = news & (t_bandit < t_maker)
    race = np.where(news, np.minimum(t_maker, t_bandit), np.nan)

    edge = params.sigma - cfg.ask
    payoff_b = np.where(bandit_wins, edge, 0.0)
    payoff_m = np.where(news, np.where(bandit_wins, -edge, 0.0), cfg.ask)

    race_time = np.where(news, race, 0.0)
    if cfg.regime is PC:
        rental = trigger + race_time
    else:
        rental = race_time
    return TrialBatch(
        trial=idx.astype(np.int64),
        news=news,
        trigger_time=trigger,
        news_sign=np.where(news, sign, 0).astype(np.int8),
        bandit_wins=bandit_wins,
        race_duration=race,
        payoff_m=payoff_m,
        payoff_b=payoff_b,
        rental_m=rental,
        rental_b=rental.copy(),
    )


def worker_count() -> int:
    """Thread cap from ``LIQUIDSPEED_THREADS`` (absent or 0 means CPU count)."""
    raw = os.environ.get("LIQUIDSPEED_THREADS", "").strip()
    n = int(raw) if raw else 0
    if n < 0:
        raise ValueError("LIQUIDSPEED_THREADS must be >= 0")
    return n or (os.cpu_count() or 1)


def simulate(
    params: ModelParams, cfg: SimConfig, start: int = 0, stop: int | None = None
) -> TrialBatch:
    """Simulate trials ``start .. stop-1`` (default: all ``cfg.n_trials``).

    Chunks may run on several threads; the result does not depend on the
    thread count because every draw is keyed by its trial index.
    """
    cfg.check(params)
    stop = cfg.n_trials if stop is None else stop
    bounds = [(a, min(a + CHUNK, stop)) for a in range(start, stop, CHUNK)]
    workers = min(worker_count(), len(bounds))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda ab: _simulate_range(params, cfg, *ab), bounds))
    else:
        parts = [_simulate_range(params, cfg, a, b) for a, b in bounds]
    if len(parts) == 1:
        return parts[0]
    return TrialBatch(
        *(np.concatenate([getattr(p, name) for p in parts]) for name in TrialBatch.__dataclass_fields__)
    )


def run_trial(params: ModelParams, cfg: SimConfig, trial: int) -> TrialOutcome:
    """Outcome of a single trial; identical to row ``trial`` of :func:`simulate`."""
    cfg.check(params)
    if not 0 <= trial:
        raise ValueError("trial index must be nonnegative")
    return _simulate_range(params, cfg, trial, trial + 1).outcome(0)


def _batch(params: ModelParams, cfg: SimConfig, batch: TrialBatch | None) -> TrialBatch:
    return simulate(params, cfg) if batch is None else batch


def estimate_news_probability(params, cfg, batch=None) -> SimEstimate:
    b = _batch(params, cfg, batch)
    return SimEstimate.from_samples(b.news.astype(np.float64))


def estimate_snipe_probability(params, cfg, batch=None) -> SimEstimate:
    """P(bandit wins the race | news)."""
    b = _batch(params, cfg, batch)
    return SimEstimate.from_samples(b.bandit_wins[b.news].astype(np.float64))


def estimate_rental_time(params: ModelParams, cfg: SimConfig, batch=None) -> SimEstimate:
    """Mean processor rental duration of one HFT (both hold for the same span)."""
    b = _batch(params, cfg, batch)
    return SimEstimate.from_samples(b.rental_b)


def estimate_net_payoffs(
    params: ModelParams, cfg: SimConfig, batch=None
) -> tuple[SimEstimate, SimEstimate]:
    """Net (after technology cost) payoff estimates for ``(maker, bandit)``."""
    b = _batch(params, cfg, batch)
    net_m, net_b = b.net_payoffs(params, cfg)
    return SimEstimate.from_samples(net_m), SimEstimate.from_samples(net_b)


def estimate_hft_rent(params: ModelParams, cfg: SimConfig, batch=None) -> SimEstimate:
    """Per-HFT rent: each trader is maker or bandit with equal odds ex ante."""
    b = _batch(params, cfg, batch)
    net_m, net_b = b.net_payoffs(params, cfg)
    return SimEstimate.from_samples(0.5 * (net_m + net_b))


def estimate_price_discovery(params: ModelParams, cfg: SimConfig, batch=None) -> SimEstimate:
    """Mean delay from news to the first HFT message; n=0 if no news occurred."""
    b = _batch(params, cfg, batch)
    return SimEstimate.from_samples(b.race_duration[b.news])


def estimate_resource_usage(params: ModelParams, cfg: SimConfig, batch=None) -> SimEstimate:
    """Mean intensity-time rented by both traders over one game."""
    b = _batch(params, cfg, batch)
    return SimEstimate.from_samples(cfg.lambda_m * b.rental_m + cfg.lambda_b * b.rental_b)


def expected_values(params: ModelParams, cfg: SimConfig) -> dict[str, float]:
    """Model expectations of every estimated quantity at the config's inputs."""
    lm, lb, ask = cfg.lambda_m, cfg.lambda_b, cfg.ask
    total = lm + lb
    p_news = params.news_prob
    rental = analytic.expected_rental_time(params, cfg.regime, lb, lm)
    if cfg.regime is PC:
        maker = analytic.payoff_market_maker_pc(params, ask, lm, lb)
        bandit = analytic.payoff_bandit_pc(params, ask, lb, lm)
    else:
        maker = p_news * analytic.payoff_maker_od(params, ask, lm, lb) + (1.0 - p_news) * ask
        bandit = p_news * analytic.payoff_bandit_od(params, ask, lb, lm)
    return {
        "news_probability": p_news,
        "snipe_probability": lb / total,
        "rental_time": rental,
        "net_payoff_maker": maker,
        "net_payoff_bandit": bandit,
        "hft_rent": 0.5 * (maker + bandit),
        "price_discovery": 1.0 / total,
        "resource_usage": total * rental,
    }


def estimate_all(params: ModelParams, cfg: SimConfig, batch=None) -> dict[str, SimEstimate]:
    b = _batch(params, cfg, batch)
    maker, bandit = estimate_net_payoffs(params, cfg, b)
    return {
        "news_probability": estimate_news_probability(params, cfg, b),
        "snipe_probability": estimate_snipe_probability(params, cfg, b),
        "rental_time": estimate_rental_time(params, cfg, b),
        "net_payoff_maker": maker,
        "net_payoff_bandit": bandit,
        "hft_rent": estimate_hft_rent(params, cfg, b),
        "price_discovery": estimate_price_discovery(params, cfg, b),
        "resource_usage": estimate_resource_usage(params, cfg, b),
    }


def write_trace_file(batch: TrialBatch, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        batch.write_trace(fh)
