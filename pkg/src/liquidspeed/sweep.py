"""Parameter sweeps, regime comparisons and CSV/claim-report output."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import analytic, rng
from . import simulator as sim
from .params import OD, PC, ModelParams, ParamError, Regime, validate

SWEEP_VARS = ("delta", "mu", "sigma", "kappa")

CSV_COLUMNS = (
    "sweep_var",
    "sweep_value",
    "regime",
    "ask",
    "lambda_star",
    "speed_price",
    "resource_usage",
    "price_discovery",
    "hft_rent",
    "sim_rent_mean",
    "sim_rent_se",
    "sim_rental_mean",
    "sim_rental_se",
    "n_trials",
)

# Claim name -> human description, in report order.
CLAIMS = {
    "spread_equal": "spread identical across regimes",
    "lambda_od_gt_pc": "speed intensity higher on demand",
    "price_od_gt_pc": "speed price higher on demand",
    "discovery_od_lt_pc": "price discovery faster on demand",
    "usage_pc_gt_od": "resource usage higher under pre-commitment",
    "rent_pc_gt_od": "HFT rent higher under pre-commitment",
}

FUZZ_RANGES = {
    "delta": (0.1, 10.0),
    "mu": (0.1, 10.0),
    "sigma": (0.1, 4.0),
    "kappa": (0.05, 2.0),
}


@dataclass(frozen=True)
class SweepSpec:
    base: ModelParams
    sweep_var: str
    grid: tuple[float, ...]
    regimes: tuple[Regime, ...] = (PC, OD)
    with_simulation: bool = False
    sim_trials: int = 100_000
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "grid", tuple(float(x) for x in self.grid))
        object.__setattr__(self, "regimes", tuple(self.regimes))
        if self.sweep_var not in SWEEP_VARS:
            raise ParamError(f"sweep_var must be one of {', '.join(SWEEP_VARS)}")
        if not self.grid:
            raise ParamError("grid must be nonempty")
        if any(not (math.isfinite(x) and x > 0) for x in self.grid):
            raise ParamError("grid values must be finite and positive")
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise ParamError("grid must be strictly increasing")
        if not self.regimes or len(set(self.regimes)) != len(self.regimes):
            raise ParamError("regimes must be a nonempty list without repeats")
        if self.with_simulation and self.sim_trials < 1:
            raise ParamError("sim_trials must be >= 1")
        rng.check_seed(self.seed)

    def point(self, value: float) -> ModelParams:
        try:
            return validate(self.base.with_values(**{self.sweep_var: value}))
        except ParamError as exc:
            raise ParamError(f"grid point {self.sweep_var}={value!r}: {exc}") from None


@dataclass(frozen=True)
class SweepRow:
    sweep_var: str
    sweep_value: float
    regime: Regime
    ask: float
    lambda_star: float
    speed_price: float
    resource_usage: float
    price_discovery_time: float
    hft_rent: float
    sim_rent: sim.SimEstimate | None = None
    sim_rental: sim.SimEstimate | None = None
    params: ModelParams | None = field(default=None, compare=False, repr=False)

    @classmethod
    def from_point(
        cls, sweep_var: str, sweep_value: float, params: ModelParams, regime: Regime, **extra
    ) -> "SweepRow":
        ep = analytic.equilibrium_point(params, regime)
        return cls(
            sweep_var=sweep_var,
            sweep_value=sweep_value,
            regime=regime,
            ask=ep.ask,
            lambda_star=ep.lambda_star,
            speed_price=ep.speed_price,
            resource_usage=ep.resource_usage,
            price_discovery_time=ep.price_discovery_time,
            hft_rent=ep.hft_rent,
            params=params,
            **extra,
        )


def parse_grid(text: str) -> tuple[float, ...]:
    """``"a,b,c"`` or the log-spaced shorthand ``"start:stop:count"``."""
    text = text.strip()
    if not text:
        raise ParamError("grid must be nonempty")
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ParamError(f"bad grid shorthand {text!r} (expected start:stop:count)")
        try:
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise ParamError(f"bad grid shorthand {text!r}") from None
        if count < 1:
            raise ParamError("grid must be nonempty")
        if not (start > 0 and stop > 0):
            raise ParamError("log-spaced grid bounds must be positive")
        return tuple(float(x) for x in np.geomspace(start, stop, count))
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError:
        raise ParamError(f"bad grid list {text!r}") from None


def run_sweep(spec: SweepSpec) -> list[SweepRow]:
    rows = []
    for i, value in enumerate(spec.grid):
        params = spec.point(value)
        for regime in spec.regimes:
            extra = {}
            if spec.with_simulation:
                seed = rng.derive_seed(spec.seed, i, 0 if regime is PC else 1)
                cfg = sim.SimConfig.at_equilibrium(params, regime, spec.sim_trials, seed)
                batch = sim.simulate(params, cfg)
                extra = {
                    "sim_rent": sim.estimate_hft_rent(params, cfg, batch),
                    "sim_rental": sim.estimate_rental_time(params, cfg, batch),
                }
            rows.append(SweepRow.from_point(spec.sweep_var, value, params, regime, **extra))
    return rows


def fuzz_rows(n_draws: int, seed: int, base: ModelParams | None = None) -> list[SweepRow]:
    """Both-regime rows at ``n_draws`` log-uniform random parameter vectors.

    Rows are labelled ``sweep_var="fuzz"`` with the draw index as value.
    ``eta`` and ``v`` come from ``base`` when given, with eta raised above
    sigma where needed.
    """
    idx = np.arange(n_draws, dtype=np.uint64)
    draws = {}
    for slot, (name, (lo, hi)) in enumerate(FUZZ_RANGES.items()):
        u = rng.uniforms(seed, idx, slot)
        draws[name] = np.exp(np.log(lo) + u * (np.log(hi) - np.log(lo)))
    rows = []
    for i in range(n_draws):
        values = {name: float(draws[name][i]) for name in FUZZ_RANGES}
        v = base.v if base is not None else 0.0
        eta = None
        if base is not None and base.eta > values["sigma"]:
            eta = base.eta
        params = validate(ModelParams(eta=eta, v=v, **values))
        for regime in (PC, OD):
            rows.append(SweepRow.from_point("fuzz", float(i), params, regime))
    return rows


@dataclass
class ClaimReport:
    points: list[dict]
    violations: list[dict]

    @property
    def passed(self) -> bool:
        return not self.violations

    def claim_totals(self) -> dict[str, bool]:
        return {c: all(p["verdicts"][c] for p in self.points) for c in CLAIMS}

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "n_points": len(self.points),
            "claims": self.claim_totals(),
            "points": self.points,
            "violations": self.violations,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_text(self) -> str:
        lines = [f"claim check over {len(self.points)} grid point(s)"]
        for claim, ok in self.claim_totals().items():
            lines.append(f"  {'PASS' if ok else 'FAIL'}  {claim:<20} {CLAIMS[claim]}")
        for v in self.violations:
            lines.append(
                f"  violation: {v['claim']} at {v['sweep_var']}={v['sweep_value']!r}"
                f" pc={v['pc']} od={v['od']}"
            )
        lines.append("overall: " + ("PASS" if self.passed else "FAIL"))
        return "\n".join(lines) + "\n"


def _row_dict(row: SweepRow) -> dict:
    return {
        "ask": row.ask,
        "lambda_star": row.lambda_star,
        "speed_price": row.speed_price,
        "resource_usage": row.resource_usage,
        "price_discovery": row.price_discovery_time,
        "hft_rent": row.hft_rent,
    }


def _pair_rows(rows: Sequence[SweepRow]) -> list[tuple[SweepRow, SweepRow]]:
    regimes = {r.regime for r in rows}
    if regimes != {PC, OD}:
        raise ParamError("both regimes required")
    by_key: dict[tuple[str, float], dict[Regime, SweepRow]] = {}
    for row in rows:
        slot = by_key.setdefault((row.sweep_var, row.sweep_value), {})
        if row.regime in slot:
            raise ParamError(f"duplicate row for {row.sweep_var}={row.sweep_value!r} {row.regime.value}")
        slot[row.regime] = row
    pairs = []
    for (var, value), slot in by_key.items():
        if set(slot) != {PC, OD}:
            raise ParamError(f"mismatched grids: {var}={value!r} lacks a regime")
        pairs.append((slot[PC], slot[OD]))
    return pairs


def check_claims(rows: Sequence[SweepRow]) -> ClaimReport:
    """Verdicts for the cross-regime claims at every grid point.

    Uses analytic columns only; simulated columns never affect pass/fail.
    """
    points, violations = [], []
    for pc, od in _pair_rows(rows):
        sigma = pc.params.sigma if pc.params is not None else max(abs(pc.ask), abs(od.ask))
        verdicts = {
            "spread_equal": abs(2 * pc.ask - 2 * od.ask) <= 1e-12 * sigma,
            "lambda_od_gt_pc": od.lambda_star > pc.lambda_star,
            "price_od_gt_pc": od.speed_price > pc.speed_price,
            "discovery_od_lt_pc": od.price_discovery_time < pc.price_discovery_time,
            "usage_pc_gt_od": pc.resource_usage > od.resource_usage,
            "rent_pc_gt_od": pc.hft_rent > od.hft_rent,
        }
        points.append({"sweep_var": pc.sweep_var, "sweep_value": pc.sweep_value, "verdicts": verdicts})
        for claim, ok in verdicts.items():
            if not ok:
                violations.append(
                    {
                        "claim": claim,
                        "sweep_var": pc.sweep_var,
                        "sweep_value": pc.sweep_value,
                        "pc": _row_dict(pc),
                        "od": _row_dict(od),
                    }
                )
    return ClaimReport(points, violations)


def _strictly(values: Sequence[float], increasing: bool) -> bool:
    diffs = np.diff(np.asarray(values, dtype=float))
    return bool(np.all(diffs > 0) if increasing else np.all(diffs < 0))


def curve_shape_checks(rows: Sequence[SweepRow]) -> dict[str, bool]:
    """Shape properties of the regime curves along one sweep variable."""
    pairs = sorted(_pair_rows(rows), key=lambda p: p[0].sweep_value)
    pc = [p[0] for p in pairs]
    od = [p[1] for p in pairs]
    return {
        "lambda_pc_increasing": _strictly([r.lambda_star for r in pc], True),
        "lambda_od_decreasing": _strictly([r.lambda_star for r in od], False),
        "discovery_od_below_pc": all(
            o.price_discovery_time < p.price_discovery_time for p, o in zip(pc, od)
        ),
        "usage_pc_increasing": _strictly([r.resource_usage for r in pc], True),
        "usage_od_increasing": _strictly([r.resource_usage for r in od], True),
        "usage_pc_above_od": all(p.resource_usage > o.resource_usage for p, o in zip(pc, od)),
        "rent_pc_above_od": all(p.hft_rent > o.hft_rent for p, o in zip(pc, od)),
    }


def _num(x: float) -> str:
    return repr(float(x))


def row_to_csv_fields(row: SweepRow) -> list[str]:
    rent, rental = row.sim_rent, row.sim_rental
    n = rent.n if rent is not None else (rental.n if rental is not None else None)
    return [
        row.sweep_var,
        _num(row.sweep_value),
        row.regime.value,
        _num(row.ask),
        _num(row.lambda_star),
        _num(row.speed_price),
        _num(row.resource_usage),
        _num(row.price_discovery_time),
        _num(row.hft_rent),
        "" if rent is None else _num(rent.mean),
        "" if rent is None else _num(rent.std_error),
        "" if rental is None else _num(rental.mean),
        "" if rental is None else _num(rental.std_error),
        "" if n is None else str(n),
    ]


def write_csv(rows: Iterable[SweepRow], out) -> None:
    """Write rows to a path or text stream (UTF-8, LF, header row)."""
    if isinstance(out, (str, Path)):
        with open(out, "w", encoding="utf-8", newline="") as fh:
            write_csv(rows, fh)
        return
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow(row_to_csv_fields(row))


def read_csv(path: str | Path) -> list[SweepRow]:
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ParamError(f"{path}: unexpected CSV header")
        for rec in reader:
            n = int(rec["n_trials"]) if rec["n_trials"] else None
            sim_rent = sim_rental = None
            if rec["sim_rent_mean"]:
                sim_rent = sim.SimEstimate(float(rec["sim_rent_mean"]), float(rec["sim_rent_se"]), n)
            if rec["sim_rental_mean"]:
                sim_rental = sim.SimEstimate(
                    float(rec["sim_rental_mean"]), float(rec["sim_rental_se"]), n
                )
            rows.append(
                SweepRow(
                    sweep_var=rec["sweep_var"],
                    sweep_value=float(rec["sweep_value"]),
                    regime=Regime.parse(rec["regime"]),
                    ask=float(rec["ask"]),
                    lambda_star=float(rec["lambda_star"]),
                    speed_price=float(rec["speed_price"]),
                    resource_usage=float(rec["resource_usage"]),
                    price_discovery_time=float(rec["price_discovery"]),
                    hft_rent=float(rec["hft_rent"]),
                    sim_rent=sim_rent,
                    sim_rental=sim_rental,
                )
            )
    return rows
