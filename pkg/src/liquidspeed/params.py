"""Exogenous model parameters and the flat ``key = value`` config format."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Iterable, Mapping


class ParamError(ValueError):
    """Raised when a parameter vector or config file is invalid."""


class Regime(str, enum.Enum):
    PRE_COMMITMENT = "pc"
    ON_DEMAND = "od"

    @classmethod
    def parse(cls, text: str) -> "Regime":
        key = text.strip().lower()
        aliases = {
            "pc": cls.PRE_COMMITMENT,
            "precommitment": cls.PRE_COMMITMENT,
            "pre-commitment": cls.PRE_COMMITMENT,
            "od": cls.ON_DEMAND,
            "ondemand": cls.ON_DEMAND,
            "on-demand": cls.ON_DEMAND,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ParamError(f"unknown regime {text!r} (expected pc or od)") from None

    @property
    def label(self) -> str:
        return "PreCommitment" if self is Regime.PRE_COMMITMENT else "OnDemand"


PC = Regime.PRE_COMMITMENT
OD = Regime.ON_DEMAND
REGIMES = (PC, OD)


@dataclass(frozen=True)
class ModelParams:
    """Parameter vector of the two-HFT trading game.

    ``delta`` and ``mu`` are the news and liquidity-investor Poisson rates,
    ``sigma`` the news jump size, ``kappa`` the slope of the processor supply
    schedule, ``eta`` the liquidity investors' private value and ``v`` the
    fundamental value at t=0. ``eta`` only constrains inputs (liquidity
    investors always trade); ``v`` only shifts quote levels.
    """

    delta: float
    mu: float
    sigma: float
    kappa: float
    eta: float | None = None
    v: float = 0.0

    def __post_init__(self) -> None:
        if self.eta is None:
            object.__setattr__(self, "eta", 2.0 * self.sigma)

    @property
    def news_prob(self) -> float:
        """Probability that the trigger event is news, delta / (delta + mu)."""
        return self.delta / (self.delta + self.mu)

    def with_values(self, **changes: float) -> "ModelParams":
        return replace(self, **changes)

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


PARAM_KEYS = tuple(f.name for f in fields(ModelParams))


def validate(params: ModelParams) -> ModelParams:
    """Return ``params`` unchanged if every model constraint holds.

    Raises ParamError naming the first violated constraint.
    """
    for name in PARAM_KEYS:
        value = getattr(params, name)
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ParamError(f"{name} must be a number, got {value!r}")
        if not math.isfinite(value):
            raise ParamError(f"{name} must be finite")
    for name in ("delta", "mu", "sigma", "kappa"):
        if not getattr(params, name) > 0:
            raise ParamError(f"{name} must be positive")
    if not params.eta > params.sigma:
        raise ParamError("eta must exceed sigma")
    return params


def make_params(**values: float) -> ModelParams:
    return validate(ModelParams(**values))


def _parse_number(key: str, text: str, where: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ParamError(f"{where}: {key} must be a decimal number, got {text!r}") from None
    if not math.isfinite(value):
        raise ParamError(f"{where}: {key} must be finite")
    return value


def parse_config_text(text: str, source: str = "<config>") -> dict[str, tuple[str, int]]:
    """Parse flat ``key = value`` lines; ``#`` starts a comment.

    Returns ``{key: (raw_value, line_number)}``. Duplicate keys and lines
    without ``=`` are errors.
    """
    entries: dict[str, tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParamError(f"{source}:{lineno}: expected key=value, got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ParamError(f"{source}:{lineno}: missing key")
        if key in entries:
            raise ParamError(f"{source}:{lineno}: duplicate key {key!r}")
        entries[key] = (value, lineno)
    return entries


def read_config(path: str | Path) -> dict[str, tuple[str, int]]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParamError(f"cannot read config {path}: {exc.strerror or exc}") from None
    return parse_config_text(text, source=str(path))


def params_from_entries(
    entries: Mapping[str, tuple[str, int]], source: str = "<config>"
) -> ModelParams:
    """Build validated ModelParams from parsed config entries.

    Keys other than the parameter names are ignored here; callers that
    accept only parameters should check for them first.
    """
    values: dict[str, float] = {}
    for key in PARAM_KEYS:
        if key in entries:
            raw, lineno = entries[key]
            values[key] = _parse_number(key, raw, f"{source}:{lineno}")
    missing = [k for k in ("delta", "mu", "sigma", "kappa") if k not in values]
    if missing:
        raise ParamError(f"{source}: missing required key(s): {', '.join(missing)}")
    return validate(ModelParams(**values))


def load_params(path: str | Path) -> ModelParams:
    entries = read_config(path)
    unknown = sorted(set(entries) - set(PARAM_KEYS))
    if unknown:
        raise ParamError(f"{path}: unknown key(s): {', '.join(unknown)}")
    return params_from_entries(entries, source=str(path))


def parse_overrides(
    items: Iterable[str], allowed: Iterable[str] = PARAM_KEYS
) -> dict[str, tuple[str, int]]:
    """Turn repeated ``key=value`` command-line overrides into config entries."""
    allowed = set(allowed)
    out: dict[str, tuple[str, int]] = {}
    for item in items:
        if "=" not in item:
            raise ParamError(f"override {item!r} is not key=value")
        key, value = (part.strip() for part in item.split("=", 1))
        if key not in allowed:
            raise ParamError(f"unknown override key {key!r}")
        out[key] = (value, 0)
    return out
