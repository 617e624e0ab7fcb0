import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from liquidspeed.params import (
    OD,
    PC,
    ModelParams,
    ParamError,
    Regime,
    load_params,
    parse_config_text,
    parse_overrides,
    params_from_entries,
    validate,
)


def test_baseline_params_valid():
    p = ModelParams(delta=2, mu=2, sigma=1, kappa=0.25, eta=1.5, v=0)
    assert validate(p) is p


@pytest.mark.parametrize(
    "kwargs, message",
    [
        (dict(delta=2, mu=2, sigma=1, kappa=0.25, eta=0.5), "eta must exceed sigma"),
        (dict(delta=0, mu=2, sigma=1, kappa=0.25, eta=2), "delta must be positive"),
        (dict(delta=2, mu=-1, sigma=1, kappa=0.25, eta=2), "mu must be positive"),
        (dict(delta=2, mu=2, sigma=0, kappa=0.25, eta=2), "sigma must be positive"),
        (dict(delta=2, mu=2, sigma=1, kappa=0, eta=2), "kappa must be positive"),
        (dict(delta=2, mu=2, sigma=1, kappa=0.25, eta=1.0), "eta must exceed sigma"),
    ],
)
def test_validate_reports_violated_constraint(kwargs, message):
    with pytest.raises(ParamError, match=message):
        validate(ModelParams(**kwargs))


@pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
def test_non_finite_rejected(bad):
    with pytest.raises(ParamError, match="finite"):
        validate(ModelParams(delta=bad, mu=2, sigma=1, kappa=0.25))


def test_eta_defaults_to_twice_sigma():
    p = ModelParams(delta=1, mu=1, sigma=1.5, kappa=1)
    assert p.eta == 3.0
    assert p.v == 0.0


positive = st.floats(min_value=1e-3, max_value=1e3, allow_nan=False)


@given(positive, positive, positive, positive, st.floats(-100, 100))
def test_validate_idempotent(d, m, s, k, v):
    p = ModelParams(delta=d, mu=m, sigma=s, kappa=k, v=v)
    assert validate(validate(p)) == validate(p)


def test_regime_parse():
    assert Regime.parse("PC") is PC
    assert Regime.parse("on-demand") is OD
    with pytest.raises(ParamError):
        Regime.parse("batch")


def test_config_parsing_comments_and_defaults(tmp_path):
    path = tmp_path / "p.cfg"
    path.write_text("# baseline\ndelta = 2\nmu=2  # trailing\n\nsigma = 1\nkappa = 0.25\n")
    p = load_params(path)
    assert (p.delta, p.mu, p.sigma, p.kappa, p.eta, p.v) == (2, 2, 1, 0.25, 2.0, 0.0)


def test_config_malformed_line_reports_location(tmp_path):
    path = tmp_path / "p.cfg"
    path.write_text("delta = 2\nmu 2\n")
    with pytest.raises(ParamError, match=r"p\.cfg:2"):
        load_params(path)


def test_config_bad_number_reports_key(tmp_path):
    path = tmp_path / "p.cfg"
    path.write_text("delta = two\nmu = 2\nsigma = 1\nkappa = 1\n")
    with pytest.raises(ParamError, match=r":1: delta must be a decimal"):
        load_params(path)


def test_config_missing_and_unknown_keys(tmp_path):
    path = tmp_path / "p.cfg"
    path.write_text("delta = 2\nmu = 2\nsigma = 1\n")
    with pytest.raises(ParamError, match="missing required key"):
        load_params(path)
    path.write_text("delta = 2\nmu = 2\nsigma = 1\nkappa = 1\ngamma = 3\n")
    with pytest.raises(ParamError, match="unknown key"):
        load_params(path)


def test_config_duplicate_key():
    with pytest.raises(ParamError, match="duplicate"):
        parse_config_text("delta = 1\ndelta = 2\n")


def test_overrides():
    entries = parse_config_text("delta = 2\nmu = 2\nsigma = 1\nkappa = 0.25\n")
    entries.update(parse_overrides(["delta=1"]))
    assert params_from_entries(entries).delta == 1.0
    with pytest.raises(ParamError, match="unknown override key"):
        parse_overrides(["zeta=1"])
    with pytest.raises(ParamError):
        parse_overrides(["delta"])
