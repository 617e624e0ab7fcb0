"""Command-line entry point: ``liquidspeed solve|simulate|sweep|check``.

Exit status: 0 success, 1 cross-check / statistical / claim failure,
2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import secrets
import sys
from contextlib import contextmanager
from typing import Iterator, TextIO

from . import analytic, rng, solver
from . import simulator as sim
from . import sweep as sw
from .params import (
    PARAM_KEYS,
    REGIMES,
    ModelParams,
    ParamError,
    Regime,
    params_from_entries,
    parse_overrides,
    read_config,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

SWEEP_KEYS = (
    "sweep_var",
    "grid",
    "regimes",
    "with_simulation",
    "sim_trials",
    "seed",
    "fuzz_draws",
    "fuzz_seed",
)
LAMBDA_RTOL = 1e-6
ASK_TOL = 1e-8  # times sigma
Z_LIMIT = 4.0


def _u64(text: str) -> int:
    try:
        return rng.check_seed(int(text, 0))
    except (ValueError, TypeError):
        raise argparse.ArgumentTypeError(f"not a 64-bit unsigned integer: {text!r}") from None


def _positive_int(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        n = 0
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="liquidspeed",
        description="Equilibria, simulation and regime comparisons for the two-HFT speed race.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="{solve,simulate,sweep,check}")
    helps = {
        "solve": "closed-form equilibria with numerical cross-check",
        "simulate": "Monte Carlo estimates at the analytic equilibrium",
        "sweep": "write a parameter-sweep CSV",
        "check": "verify the cross-regime claims over a sweep and/or fuzz",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text, description=text)
        p.add_argument("--config", required=True, metavar="PATH")
        p.add_argument("--out", metavar="PATH", help="output file (default: standard output)")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", dest="overrides")
        p.add_argument("--regime", choices=("pc", "od", "both"), default="both")
        p.add_argument("--trials", type=_positive_int, metavar="N")
        p.add_argument("--seed", type=_u64, metavar="U64")
        if name == "simulate":
            p.add_argument("--trace", metavar="PATH", help="write one CSV record per trial")
    return parser


def _regimes(choice: str) -> tuple[Regime, ...]:
    return REGIMES if choice == "both" else (Regime.parse(choice),)


def _fmt(x: float) -> str:
    return f"{x:.6g} [{x!r}]"


@contextmanager
def _output(path: str | None) -> Iterator[TextIO]:
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def _load_entries(args, allowed: tuple[str, ...]) -> dict[str, tuple[str, int]]:
    entries = read_config(args.config)
    unknown = sorted(set(entries) - set(allowed))
    if unknown:
        raise ParamError(f"{args.config}: unknown key(s): {', '.join(unknown)}")
    entries.update(parse_overrides(args.overrides, allowed))
    return entries


def _params(args, allowed: tuple[str, ...] = PARAM_KEYS) -> tuple[ModelParams, dict]:
    entries = _load_entries(args, allowed)
    return params_from_entries(entries, source=args.config), entries


def cmd_solve(args) -> int:
    params, _ = _params(args)
    cfg = solver.SolverConfig()
    buf = io.StringIO()
    ok = True
    buf.write(f"params: {_param_line(params)}\n")
    for regime in _regimes(args.regime):
        ep = analytic.equilibrium_point(params, regime)
        try:
            ask_res, lam_res = solver.solve(params, regime, cfg)
        except solver.SolverError as exc:
            buf.write(f"[{regime.label}] solver failed: {exc}\n")
            ok = False
            continue
        lam_err = abs(lam_res.value - ep.lambda_star) / ep.lambda_star
        ask_err = abs(ask_res.value - ep.ask) / params.sigma
        foc = solver.foc_residual_fd(params, regime, lam_res.value, ask_res.value)
        agree = (
            lam_res.converged and ask_res.converged and lam_err <= LAMBDA_RTOL and ask_err <= ASK_TOL
        )
        ok &= agree
        buf.write(f"[{regime.label}]\n")
        for name, value in (
            ("ask", ep.ask),
            ("ask_abs", ep.ask_abs),
            ("spread", ep.spread),
            ("lambda_star", ep.lambda_star),
            ("speed_price", ep.speed_price),
            ("expected_rental_time", ep.expected_rental_time),
            ("resource_usage", ep.resource_usage),
            ("price_discovery_time", ep.price_discovery_time),
            ("hft_rent", ep.hft_rent),
        ):
            buf.write(f"  {name:<22} {_fmt(value)}\n")
        buf.write(f"  {'solver_ask':<22} {_fmt(ask_res.value)} rel_err={ask_err:.3g}\n")
        buf.write(
            f"  {'solver_lambda':<22} {_fmt(lam_res.value)} rel_err={lam_err:.3g}"
            f" iterations={lam_res.iterations}\n"
        )
        buf.write(f"  {'foc_residual':<22} {foc:.3g}\n")
        buf.write(f"  agreement {'PASS' if agree else 'FAIL'}\n")
    buf.write(f"overall: {'PASS' if ok else 'FAIL'}\n")
    with _output(args.out) as out:
        out.write(buf.getvalue())
    return EXIT_OK if ok else EXIT_FAIL


def _param_line(params: ModelParams) -> str:
    return " ".join(f"{k}={getattr(params, k)!r}" for k in PARAM_KEYS)


def _json_num(x: float) -> float | None:
    return x if math.isfinite(x) else None


def cmd_simulate(args) -> int:
    params, _ = _params(args)
    seed = args.seed
    if seed is None:
        seed = secrets.randbits(64)
        print(f"seed: {seed}", file=sys.stderr)
    trials = args.trials or 100_000
    report: dict = {"params": params.as_dict(), "seed": seed, "trials": trials, "regimes": {}}
    ok = True
    gated = trials > 1
    for regime in _regimes(args.regime):
        cfg = sim.SimConfig.at_equilibrium(params, regime, trials, seed)
        batch = sim.simulate(params, cfg)
        if args.trace:
            path = args.trace if len(_regimes(args.regime)) == 1 else f"{args.trace}.{regime.value}"
            sim.write_trace_file(batch, path)
        targets = sim.expected_values(params, cfg)
        entries = {}
        for name, est in sim.estimate_all(params, cfg, batch).items():
            z = est.z_score(targets[name])
            # degenerate estimates (n < 2) carry no standard error to gate on
            passed = None if est.degenerate else bool(abs(z) <= Z_LIMIT)
            if gated and passed is not None:
                ok &= passed
            entries[name] = {
                "mean": _json_num(est.mean),
                "std_error": _json_num(est.std_error),
                "n": est.n,
                "target": targets[name],
                "z": _json_num(z),
                "pass": passed,
            }
        report["regimes"][regime.value] = {
            "lambda_m": cfg.lambda_m,
            "lambda_b": cfg.lambda_b,
            "ask": cfg.ask,
            "estimates": entries,
        }
    if gated:
        report["passed"] = ok
    else:
        report["passed"] = None
        report["note"] = "standard errors undefined for n=1; no statistical gate applied"
    with _output(args.out) as out:
        out.write(json.dumps(report, indent=2) + "\n")
    _simulate_summary(report)
    return EXIT_OK if ok else EXIT_FAIL


def _simulate_summary(report: dict) -> None:
    for regime, block in report["regimes"].items():
        for name, e in block["estimates"].items():
            z = e["z"]
            ztxt = "  n/a" if z is None else f"{z:+.2f}"
            mean = "nan" if e["mean"] is None else f"{e['mean']:.6g}"
            print(f"[{regime}] {name:<18} {mean:>12} target {e['target']:.6g} z={ztxt}", file=sys.stderr)


def _sweep_spec(args, entries: dict, params: ModelParams, require_grid: bool = True) -> sw.SweepSpec | None:
    def raw(key: str, default: str | None = None) -> str | None:
        return entries[key][0] if key in entries else default

    grid_text = raw("grid")
    if grid_text is None:
        if require_grid:
            raise ParamError("grid must be nonempty")
        return None
    grid = sw.parse_grid(grid_text)
    regimes = tuple(Regime.parse(r) for r in raw("regimes", "pc,od").split(","))
    if args.regime != "both":
        regimes = _regimes(args.regime)
    with_sim = raw("with_simulation", "false").strip().lower() in ("1", "true", "yes", "on")
    try:
        trials = args.trials or int(raw("sim_trials", "100000"))
        seed = args.seed if args.seed is not None else int(raw("seed", "0"), 0)
    except ValueError as exc:
        raise ParamError(f"bad integer in sweep config: {exc}") from None
    return sw.SweepSpec(
        base=params,
        sweep_var=raw("sweep_var", "delta").strip(),
        grid=grid,
        regimes=regimes,
        with_simulation=with_sim,
        sim_trials=trials,
        seed=seed,
    )


def cmd_sweep(args) -> int:
    params, entries = _params(args, PARAM_KEYS + SWEEP_KEYS)
    spec = _sweep_spec(args, entries, params)
    rows = sw.run_sweep(spec)
    with _output(args.out) as out:
        sw.write_csv(rows, out)
    return EXIT_OK


def cmd_check(args) -> int:
    params, entries = _params(args, PARAM_KEYS + SWEEP_KEYS)
    if args.regime != "both":
        raise ParamError("check compares regimes; --regime must be both")
    spec = _sweep_spec(args, entries, params, require_grid="fuzz_draws" not in entries)
    rows = []
    if spec is not None:
        rows += sw.run_sweep(spec)
    if "fuzz_draws" in entries:
        try:
            draws = int(entries["fuzz_draws"][0])
            fuzz_seed = int(entries.get("fuzz_seed", ("0", 0))[0], 0)
        except ValueError as exc:
            raise ParamError(f"bad integer in fuzz settings: {exc}") from None
        if draws < 1:
            raise ParamError("fuzz_draws must be >= 1")
        rows += sw.fuzz_rows(draws, fuzz_seed, base=params)
    report = sw.check_claims(rows)
    sys.stdout.write(report.to_text())
    if args.out:
        with _output(args.out) as out:
            out.write(report.to_json())
    return EXIT_OK if report.passed else EXIT_FAIL


COMMANDS = {"solve": cmd_solve, "simulate": cmd_simulate, "sweep": cmd_sweep, "check": cmd_check}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ParamError, ValueError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
