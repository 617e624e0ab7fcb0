import itertools

import pytest

from liquidspeed import analytic as an
from liquidspeed import solver
from liquidspeed.params import OD, PC, make_params

CFG = solver.SolverConfig()
SMALL_GRID = [
    make_params(delta=d, mu=m, sigma=s, kappa=k)
    for d, m, s, k in itertools.product([0.5, 8], [0.5, 4], [0.5, 2], [0.1, 1])
]


def test_config_validation():
    with pytest.raises(ValueError):
        solver.SolverConfig(tol=0)
    with pytest.raises(ValueError):
        solver.SolverConfig(max_iters=0)
    with pytest.raises(ValueError):
        solver.SolverConfig(damping=1.5)


def test_maximize_unimodal_parabola():
    x, evals, width = solver.maximize_unimodal(lambda t: -(t - 0.3) ** 2, 0.0, 5.0, tol=1e-12)
    assert x == pytest.approx(0.3, rel=1e-10)
    assert width <= 1e-11
    assert evals < 500


def test_best_response_baseline(base):
    res = solver.best_response_pc(base, 1 / 3)
    assert res.converged and res.residual <= CFG.tol
    assert res.value == pytest.approx(1 / 3, rel=1e-8)
    # the symmetric first-order condition holds at the returned point
    lam, d, m, s, k = res.value, 2, 2, 1, 0.25
    assert d * m * s / (4 * lam * (d + m) ** 2) == pytest.approx(k * (3 * lam + d) / (d + m), rel=1e-7)


def test_best_response_is_local_max(base):
    ask = an.ask_star(base)
    for other in (0.05, 1 / 3, 1.0):
        lam = solver.best_response_pc(base, other, ask=ask).value
        f = solver.pc_ex_ante_payoff(base, ask, lam, other)
        assert f >= solver.pc_ex_ante_payoff(base, ask, lam * 1.01, other)
        assert f >= solver.pc_ex_ante_payoff(base, ask, lam * 0.99, other)


def test_best_response_shrinks_against_fast_opponent(base):
    ask = an.ask_star(base)
    # speeds are complements against a slow opponent and substitutes beyond ~0.3
    values = [solver.best_response_pc(base, o, ask=ask).value for o in (0.3, 0.5, 0.8, 1.0)]
    assert all(b < a for a, b in zip(values, values[1:]))
    # past some opponent speed every positive own speed loses money: corner at 0
    for other in (2, 10, 1000):
        assert solver.best_response_pc(base, other, ask=ask).value < 1e-12


def test_best_response_rejects_nonpositive_opponent(base):
    with pytest.raises(ValueError):
        solver.best_response_pc(base, 0.0)


def test_bracket_auto_expands(base):
    tight = solver.SolverConfig(bracket_hi=1e-3)
    res = solver.best_response_pc(base, 1 / 3, tight, ask=0.5)
    assert res.value == pytest.approx(1 / 3, rel=1e-8)


def test_bracket_expansion_failure():
    with pytest.raises(solver.SolverError, match="still increasing"):
        solver._expand_bracket(lambda x: x, 1.0)


@pytest.mark.parametrize("delta", [2, 1])
def test_symmetric_equilibrium_pc(delta):
    p = make_params(delta=delta, mu=2, sigma=1, kappa=0.25)
    res = solver.symmetric_equilibrium_pc(p)
    assert res.converged
    assert res.value == pytest.approx(1 / 3, abs=1e-6)
    assert res.value == pytest.approx(an.lambda_pc_star(p), rel=1e-8)


@pytest.mark.parametrize("lambda0", [0.01, 0.1, 1, 10])
def test_pc_start_independence(base, lambda0):
    res = solver.symmetric_equilibrium_pc(base, lambda0=lambda0)
    assert res.converged and res.value == pytest.approx(1 / 3, rel=1e-8)


def test_race_stage_baseline(base):
    res, lb, lm = solver.race_stage_od(base, 0.5, both=True)
    assert res.converged
    assert res.value == pytest.approx(0.5, rel=1e-8)
    # first-order condition of the bandit's conditional payoff
    assert lm / (lb + lm) ** 2 * (1 - 0.5) - 0.25 == pytest.approx(0, abs=1e-8)


def test_race_stage_near_sigma(base):
    values = [solver.race_stage_od(base, a).value for a in (0.9, 0.99, 0.999999)]
    assert all(b < a for a, b in zip(values, values[1:]))
    assert 0 < values[-1] < 1e-5
    assert values[-1] == pytest.approx(1e-6, rel=1e-6)


@pytest.mark.parametrize("ask", [1.0, 1.5, -0.1])
def test_race_stage_rejects_bad_ask(base, ask):
    with pytest.raises(ValueError, match="ask"):
        solver.race_stage_od(base, ask)


def test_indifference_ask_baseline(base):
    for regime in (PC, OD):
        res = solver.indifference_ask(base, regime)
        assert res.converged
        assert abs(res.value - 0.5) <= 1e-8


def test_pc_indifference_ignores_held_speed(base):
    values = [solver.indifference_ask(base, PC, hold_lambda=h).value for h in (0.1, 1 / 3, 2)]
    assert max(values) - min(values) <= 1e-10


def test_od_trace_satisfies_race_identity(base):
    p = make_params(delta=1, mu=3, sigma=2, kappa=0.5)
    for params in (base, p):
        res = solver.indifference_ask(params, OD)
        assert len(res.trace) >= 3
        for ask, lb, lm in res.trace:
            target = (params.sigma - ask) / (4 * params.kappa)
            lam = 0.5 * (lb + lm)
            assert abs(lam - target) <= CFG.tol * lam


def test_foc_residual_signs(base):
    lam = 1 / 3
    assert abs(solver.foc_residual_fd(base, PC, lam, 0.5)) < 1e-4
    assert solver.foc_residual_fd(base, PC, 2 * lam, 0.5) < 0
    assert solver.foc_residual_fd(base, PC, lam / 2, 0.5) > 0
    assert abs(solver.foc_residual_fd(base, OD, 0.5, 0.5)) < 1e-4
    assert solver.foc_residual_fd(base, OD, 1.0, 0.5) < 0
    assert solver.foc_residual_fd(base, OD, 0.25, 0.5) > 0
    with pytest.raises(ValueError):
        solver.foc_residual_fd(base, PC, 0.0, 0.5)


@pytest.mark.parametrize("p", SMALL_GRID)
def test_solve_matches_closed_forms(p):
    for regime in (PC, OD):
        ask_res, lam_res = solver.solve(p, regime)
        for res in (ask_res, lam_res):
            assert not res.converged or res.residual <= CFG.tol
        assert ask_res.converged and lam_res.converged
        closed = an.lambda_star(p, regime)
        assert abs(lam_res.value - closed) / closed <= 1e-6
        assert abs(ask_res.value - an.ask_star(p)) <= 1e-8 * p.sigma


@pytest.mark.parametrize("p", SMALL_GRID)
def test_payoff_concave_in_own_speed(p):
    # three-point test on (0, 2 lambda*] against a symmetric opponent
    for regime in (PC, OD):
        lam = an.lambda_star(p, regime)
        ask = an.ask_star(p)
        if regime is PC:
            def f(x):
                return solver.pc_ex_ante_payoff(p, ask, x, lam)
        else:
            def f(x):
                return an.payoff_bandit_od(p, ask, x, lam)
        xs = [2 * lam * i / 40 for i in range(1, 41)]
        h = lam / 40
        for x in xs[1:-1]:
            assert f(x - h) + f(x + h) - 2 * f(x) <= 1e-12 * max(1.0, abs(f(x)))


def test_non_convergence_reported(base):
    res = solver.symmetric_equilibrium_pc(base, solver.SolverConfig(max_iters=2))
    assert not res.converged
    assert res.iterations == 2
