"""Shared fixtures and exact-arithmetic oracles.

The oracles evaluate the published closed forms with Fractions (square roots
only where the radicand is a perfect rational square), independently of the
floating-point code paths under test.
"""

from fractions import Fraction as F
from math import isqrt

import pytest

from liquidspeed.params import ModelParams, make_params


def frac_sqrt(x: F) -> F:
    n, d = x.numerator, x.denominator
    rn, rd = isqrt(n), isqrt(d)
    if rn * rn != n or rd * rd != d:
        raise ValueError(f"{x} is not a perfect square")
    return F(rn, rd)


class Oracle:
    """Exact closed forms for rational parameters."""

    def __init__(self, delta, mu, sigma, kappa):
        self.d, self.m, self.s, self.k = (F(x) for x in (delta, mu, sigma, kappa))

    @property
    def p_news(self):
        return self.d / (self.d + self.m)

    def ask(self):
        return self.d * self.s / (self.d + self.m)

    def root(self):
        d, m, s, k = self.d, self.m, self.s, self.k
        return frac_sqrt(d * d + 3 * d * m * s / (k * (d + m)))

    def lam_pc(self):
        return (-self.d + self.root()) / 6

    def lam_od(self):
        return self.m * self.s / (4 * self.k * (self.d + self.m))

    def usage_pc(self):
        return self.p_news + (self.root() - self.d) / (3 * (self.d + self.m))

    def usage_od(self):
        return self.p_news

    def rent_pc(self):
        d, m, s, k = self.d, self.m, self.s, self.k
        return (d * k / (18 * (d + m))) * (d + 6 * m * s / (k * (d + m)) - self.root())

    def rent_od(self):
        d, m, s = self.d, self.m, self.s
        return d * m * s / (4 * (d + m) ** 2)

    def rental_pc(self, li, lo):
        li, lo = F(li), F(lo)
        return 1 / (self.d + self.m) + self.p_news / (li + lo)

    def cost_rate(self, li, lo):
        li, lo = F(li), F(lo)
        return self.k * li * (li + lo)


@pytest.fixture
def base() -> ModelParams:
    return make_params(delta=2, mu=2, sigma=1, kappa=0.25, eta=1.5)


@pytest.fixture
def base_oracle() -> Oracle:
    return Oracle(2, 2, 1, F(1, 4))


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line for an acceptance criterion and assert it."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def report(label: str, ok: bool, detail: str) -> None:
        line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
        lines.append(line)
        print(line)
        assert ok, line

    return report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
