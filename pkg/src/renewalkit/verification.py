"""The cross-cutting invariant suite behind the ``verify`` command.

Each check pairs a measured residual with its tolerance; the report
carries one row per check so callers (CLI, tests) can render or assert
uniformly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import Scenario
from .dual import evolve_dual
from .exceptions import ContractError
from .ergodicity import (certificate, stationary, tv_decay_experiment,
                         verify_minorization)
from .forward import duality_gap, meassol_residual, solve_orbit
from .measures import TestFunction, constant_function, exp_profile


@dataclass
class CheckRow:
    name: str
    value: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.value <= self.tol

    def line(self) -> str:
        status = "pass" if self.passed else "FAIL"
        return (f"check={self.name} residual={self.value:.6e} "
                f"tol={self.tol:.1e} status={status}")


@dataclass
class VerifyReport:
    rows: list = field(default_factory=list)

    def add(self, name: str, value: float, tol: float):
        self.rows.append(CheckRow(name, float(value), float(tol)))

    @property
    def ok(self) -> bool:
        return all(r.passed for r in self.rows)

    def lines(self):
        return [r.line() for r in self.rows]


def run_verification(scenario: Scenario) -> VerifyReport:
    """Run the full invariant suite on one scenario: conservation,
    semigroup law, duality pairing, weak-solution residual,
    minorization, and the TV decay bound."""
    nm = scenario.numerics
    rate = scenario.rate
    mu = scenario.measure
    times = scenario.times or [1.0]
    report = VerifyReport()

    horizon = max(times)
    orbit = solve_orbit(mu, rate, horizon)
    m0 = mu.mass()
    worst = max(abs(orbit.mass_at(t) - m0) for t in times)
    report.add("conservation", worst, nm.tol_mass)

    f_exp = exp_profile(1.0)
    t1 = times[0]
    s1 = times[1] if len(times) > 1 else times[0]
    direct = evolve_dual(f_exp, rate, t1 + s1)
    inner = evolve_dual(f_exp, rate, s1)
    composed = evolve_dual(inner, rate, t1)
    n_cmp = int(round((rate.A_max - (t1 + s1)) / rate.h_a))
    if n_cmp < 1:
        raise ContractError(
            "verify times reach the truncation age; shrink the times or "
            "enlarge A_max"
        )
    semi = float(np.max(np.abs(direct.values[:n_cmp] - composed.values[:n_cmp])))
    report.add("semigroup", semi, nm.eps_tv)

    battery = [constant_function(1.0), f_exp,
               TestFunction(lambda a: 1.0 / (1.0 + a), name="1/(1+a)")]
    gap = max(duality_gap(mu, f, rate, t) for f in battery for t in times[:2])
    report.add("duality_gap", gap, nm.eps_tv)

    resid = meassol_residual(mu, f_exp, rate, times[0])
    report.add("weak_residual", resid, nm.eps_tv)

    cert = certificate(rate, scenario.eta)
    minor = verify_minorization(rate, cert)
    report.add("minorization", -minor.min_margin, nm.eps_minor)

    mu_inf = stationary(rate)
    table = tv_decay_experiment(mu.normalized() if abs(m0 - 1) > 1e-12 else mu,
                                mu_inf, rate, cert, times)
    report.add("tv_decay_bound", table.max_excess(), nm.eps_tv)
    return report
