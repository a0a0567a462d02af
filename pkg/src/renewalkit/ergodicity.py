"""Invariant measure, Doeblin certificates, and total-variation decay.

For a rate bounded below by ``beta_min`` beyond the age ``a_star``, one
generation of resets already spreads mass over the age window [0, eta]:
for every probability measure mu and every eta > 0,

    mu M_{t0} >= c * nu,   t0 = a_star + eta,
    c = eta * beta_min * exp(-beta_max * (a_star + eta)),

with nu the uniform probability measure on [0, eta].  A conservative
semigroup with such a minorization contracts total variation between
equal-mass measures at the rate alpha = -log(1 - c) / t0:

    TV(mu1 M_t, mu2 M_t) <= exp(-alpha (t - t0)) TV(mu1, mu2).

The window eta is free; ``best_certificate`` optimizes the rate over it
(dense scan kept authoritative, golden-section used to polish).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .dual import evolve_dual
from .exceptions import ContractError
from .forward import solve_orbit
from .hazard import HazardRate
from .measures import SignedMeasure, TestFunction, trapezoid_sum

EPS_MINORIZATION = 1e-6
EPS_TV = 1e-4


@dataclass
class DoeblinCertificate:
    """The constants (eta, t0, c, alpha) of one minorization window.

    ``nu`` is the uniform probability measure on [0, eta]; it is kept
    as a quadrature rule rather than a grid object so the certificate
    does not depend on any measure grid.
    """

    eta: float
    t0: float
    c: float
    alpha: float

    def nu_integral(self, f, n_quad: int = 4096) -> float:
        """Integral of f against the uniform probability on [0, eta]."""
        x = np.linspace(0.0, self.eta, n_quad + 1)
        return trapezoid_sum(np.asarray(f(x), dtype=float), self.eta / n_quad) / self.eta

    def nu_measure(self, *, A_max: float, h_a: float) -> SignedMeasure:
        return SignedMeasure.uniform(0.0, self.eta, A_max=A_max, h_a=h_a)

    def bound(self, t, tv0: float = 1.0):
        """The decay envelope exp(-alpha (t - t0)) * tv0."""
        return np.exp(-self.alpha * (np.asarray(t, dtype=float) - self.t0)) * tv0


def stationary(rate: HazardRate) -> SignedMeasure:
    """The invariant probability measure: density proportional to
    exp(-B(a)), normalized to unit mass in the discrete functional."""
    n = rate.n_main
    dens = rate.expnegB_pad[: n + 1].copy()
    norm = trapezoid_sum(dens, rate.h_a)
    return SignedMeasure([], [], dens / norm, rate.h_a)


def certificate(rate: HazardRate, eta: float) -> DoeblinCertificate:
    """Evaluate the minorization constants for one window eta > 0."""
    if eta <= 0:
        raise ContractError("eta must be positive")
    if rate.beta_min <= 0:
        raise ContractError("the certificate needs beta_min > 0 (validate the rate)")
    t0 = rate.a_star + eta
    c = eta * rate.beta_min * math.exp(-rate.beta_max * t0)
    if not 0.0 < c < 1.0:
        raise ContractError(f"minorization constant c={c:g} outside (0, 1)")
    alpha = -math.log1p(-c) / t0
    return DoeblinCertificate(eta=eta, t0=t0, c=c, alpha=alpha)


def decay_rate(rate: HazardRate, eta: float) -> float:
    return certificate(rate, eta).alpha


def best_certificate(rate: HazardRate, *, eta_max: float | None = None,
                     scan_points: int = 2000) -> DoeblinCertificate:
    """Certificate with the largest contraction rate over eta.

    A dense scan over (0, eta_max] is authoritative (the rate profile
    is not guaranteed unimodal); a bounded golden-section refinement
    around the scan winner polishes the location.
    """
    if eta_max is None:
        eta_max = max(5.0 / rate.beta_max, 2.0 * rate.a_star + 1e-3)
    etas = np.linspace(eta_max / scan_points, eta_max, scan_points)
    alphas = np.array([decay_rate(rate, e) for e in etas])
    k = int(np.argmax(alphas))
    lo = etas[max(0, k - 1)]
    hi = etas[min(len(etas) - 1, k + 1)]
    res = minimize_scalar(lambda e: -decay_rate(rate, e), bounds=(lo, hi),
                          method="bounded", options={"xatol": 1e-12})
    best_eta = float(res.x) if -res.fun >= alphas[k] else float(etas[k])
    return certificate(rate, best_eta)


@dataclass
class MinorizationReport:
    """Margins min_a M_{t0} f(a) - c * nu(f) over a battery of
    nonnegative test functions."""

    t0: float
    c: float
    rows: list = field(default_factory=list)  # (name, nu_f, min_margin)
    a_check: float = 0.0

    @property
    def min_margin(self) -> float:
        return min(r[2] for r in self.rows) if self.rows else math.inf

    def passed(self, eps: float = EPS_MINORIZATION) -> bool:
        return self.min_margin >= -eps

    def __str__(self):
        lines = [f"minorization at t0={self.t0:g}, c={self.c:g}, "
                 f"ages up to {self.a_check:g}:"]
        for name, nuf, margin in self.rows:
            lines.append(f"  {name}: nu(f)={nuf:.6g}, margin={margin:.3e}")
        return "\n".join(lines)


def default_minorization_battery(eta: float) -> list[TestFunction]:
    """Nonnegative test functions probing the minorization: damped
    truncations, bumps inside and outside the window, exponentials."""
    from .measures import constant_function, exp_profile, smooth_bump, truncation_family

    one = constant_function(1.0)
    battery = [
        one,
        truncation_family(one, 1),
        truncation_family(one, 3),
        exp_profile(0.5),
        exp_profile(2.0),
        smooth_bump(0.5 * eta, 0.5 * eta),          # supported in [0, eta]
        smooth_bump(0.25 * eta, 0.25 * eta),
        smooth_bump(eta + 1.0, 0.9),                # supported beyond eta
        smooth_bump(3.0 * eta + 2.0, 1.5),
    ]
    return battery


def verify_minorization(rate: HazardRate, cert: DoeblinCertificate,
                        battery=None, *, a_check: float | None = None
                        ) -> MinorizationReport:
    """Evaluate M_{t0} f through the dual solver for each nonnegative f
    in the battery and report min_a M_{t0} f(a) - c * nu(f) over ages
    in [0, a_check]."""
    if battery is None:
        battery = default_minorization_battery(cert.eta)
    if a_check is None:
        a_check = rate.A_max - cert.t0
    report = MinorizationReport(t0=cert.t0, c=cert.c, a_check=a_check)
    for f in battery:
        name = getattr(f, "name", "f")
        probe = np.asarray(f(np.linspace(0.0, rate.A_max + cert.t0, 4097)), float)
        if np.any(probe < -1e-12):
            raise ContractError(f"battery function {name} is not nonnegative")
        prof = evolve_dual(f, rate, cert.t0)
        sel = prof.ages <= a_check + 1e-12
        nuf = cert.nu_integral(f)
        margin = float(np.min(prof.values[sel])) - cert.c * nuf
        report.rows.append((name, nuf, margin))
    return report


@dataclass
class DecayRow:
    t: float
    tv: float
    bound: float


@dataclass
class DecayTable:
    """Measured TV distances against the certificate envelope."""

    rows: list
    tv0: float
    cert: DoeblinCertificate

    @property
    def times(self):
        return np.array([r.t for r in self.rows])

    @property
    def tvs(self):
        return np.array([r.tv for r in self.rows])

    @property
    def bounds(self):
        return np.array([r.bound for r in self.rows])

    def max_excess(self) -> float:
        """Largest violation of the envelope (negative when all rows
        sit below their bound)."""
        return float(np.max(self.tvs - self.bounds))

    def fitted_rate(self) -> float:
        """Decay rate from a least-squares line through log TV, using
        only rows safely above round-off."""
        keep = self.tvs > 1e-13
        t = self.times[keep]
        y = np.log(self.tvs[keep])
        if len(t) < 2:
            return math.inf
        slope = np.polyfit(t, y, 1)[0]
        return float(-slope)


def tv_decay_experiment(mu1: SignedMeasure, mu2: SignedMeasure,
                        rate: HazardRate, cert: DoeblinCertificate,
                        times) -> DecayTable:
    """Evolve two equal-mass measures and tabulate TV(mu1 M_t, mu2 M_t)
    against the certificate bound exp(-alpha (t - t0)) TV(mu1, mu2)."""
    if abs(mu1.mass() - mu2.mass()) > 1e-9:
        raise ContractError(
            f"the contraction statement needs equal masses; got "
            f"{mu1.mass():.12g} and {mu2.mass():.12g}"
        )
    times = sorted(float(t) for t in times)
    if times and times[0] < 0:
        raise ContractError("times must be nonnegative")
    horizon = max(times) if times else 0.0
    orbit1 = solve_orbit(mu1, rate, horizon) if horizon > 0 else None
    orbit2 = solve_orbit(mu2, rate, horizon) if horizon > 0 else None
    tv0 = (mu1 - mu2).tv_norm()
    rows = []
    for t in times:
        if t == 0 or orbit1 is None:
            diff = mu1 - mu2
        else:
            diff = orbit1.measure_at(t) - orbit2.measure_at(t)
        rows.append(DecayRow(t=t, tv=diff.tv_norm(), bound=float(cert.bound(t, tv0))))
    return DecayTable(rows=rows, tv0=tv0, cert=cert)
