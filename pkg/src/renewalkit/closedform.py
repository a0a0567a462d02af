"""Closed-form references for a constant reset rate.

For ``beta == b0`` the age process is a Poisson clock: the age at time t
either kept growing (probability ``exp(-b0*t)``) or equals the backward
recurrence time of the last reset, whose density is ``b0*exp(-b0*a)`` on
[0, t).  Everything below follows from that observation and is computed
independently of the grid solvers (adaptive quadrature, no shared code),
so these functions serve as oracles in the test suite.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import quad

from .measures import SignedMeasure


def dual_value(f0, t: float, a, beta0: float = 1.0) -> np.ndarray:
    """Value of the dual action on f0 at time t and ages a:

        exp(-b0 t) f0(a + t) + int_0^t b0 exp(-b0 u) f0(u) du.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    tail = np.exp(-beta0 * t) * np.asarray(f0(a + t), dtype=float)
    reset, _ = quad(lambda u: beta0 * np.exp(-beta0 * u) * float(f0(np.array(u))),
                    0.0, t, epsabs=1e-14, epsrel=1e-13, limit=200)
    return tail + reset


def flux_value(mass: float, beta0: float = 1.0) -> float:
    """Boundary flux of any initial measure of the given mass: constant."""
    return beta0 * mass


def evolved_from_dirac(a0: float, t: float, *, beta0: float = 1.0,
                       A_max: float, h_a: float) -> SignedMeasure:
    """Exact evolution of a unit Dirac at age a0: a survivor atom at
    a0 + t of weight exp(-b0 t) plus the newborn density
    b0 exp(-b0 a) on [0, t)."""
    n = int(round(A_max / h_a))
    ages = np.arange(n + 1) * h_a
    dens = np.where(ages < t, beta0 * np.exp(-beta0 * ages), 0.0)
    j = int(round(t / h_a))
    if 0 <= j <= n and abs(j * h_a - t) < 1e-12:
        dens[j] = 0.5 * beta0 * np.exp(-beta0 * t)
    return SignedMeasure([a0 + t], [np.exp(-beta0 * t)], dens, h_a)


def newborn_density(a, t: float, mass: float = 1.0, beta0: float = 1.0):
    """Newborn layer of the evolved measure on [0, t)."""
    a = np.asarray(a, dtype=float)
    return np.where(a < t, mass * beta0 * np.exp(-beta0 * a), 0.0)


def stationary_density(a, beta0: float = 1.0):
    a = np.asarray(a, dtype=float)
    return beta0 * np.exp(-beta0 * a)


def tv_distance_dirac_to_stationary(t: float, beta0: float = 1.0) -> float:
    """TV distance between the evolution of any unit Dirac and the
    stationary law: the newborn layers coincide, leaving the survivor
    atom plus the stationary tail mass, each exp(-b0 t)."""
    return 2.0 * np.exp(-beta0 * t)


def measure_dirac_pairing(a0: float, f0, t: float, beta0: float = 1.0) -> float:
    """The pairing of the evolved Dirac with f0 (equivalently, of the
    Dirac with the dual action), via adaptive quadrature."""
    tail = np.exp(-beta0 * t) * float(f0(np.array(a0 + t)))
    reset, _ = quad(lambda u: beta0 * np.exp(-beta0 * u) * float(f0(np.array(u))),
                    0.0, t, epsabs=1e-14, epsrel=1e-13, limit=200)
    return tail + reset
