"""Independent Monte Carlo simulation of the age process.

Each path carries an age that grows at unit speed and is reset to zero
at rate beta(age).  The reset clock is sampled exactly by thinning:
candidate events arrive at the constant rate beta_max and are accepted
with probability beta(age)/beta_max, so only the upper bound is needed,
never the inverse of the cumulative hazard.

The ensemble is a ground-truth check on both PDE solvers: the final-age
law equals the evolved measure, without sharing any code with the grid
schemes.

Determinism: draws are consumed in a fixed layout - first the initial
ages (one block of N), then whole columns of N exponentials and N
uniforms per thinning round - so the ensemble is a pure function of
(seed, N, path index) regardless of how many paths are still active.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ContractError
from .hazard import HazardRate
from .measures import SignedMeasure

_PROB_TOL = 1e-9


@dataclass
class PathEnsemble:
    """Final ages of N simulated paths plus bookkeeping."""

    ages: np.ndarray
    n: int
    seed: int
    t: float
    resets: np.ndarray  # number of accepted resets per path

    def empirical_cdf(self, x, side: str = "right") -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        srt = np.sort(self.ages)
        return np.searchsorted(srt, x, side=side) / self.n


def _sample_initial_ages(mu: SignedMeasure, u: np.ndarray) -> np.ndarray:
    """Inverse-CDF sampling of atoms plus piecewise-linear density.

    Each cell of the density grid is inverted exactly (the CDF is
    quadratic on a cell), so the sample follows the gridded density, not
    a histogram of it.
    """
    atom_mass = float(mu.atom_weights.sum())
    total = mu.mass()
    out = np.empty(len(u))
    threshold = atom_mass / total
    take_atom = u < threshold if atom_mass > 0 else np.zeros(len(u), bool)
    if atom_mass > 0:
        cum_w = np.cumsum(mu.atom_weights) / total
        idx = np.searchsorted(cum_w, u[take_atom], side="right")
        idx = np.minimum(idx, len(mu.atom_locations) - 1)
        out[take_atom] = mu.atom_locations[idx]
    rest = ~take_atom
    if np.any(rest):
        h = mu.h_a
        dens = mu.density
        cell_mass = 0.5 * h * (dens[1:] + dens[:-1])
        cum = np.concatenate([[0.0], np.cumsum(cell_mass)])
        target = (u[rest] - threshold) * total  # mass to accumulate in density
        target = np.clip(target, 0.0, cum[-1] * (1 - 1e-15))
        cell = np.searchsorted(cum, target, side="right") - 1
        cell = np.clip(cell, 0, len(cell_mass) - 1)
        resid = target - cum[cell]
        d0 = dens[cell]
        d1 = dens[cell + 1]
        slope = (d1 - d0) / h
        # solve 0.5*slope*x^2 + d0*x = resid for x in [0, h]
        with np.errstate(invalid="ignore", divide="ignore"):
            disc = np.maximum(d0 * d0 + 2.0 * slope * resid, 0.0)
            x_quad = (np.sqrt(disc) - d0) / slope
            x_lin = resid / np.where(d0 > 0, d0, np.inf)
        x = np.where(np.abs(slope) > 1e-14 * np.maximum(np.abs(d0), 1.0),
                     x_quad, x_lin)
        x = np.clip(np.nan_to_num(x, nan=0.0), 0.0, h)
        out[rest] = cell * h + x
    return out


def simulate(mu_in: SignedMeasure, rate: HazardRate, t: float, n: int,
             seed: int) -> PathEnsemble:
    """Simulate n paths for time t from the probability measure mu_in.

    Raises unless mu_in is nonnegative with unit mass.  The result is
    reproducible for a given (seed, n).
    """
    if n < 1:
        raise ContractError("need at least one path")
    if t < 0:
        raise ContractError("time must be nonnegative")
    if abs(mu_in.mass() - 1.0) > _PROB_TOL:
        raise ContractError(f"initial measure has mass {mu_in.mass():.12g}, not 1")
    if np.any(mu_in.atom_weights < 0) or np.any(mu_in.density < -_PROB_TOL):
        raise ContractError("initial measure must be nonnegative")

    rng = np.random.default_rng(seed)
    ages = _sample_initial_ages(mu_in, rng.random(n))
    remaining = np.full(n, float(t))
    resets = np.zeros(n, dtype=np.int64)

    bmax = rate.beta_max
    if bmax > 0 and t > 0:
        active = remaining > 0
        while np.any(active):
            # full columns keep the draw layout independent of activity
            gaps = rng.standard_exponential(n) / bmax
            accept_u = rng.random(n)
            step = np.minimum(gaps, remaining)
            ages = np.where(active, ages + step, ages)
            remaining = np.where(active, remaining - step, remaining)
            proposal = active & (gaps == step) & (remaining >= 0)
            fire = proposal & (accept_u * bmax <= rate.beta(ages))
            ages = np.where(fire, 0.0, ages)
            resets += fire
            active = remaining > 0
    else:
        ages = ages + t
    return PathEnsemble(ages=ages, n=n, seed=seed, t=float(t), resets=resets)


def compare_cdf(ensemble: PathEnsemble, mu: SignedMeasure) -> float:
    """Kolmogorov statistic sup_x |F_n(x) - F(x)| between the empirical
    law of the ensemble and a probability measure.

    Both one-sided limits are compared at every sample point and atom,
    which is where the supremum of a difference of monotone step/smooth
    functions can occur.
    """
    if abs(mu.mass() - 1.0) > 1e-4:
        raise ContractError("compare_cdf expects a probability measure")
    candidates = np.unique(np.concatenate([ensemble.ages, mu.atom_locations]))
    stat = 0.0
    for side in ("left", "right"):
        emp = ensemble.empirical_cdf(candidates, side=side)
        ref = mu.cdf(candidates, side=side)
        stat = max(stat, float(np.max(np.abs(emp - ref))))
    # the gap as x -> infinity (mass beyond the last candidate)
    stat = max(stat, abs(1.0 - float(mu.cdf(np.array([np.inf]))[0])))
    return stat


def dkw_band(n: int, level: float = 1e-8) -> float:
    """Dvoretzky-Kiefer-Wolfowitz bound: with probability >= 1 - level
    the Kolmogorov statistic of n iid samples stays below this value."""
    return float(np.sqrt(np.log(2.0 / level) / (2.0 * n)))
