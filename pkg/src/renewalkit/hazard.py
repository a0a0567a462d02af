"""Division (reset) rates with certified bounds and cumulative hazard.

A rate is a continuous function ``beta`` on ages with declared constants
``beta_min``, ``beta_max`` and ``a_star`` such that

    beta_min * 1[a >= a_star] <= beta(a) <= beta_max.

``a_star = 0`` is the admissible flag for rates bounded below everywhere.
The cumulative hazard ``B(a) = int_0^a beta`` is accumulated by the
trapezoidal rule on a padded grid ``[0, A_max + horizon]`` so every
survival factor the solvers need is a grid lookup; between nodes ``B``
is interpolated linearly (exact at nodes for piecewise-linear rates).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ContractError, DomainError
from .measures import DEFAULT_A_MAX, DEFAULT_H_A

DEFAULT_HORIZON = 10.0

# Tail-mass bound that the default truncation age must satisfy; the
# constructor warns when exp(-beta_min * (A_max - a_star)) exceeds it.
TAIL_MASS_BOUND = 1e-10


@dataclass
class ValidationReport:
    """Outcome of checking a rate's declared bounds on the grid."""

    ok: bool
    violations: list = field(default_factory=list)

    def add(self, age: float, code: str, message: str):
        self.ok = False
        self.violations.append((float(age), code, message))

    def __str__(self):
        if self.ok:
            return "rate validation: pass"
        lines = [f"rate validation: FAIL ({len(self.violations)} violations)"]
        for age, code, msg in self.violations[:20]:
            lines.append(f"  [{code}] at age {age:.6g}: {msg}")
        if len(self.violations) > 20:
            lines.append(f"  ... and {len(self.violations) - 20} more")
        return "\n".join(lines)


class HazardRate:
    """A reset-rate function with precomputed cumulative hazard.

    Parameters
    ----------
    fn : callable
        Vectorized evaluator of beta.
    beta_min, beta_max : float
        Declared lower bound beyond ``a_star`` and global upper bound.
    a_star : float
        Age beyond which ``beta >= beta_min``; 0 means the lower bound
        holds everywhere.
    A_max, h_a : float
        Truncation age and grid step of the measures this rate will be
        paired with.
    horizon : float
        Extra padding of the hazard grid; all solver lookups for times
        up to ``horizon`` stay on the grid.
    """

    def __init__(self, fn, *, beta_min, beta_max, a_star,
                 A_max=DEFAULT_A_MAX, h_a=DEFAULT_H_A,
                 horizon=DEFAULT_HORIZON, name="beta"):
        if beta_min < 0 or beta_max < 0:
            raise ContractError("rate bounds must be nonnegative")
        if beta_max < beta_min:
            raise ContractError("beta_max < beta_min")
        if a_star < 0:
            raise ContractError("a_star must be >= 0")
        self._fn = fn
        self.beta_min = float(beta_min)
        self.beta_max = float(beta_max)
        self.a_star = float(a_star)
        self.h_a = float(h_a)
        self.A_max = float(A_max)
        self.horizon = float(horizon)
        self.name = name

        n_main = int(round(self.A_max / self.h_a))
        if abs(n_main * self.h_a - self.A_max) > 1e-9 * max(1.0, self.A_max):
            raise ContractError("A_max must be an integer multiple of h_a")
        n_pad = n_main + int(np.ceil(self.horizon / self.h_a - 1e-9)) + 1
        self.ages_pad = np.arange(n_pad + 1) * self.h_a
        beta_pad = np.asarray(fn(self.ages_pad), dtype=float)
        if beta_pad.shape != self.ages_pad.shape:
            beta_pad = np.broadcast_to(beta_pad, self.ages_pad.shape).copy()
        if not np.isfinite(beta_pad).all():
            raise ContractError("rate evaluates to a non-finite value on the grid")
        self.beta_pad = beta_pad
        self.B_pad = np.concatenate(
            [[0.0], np.cumsum(0.5 * self.h_a * (beta_pad[1:] + beta_pad[:-1]))]
        )
        # beta * exp(-B): the reset kernel every solver convolves with
        self.P_pad = self.beta_pad * np.exp(-self.B_pad)
        self.expnegB_pad = np.exp(-self.B_pad)
        for arr in (self.ages_pad, self.beta_pad, self.B_pad, self.P_pad,
                    self.expnegB_pad):
            arr.setflags(write=False)

        if self.beta_min > 0:
            tail = np.exp(-self.beta_min * (self.A_max - self.a_star))
            if tail >= TAIL_MASS_BOUND:
                warnings.warn(
                    f"truncation age {self.A_max:g} keeps a tail-mass bound of "
                    f"{tail:.2e} (>= {TAIL_MASS_BOUND:g}); consider a larger A_max",
                    stacklevel=2,
                )

    # ------------------------------------------------------------------

    @property
    def n_main(self) -> int:
        return int(round(self.A_max / self.h_a))

    @property
    def padded_max(self) -> float:
        return float(self.ages_pad[-1])

    def beta(self, a):
        return np.asarray(self._fn(np.asarray(a, dtype=float)), dtype=float)

    def cumulative(self, a):
        """B(a), linearly interpolated between precomputed nodes."""
        a_arr = np.asarray(a, dtype=float)
        if np.any(a_arr < -1e-12) or np.any(a_arr > self.padded_max + 1e-12):
            raise DomainError(
                f"age {float(np.max(a_arr)):g} outside the padded hazard grid "
                f"[0, {self.padded_max:g}]; rebuild the rate with a larger horizon"
            )
        return np.interp(a_arr, self.ages_pad, self.B_pad)

    def survival(self, a, t):
        """exp(-(B(a+t) - B(a))): probability of no reset on [a, a+t]."""
        a = np.asarray(a, dtype=float)
        t = np.asarray(t, dtype=float)
        return np.exp(-(self.cumulative(a + t) - self.cumulative(a)))

    # ------------------------------------------------------------------

    def validate(self, continuity_tol=None) -> ValidationReport:
        """Check the declared bounds at every grid node.

        Continuity is checked finitely through adjacent-node increments:
        the default threshold ``beta_max * sqrt(h_a)`` vanishes with the
        step for Lipschitz rates but catches order-one jumps.
        """
        report = ValidationReport(ok=True)
        ages, beta = self.ages_pad, self.beta_pad
        if self.beta_min <= 0:
            report.add(0.0, "beta_min", "beta_min must be strictly positive")
        neg = np.where(beta < 0)[0]
        for j in neg[:50]:
            report.add(ages[j], "negative", f"beta={beta[j]:g} < 0")
        above = np.where(beta > self.beta_max * (1 + 1e-12))[0]
        for j in above[:50]:
            report.add(ages[j], "upper", f"beta={beta[j]:g} > beta_max={self.beta_max:g}")
        tail = np.where((ages >= self.a_star) & (beta < self.beta_min * (1 - 1e-12)))[0]
        for j in tail[:50]:
            report.add(ages[j], "lower",
                       f"beta={beta[j]:g} < beta_min={self.beta_min:g} beyond a_star")
        if continuity_tol is None:
            continuity_tol = max(self.beta_max, 1.0) * np.sqrt(self.h_a)
        jumps = np.abs(np.diff(beta))
        bad = np.where(jumps > continuity_tol)[0]
        for j in bad[:50]:
            report.add(ages[j], "continuity",
                       f"increment {jumps[j]:g} over one step exceeds {continuity_tol:g}")
        if self.B_pad[0] != 0.0 or np.any(np.diff(self.B_pad) < -1e-15):
            report.add(0.0, "cumhaz", "cumulative hazard not nondecreasing from 0")
        return report

    # ------------------------------------------------------------------
    # constructors

    @classmethod
    def constant(cls, value, *, a_star=0.0, beta_min=None, beta_max=None, **kw):
        value = float(value)
        if beta_min is None:
            beta_min = value
        if beta_max is None:
            beta_max = value
        return cls(lambda a: np.full_like(a, value),
                   beta_min=beta_min, beta_max=beta_max, a_star=a_star,
                   name=f"const({value:g})", **kw)

    @classmethod
    def from_table(cls, ages, values, *, beta_min, beta_max, a_star, **kw):
        """Piecewise-linear rate through (ages, values), held constant
        beyond the last tabulated age."""
        ages = np.asarray(ages, dtype=float)
        values = np.asarray(values, dtype=float)
        if ages.ndim != 1 or ages.shape != values.shape or len(ages) < 2:
            raise ContractError("table needs matching age/value arrays, length >= 2")
        if np.any(np.diff(ages) <= 0):
            raise ContractError("table ages must be strictly increasing")
        return cls(lambda a: np.interp(a, ages, values),
                   beta_min=beta_min, beta_max=beta_max, a_star=a_star,
                   name="table", **kw)

    @classmethod
    def from_callable(cls, fn, *, beta_min, beta_max, a_star, **kw):
        return cls(fn, beta_min=beta_min, beta_max=beta_max, a_star=a_star, **kw)

    def __repr__(self):
        return (f"HazardRate({self.name}, beta in [{self.beta_min:g}, "
                f"{self.beta_max:g}], a*={self.a_star:g}, "
                f"grid [0, {self.padded_max:g}] step {self.h_a:g})")


def ramp_rate(slope_until=2.0, *, a_star=1.0, beta_min=1.0, **kw) -> HazardRate:
    """The piecewise-linear benchmark rate min(a, cap): zero at birth,
    growing linearly, saturating at ``slope_until``."""
    cap = float(slope_until)
    return HazardRate.from_table(
        [0.0, cap], [0.0, cap], beta_min=beta_min, beta_max=cap, a_star=a_star, **kw
    )
