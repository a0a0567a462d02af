"""Finite signed measures on [0, infinity) as atoms plus a gridded density.

A measure is represented by a finite list of weighted atoms together with
a piecewise-linear density sampled on a uniform age grid [0, A_max].  The
two parts are mutually singular, so total variation and Jordan
decomposition are exact at the level of the representation: atoms split
by weight sign, density splits nodewise.

This class is closed under the renewal dynamics (transported, decayed
atoms plus an absolutely continuous newborn layer), which is why the
forward solver can work with it without projection steps.
"""

from __future__ import annotations

from typing import Iterable

import numpy as np

from .exceptions import ContractError

# Atom locations closer than this are merged, summing weights; prevents
# spurious TV inflation from duplicate atoms.
ATOM_MERGE_TOL = 1e-12

DEFAULT_A_MAX = 40.0
DEFAULT_H_A = 1e-3


def trapezoid_sum(values: np.ndarray, h: float) -> float:
    """Trapezoidal quadrature of node values on a uniform grid."""
    if len(values) < 2:
        return 0.0
    return h * (float(values.sum()) - 0.5 * float(values[0] + values[-1]))


class TestFunction:
    """A bounded continuous test function with an optional derivative.

    Parameters
    ----------
    fn : callable
        Vectorized evaluator ``a -> f(a)``; must accept numpy arrays.
    derivative : callable, optional
        Evaluator of ``f'``; required by the generator but not by
        plain integration.
    sup_bound : float, optional
        A known bound on ``|f|``; when set, evaluations are checked
        against it.
    name : str
        Used in reports and error messages.
    """

    __test__ = False  # keep pytest from collecting the class
    __slots__ = ("_fn", "_derivative", "sup_bound", "name")

    def __init__(self, fn, derivative=None, sup_bound=None, name="f"):
        self._fn = fn
        self._derivative = derivative
        self.sup_bound = None if sup_bound is None else float(sup_bound)
        self.name = name

    def __call__(self, a):
        a = np.asarray(a, dtype=float)
        vals = np.asarray(self._fn(a), dtype=float)
        vals = np.broadcast_to(vals, a.shape) if vals.shape != a.shape else vals
        if self.sup_bound is not None:
            peak = float(np.max(np.abs(vals))) if vals.size else 0.0
            if peak > self.sup_bound * (1.0 + 1e-9) + 1e-300:
                raise ContractError(
                    f"{self.name}: |f| reached {peak:g}, above declared bound "
                    f"{self.sup_bound:g}"
                )
        return vals

    @property
    def has_derivative(self) -> bool:
        return self._derivative is not None

    def derivative(self, a):
        if self._derivative is None:
            raise ContractError(f"{self.name} has no derivative evaluator")
        a = np.asarray(a, dtype=float)
        vals = np.asarray(self._derivative(a), dtype=float)
        return np.broadcast_to(vals, a.shape) if vals.shape != a.shape else vals

    def __repr__(self):
        return f"TestFunction({self.name})"


def constant_function(c: float = 1.0) -> TestFunction:
    c = float(c)
    return TestFunction(
        lambda a: np.full_like(a, c),
        derivative=lambda a: np.zeros_like(a),
        sup_bound=abs(c),
        name=f"const({c:g})",
    )


def exp_profile(rate: float = 1.0) -> TestFunction:
    """a -> exp(-rate*a), the workhorse smooth bounded test function."""
    rate = float(rate)
    return TestFunction(
        lambda a: np.exp(-rate * a),
        derivative=lambda a: -rate * np.exp(-rate * a),
        sup_bound=1.0,
        name=f"exp(-{rate:g}a)",
    )


def smooth_bump(center: float, half_width: float, height: float = 1.0) -> TestFunction:
    """C^1 cosine-squared bump supported on [center-w, center+w]."""
    c, w, s = float(center), float(half_width), float(height)

    def fn(a):
        x = (a - c) / w
        out = np.where(np.abs(x) < 1.0, s * np.cos(0.5 * np.pi * x) ** 2, 0.0)
        return out

    def dfn(a):
        x = (a - c) / w
        inside = np.abs(x) < 1.0
        return np.where(inside, -s * np.pi / (2 * w) * np.sin(np.pi * x), 0.0)

    return TestFunction(fn, dfn, sup_bound=abs(s), name=f"bump({c:g},{w:g})")


def truncation_family(f: TestFunction, n: int) -> TestFunction:
    """Damped truncation of ``f``: equal to f on [0, n], linearly brought
    to zero on (n, n+1), zero beyond n+1.

    The family increases pointwise to f (for f >= 0) and provides a
    battery of compactly supported test functions.
    """
    if n < 0:
        raise ContractError("truncation index must be >= 0")
    n = int(n)

    def fn(a):
        base = f(a)
        ramp = np.clip(n + 1.0 - a, 0.0, 1.0)
        return np.where(a <= n, base, ramp * base)

    dfn = None
    if f.has_derivative:

        def dfn(a):
            base = f(a)
            dbase = f.derivative(a)
            ramp = np.clip(n + 1.0 - a, 0.0, 1.0)
            mid = (a > n) & (a < n + 1.0)
            out = np.where(a <= n, dbase, 0.0)
            return np.where(mid, ramp * dbase - base, out)

    return TestFunction(fn, dfn, sup_bound=f.sup_bound, name=f"{f.name}|trunc{n}")


class SignedMeasure:
    """Finite signed measure = weighted atoms + piecewise-linear density.

    Parameters
    ----------
    atom_locations, atom_weights : array-like
        Atom positions (>= 0) and signed weights.  Locations are sorted
        and near-duplicates (within ``ATOM_MERGE_TOL``) merged by weight
        addition; exact cancellations are dropped.
    density : array-like
        Node values of the density on the uniform grid
        ``0, h_a, ..., n*h_a``; interpreted piecewise-linearly.
    h_a : float
        Grid step.

    All arrays are stored read-only; operations return new measures.
    """

    __slots__ = ("atom_locations", "atom_weights", "density", "h_a")

    def __init__(self, atom_locations, atom_weights, density, h_a):
        locs = np.atleast_1d(np.asarray(atom_locations, dtype=float))
        wts = np.atleast_1d(np.asarray(atom_weights, dtype=float))
        dens = np.asarray(density, dtype=float)
        if locs.shape != wts.shape:
            raise ContractError("atom locations and weights differ in length")
        if dens.ndim != 1 or len(dens) < 2:
            raise ContractError("density must be a 1-d array of >= 2 node values")
        if not (np.isfinite(dens).all() and np.isfinite(wts).all()
                and np.isfinite(locs).all()):
            raise ContractError("measure data must be finite")
        if locs.size and locs.min() < 0:
            raise ContractError("atom locations must be >= 0")
        h_a = float(h_a)
        if h_a <= 0:
            raise ContractError("grid step must be positive")

        if locs.size:
            order = np.argsort(locs, kind="stable")
            locs, wts = locs[order], wts[order]
            keep_locs, keep_wts = [], []
            for x, w in zip(locs, wts):
                if keep_locs and x - keep_locs[-1] <= ATOM_MERGE_TOL:
                    keep_wts[-1] += w
                else:
                    keep_locs.append(x)
                    keep_wts.append(w)
            locs = np.array(keep_locs, dtype=float)
            wts = np.array(keep_wts, dtype=float)
            nz = wts != 0.0
            locs, wts = locs[nz], wts[nz]

        for arr in (locs, wts, dens):
            arr.setflags(write=False)
        self.atom_locations = locs
        self.atom_weights = wts
        self.density = dens
        self.h_a = h_a

    # ------------------------------------------------------------------
    # constructors

    @classmethod
    def zero(cls, A_max=DEFAULT_A_MAX, h_a=DEFAULT_H_A):
        n = _nodes_for(A_max, h_a)
        return cls([], [], np.zeros(n + 1), h_a)

    @classmethod
    def dirac(cls, location, weight=1.0, *, A_max=DEFAULT_A_MAX, h_a=DEFAULT_H_A):
        n = _nodes_for(A_max, h_a)
        return cls([location], [weight], np.zeros(n + 1), h_a)

    @classmethod
    def from_atoms(cls, pairs: Iterable[tuple], *, A_max=DEFAULT_A_MAX, h_a=DEFAULT_H_A):
        pairs = list(pairs)
        n = _nodes_for(A_max, h_a)
        return cls([p[0] for p in pairs], [p[1] for p in pairs], np.zeros(n + 1), h_a)

    @classmethod
    def from_density(cls, fn_or_values, *, A_max=DEFAULT_A_MAX, h_a=DEFAULT_H_A,
                     normalize=False):
        """Build a purely absolutely continuous measure.

        ``fn_or_values`` is either a vectorized callable sampled at the
        grid nodes or an array of node values.  With ``normalize=True``
        the result is rescaled to unit mass (useful for projecting
        analytic probability densities onto the grid).
        """
        n = _nodes_for(A_max, h_a)
        if callable(fn_or_values):
            vals = np.asarray(fn_or_values(np.arange(n + 1) * h_a), dtype=float)
        else:
            vals = np.asarray(fn_or_values, dtype=float)
            if len(vals) != n + 1:
                raise ContractError(
                    f"density array has {len(vals)} nodes, grid expects {n + 1}"
                )
        m = cls([], [], vals, h_a)
        if normalize:
            m = m.normalized()
        return m

    @classmethod
    def uniform(cls, lo, hi, *, A_max=DEFAULT_A_MAX, h_a=DEFAULT_H_A):
        """Uniform probability density on [lo, hi], projected on the grid.

        Edge nodes carry half values so the trapezoidal mass matches the
        interval length; a final normalization pins the mass to 1
        exactly in the discrete functional.
        """
        lo, hi = float(lo), float(hi)
        if not 0 <= lo < hi:
            raise ContractError("need 0 <= lo < hi")
        n = _nodes_for(A_max, h_a)
        ages = np.arange(n + 1) * h_a
        v = 1.0 / (hi - lo)
        vals = np.where((ages > lo) & (ages < hi), v, 0.0)
        for edge in (lo, hi):
            j = int(round(edge / h_a))
            if 0 <= j <= n and abs(j * h_a - edge) < 1e-9:
                vals[j] = 0.5 * v
        return cls([], [], vals, h_a).normalized()

    # ------------------------------------------------------------------
    # basic geometry

    @property
    def n_nodes(self) -> int:
        return len(self.density) - 1

    @property
    def A_max(self) -> float:
        return self.n_nodes * self.h_a

    @property
    def ages(self) -> np.ndarray:
        return np.arange(self.n_nodes + 1) * self.h_a

    @property
    def max_atom_location(self) -> float:
        return float(self.atom_locations.max()) if self.atom_locations.size else 0.0

    def _require_same_grid(self, other: "SignedMeasure"):
        if self.n_nodes != other.n_nodes or abs(self.h_a - other.h_a) > 1e-15:
            raise ContractError("measures live on different grids")

    # ------------------------------------------------------------------
    # functionals

    def mass(self) -> float:
        """Signed total mass: sum of weights plus integral of the density."""
        return float(self.atom_weights.sum()) + trapezoid_sum(self.density, self.h_a)

    def tv_norm(self) -> float:
        """Total variation: atoms and density contribute additively
        because the two parts are mutually singular."""
        return float(np.abs(self.atom_weights).sum()) + trapezoid_sum(
            np.abs(self.density), self.h_a
        )

    def integrate(self, f) -> float:
        """Integral of a test function: exact on atoms, trapezoidal on
        the density grid.

        Raises if ``f`` evaluates to a non-finite value at any sample
        point.
        """
        fn = f if callable(f) else None
        if fn is None:
            raise ContractError("integrate expects a callable or TestFunction")
        total = 0.0
        if self.atom_locations.size:
            at_atoms = np.asarray(fn(self.atom_locations), dtype=float)
            if not np.isfinite(at_atoms).all():
                raise ContractError("test function is not finite at an atom")
            total += float(np.dot(self.atom_weights, at_atoms))
        at_nodes = np.asarray(fn(self.ages), dtype=float)
        if not np.isfinite(at_nodes).all():
            raise ContractError("test function is not finite on the grid")
        total += trapezoid_sum(self.density * at_nodes, self.h_a)
        return total

    def jordan(self) -> tuple["SignedMeasure", "SignedMeasure"]:
        """Jordan decomposition (mu_plus, mu_minus), both nonnegative,
        recombining exactly at every atom and node."""
        pos = self.atom_weights > 0
        plus = SignedMeasure(
            self.atom_locations[pos], self.atom_weights[pos],
            np.maximum(self.density, 0.0), self.h_a,
        )
        minus = SignedMeasure(
            self.atom_locations[~pos], -self.atom_weights[~pos],
            np.maximum(-self.density, 0.0), self.h_a,
        )
        return plus, minus

    def cdf(self, points, side: str = "right") -> np.ndarray:
        """Distribution function F(x) = mu([0, x]) (or mu([0, x)) with
        ``side='left'``), combining atom steps and integrated density."""
        pts = np.atleast_1d(np.asarray(points, dtype=float))
        cum = np.concatenate(
            [[0.0], np.cumsum(0.5 * self.h_a * (self.density[1:] + self.density[:-1]))]
        )
        dens_part = np.interp(pts, self.ages, cum, left=0.0, right=cum[-1])
        if self.atom_locations.size:
            idx = np.searchsorted(self.atom_locations, pts, side=side)
            wcum = np.concatenate([[0.0], np.cumsum(self.atom_weights)])
            atom_part = wcum[idx]
        else:
            atom_part = 0.0
        return dens_part + atom_part

    # ------------------------------------------------------------------
    # linear structure

    def scaled(self, c: float) -> "SignedMeasure":
        c = float(c)
        return SignedMeasure(
            self.atom_locations, self.atom_weights * c, self.density * c, self.h_a
        )

    def normalized(self) -> "SignedMeasure":
        m = self.mass()
        if m == 0.0:
            raise ContractError("cannot normalize a measure of zero mass")
        return self.scaled(1.0 / m)

    def __neg__(self):
        return self.scaled(-1.0)

    def __rmul__(self, c):
        return self.scaled(c)

    def __add__(self, other: "SignedMeasure") -> "SignedMeasure":
        self._require_same_grid(other)
        return SignedMeasure(
            np.concatenate([self.atom_locations, other.atom_locations]),
            np.concatenate([self.atom_weights, other.atom_weights]),
            self.density + other.density,
            self.h_a,
        )

    def __sub__(self, other: "SignedMeasure") -> "SignedMeasure":
        return self + other.scaled(-1.0)

    # ------------------------------------------------------------------
    # serialization

    def to_rows(self):
        """Rows (kind, position, value): one per atom, one per grid node."""
        rows = [("atom", float(x), float(w))
                for x, w in zip(self.atom_locations, self.atom_weights)]
        rows += [("density", float(j * self.h_a), float(v))
                 for j, v in enumerate(self.density)]
        return rows

    @classmethod
    def from_rows(cls, rows, h_a=None):
        atoms, dens_pos, dens_val = [], [], []
        for kind, pos, val in rows:
            if kind == "atom":
                atoms.append((float(pos), float(val)))
            elif kind == "density":
                dens_pos.append(float(pos))
                dens_val.append(float(val))
            else:
                raise ContractError(f"unknown row kind {kind!r}")
        if len(dens_pos) < 2:
            raise ContractError("need at least two density rows to fix the grid")
        step = dens_pos[1] - dens_pos[0]
        if h_a is None:
            h_a = step
        return cls([a for a, _ in atoms], [w for _, w in atoms],
                   np.asarray(dens_val), h_a)

    def __repr__(self):
        return (f"SignedMeasure({len(self.atom_weights)} atoms, "
                f"grid [0, {self.A_max:g}] step {self.h_a:g}, "
                f"mass {self.mass():.6g})")


def _nodes_for(A_max: float, h_a: float) -> int:
    n = int(round(float(A_max) / float(h_a)))
    if n < 1:
        raise ContractError("A_max must exceed the grid step")
    if abs(n * h_a - A_max) > 1e-9 * max(1.0, A_max):
        raise ContractError(
            f"A_max={A_max!r} is not an integer multiple of h_a={h_a!r}"
        )
    return n
