"""TOML configuration for rates, measures, and scenario numerics.

A complete annotated example lives in ``configs/example_scenario.toml``
at the repository root.  Rate and measure files may either be bare
tables or contain ``[rate]`` / ``[measure]`` sections, so the same file
works standalone and embedded in a scenario.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as tomllib

from .exceptions import ConfigError
from .hazard import HazardRate
from .measures import SignedMeasure, TestFunction

_EXPR_NAMES = {
    "exp": np.exp, "log": np.log, "sqrt": np.sqrt,
    "sin": np.sin, "cos": np.cos, "tan": np.tan,
    "abs": np.abs, "minimum": np.minimum, "maximum": np.maximum,
    "clip": np.clip, "where": np.where, "pi": np.pi, "e": np.e,
}


def compile_expression(expr: str):
    """Compile an age expression such as ``"minimum(a, 2.0)"`` into a
    vectorized callable of ``a``.  Only arithmetic and a whitelist of
    numpy functions are allowed."""
    try:
        code = compile(expr, "<expr>", "eval")
    except SyntaxError as exc:
        raise ConfigError(f"cannot parse expression {expr!r}: {exc}") from None
    for name in code.co_names:
        if name not in _EXPR_NAMES and name != "a":
            raise ConfigError(f"name {name!r} not allowed in expression {expr!r}")

    def fn(a):
        scope = dict(_EXPR_NAMES)
        scope["a"] = np.asarray(a, dtype=float)
        out = eval(code, {"__builtins__": {}}, scope)
        return np.broadcast_to(np.asarray(out, dtype=float), scope["a"].shape)

    return fn


@dataclass
class Numerics:
    """Grid steps, truncation age, padding, and tolerances."""

    h_a: float = 1e-3
    h_t: float = 1e-3
    A_max: float = 40.0
    horizon: float = 10.0
    tol_picard: float = 1e-12
    tol_mass: float = 1e-8
    eps_minor: float = 1e-6
    eps_tv: float = 1e-4
    snapshot_step: float = 0.1
    seed: int = 12345

    def validated(self) -> "Numerics":
        for name in ("h_a", "h_t", "A_max", "horizon", "tol_picard", "tol_mass",
                     "eps_minor", "eps_tv", "snapshot_step"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"numerics.{name} must be positive")
        if abs(self.h_a - self.h_t) > 1e-15:
            raise ConfigError("this implementation keeps h_t equal to h_a")
        return self


def _load_toml(path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None


def _section(data: dict, name: str) -> dict:
    return data.get(name, data)


def numerics_from_dict(data: dict) -> Numerics:
    known = {f for f in Numerics.__dataclass_fields__}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown numerics keys: {sorted(unknown)}")
    try:
        return replace(Numerics(), **data).validated()
    except TypeError as exc:
        raise ConfigError(f"bad numerics section: {exc}") from None


def rate_from_dict(data: dict, numerics: Numerics, *, horizon: float | None = None
                   ) -> HazardRate:
    data = dict(_section(data, "rate"))
    kind = data.pop("kind", None)
    if kind is None:
        raise ConfigError("rate config needs a 'kind' (constant | table | expr)")
    try:
        bounds = {
            "beta_min": float(data.pop("beta_min")),
            "beta_max": float(data.pop("beta_max")),
            "a_star": float(data.pop("a_star")),
        }
    except KeyError as exc:
        raise ConfigError(f"rate config is missing {exc.args[0]!r}") from None
    grid = {
        "A_max": numerics.A_max,
        "h_a": numerics.h_a,
        "horizon": numerics.horizon if horizon is None else horizon,
    }
    if kind == "constant":
        try:
            value = float(data.pop("beta"))
        except KeyError:
            raise ConfigError("constant rate needs 'beta'") from None
        rate = HazardRate.constant(value, **bounds, **grid)
    elif kind == "table":
        try:
            ages, values = data.pop("ages"), data.pop("values")
        except KeyError as exc:
            raise ConfigError(f"table rate needs {exc.args[0]!r}") from None
        rate = HazardRate.from_table(ages, values, **bounds, **grid)
    elif kind == "expr":
        try:
            expr = data.pop("expr")
        except KeyError:
            raise ConfigError("expr rate needs 'expr'") from None
        rate = HazardRate.from_callable(compile_expression(expr), **bounds, **grid)
        rate.name = f"expr({expr})"
    else:
        raise ConfigError(f"unknown rate kind {kind!r}")
    if data:
        raise ConfigError(f"unknown rate keys: {sorted(data)}")
    return rate


def measure_from_dict(data: dict, numerics: Numerics) -> SignedMeasure:
    data = dict(_section(data, "measure"))
    grid = data.pop("grid", {})
    A_max = float(grid.get("A_max", numerics.A_max))
    h_a = float(grid.get("h_a", numerics.h_a))
    atoms = data.pop("atoms", [])
    density = data.pop("density", None)
    if data:
        raise ConfigError(f"unknown measure keys: {sorted(data)}")
    mu = SignedMeasure.zero(A_max=A_max, h_a=h_a)
    if atoms:
        try:
            pairs = [(float(a["atom"]), float(a["weight"])) for a in atoms]
        except (KeyError, TypeError) as exc:
            raise ConfigError(
                "each atom entry needs 'atom' (location) and 'weight'"
            ) from exc
        mu = mu + SignedMeasure.from_atoms(pairs, A_max=A_max, h_a=h_a)
    if density is not None:
        density = dict(density)
        normalize = bool(density.pop("normalize", False))
        if "expr" in density:
            fn = compile_expression(density.pop("expr"))
            part = SignedMeasure.from_density(fn, A_max=A_max, h_a=h_a,
                                              normalize=normalize)
        elif "ages" in density:
            ages = np.asarray(density.pop("ages"), dtype=float)
            if "values" not in density:
                raise ConfigError("density table needs both 'ages' and 'values'")
            values = np.asarray(density.pop("values"), dtype=float)
            nodes = np.arange(int(round(A_max / h_a)) + 1) * h_a
            part = SignedMeasure.from_density(
                np.interp(nodes, ages, values, left=0.0, right=0.0),
                A_max=A_max, h_a=h_a, normalize=normalize)
        else:
            raise ConfigError("density needs 'expr' or 'ages'/'values'")
        if density:
            raise ConfigError(f"unknown density keys: {sorted(density)}")
        mu = mu + part
    return mu


def test_function_from_expr(expr: str) -> TestFunction:
    return TestFunction(compile_expression(expr), name=expr)


@dataclass
class Scenario:
    """A fully resolved verification scenario."""

    rate: HazardRate
    measure: SignedMeasure
    measure2: SignedMeasure | None
    numerics: Numerics
    times: list
    eta: float

    @property
    def seed(self) -> int:
        return self.numerics.seed


def load_numerics(path_or_none) -> Numerics:
    if path_or_none is None:
        return Numerics()
    data = _load_toml(path_or_none)
    return numerics_from_dict(data.get("numerics", {}))


def load_rate(path, numerics: Numerics, *, horizon=None) -> HazardRate:
    return rate_from_dict(_load_toml(path), numerics, horizon=horizon)


def load_measure(path, numerics: Numerics) -> SignedMeasure:
    return measure_from_dict(_load_toml(path), numerics)


def load_scenario(path) -> Scenario:
    data = _load_toml(path)
    if "rate" not in data:
        raise ConfigError(f"{path}: scenario needs a [rate] section")
    if "measure" not in data:
        raise ConfigError(f"{path}: scenario needs a [measure] section")
    numerics = numerics_from_dict(data.get("numerics", {}))
    extra = data.get("verify", {})
    times = [float(t) for t in extra.get("times", [0.5, 1.0, 2.0])]
    eta = float(extra.get("eta", 1.0))
    horizon = max(numerics.horizon, max(times) if times else 0.0)
    rate = rate_from_dict(data["rate"], numerics, horizon=horizon)
    measure = measure_from_dict(data["measure"], numerics)
    measure2 = (measure_from_dict(data["measure2"], numerics)
                if "measure2" in data else None)
    return Scenario(rate=rate, measure=measure, measure2=measure2,
                    numerics=numerics, times=times, eta=eta)
