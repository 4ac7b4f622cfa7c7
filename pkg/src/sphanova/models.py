"""Angular models for rotationally symmetric laws and the induced projection law.

A rotationally symmetric law on the unit sphere S^{k-1} with location theta has
density proportional to f(x'theta) for an *angular function* f: [-1, 1] -> R+.
The projection t = X'theta then follows the *tilde law* with density
proportional to f(t) (1 - t^2)^{(k-3)/2}.  This module provides the named
angular families, their validation, the tilde law (density, cdf, quantile),
the scalar constants consumed by the tests and efficiency formulas, and
rank-test score functions with their L2 and cross integrals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import ModelSpecError, NotPositiveError
from .quadrature import _NODES, _WEIGHTS, integrate

GRID_PANELS = 2048
_QUANTILE_S_TOL = 1e-11
_HALF_PI = 0.5 * np.pi


@dataclass(frozen=True, eq=False)
class AngularModel:
    """An angular function f with its log-derivative phi = f'/f.

    ``weighted_phi`` is phi(t) * sqrt(1 - t^2) in a form safe at t = +-1
    (several families have phi diverging there while the product stays
    bounded).  Named families carry closed forms; custom models must supply
    phi (the package never differentiates f numerically outside validation).
    """

    name: str
    params: tuple[tuple[str, float], ...]
    f: Callable[[np.ndarray], np.ndarray]
    phi: Callable[[np.ndarray], np.ndarray]
    weighted_phi: Callable[[np.ndarray], np.ndarray]

    @property
    def spec(self) -> str:
        """Specification string, e.g. ``"fvml:kappa=2"``."""
        if not self.params:
            return self.name
        args = ",".join(f"{key}={value:g}" for key, value in self.params)
        return f"{self.name}:{args}"

    def __repr__(self) -> str:  # pragma: no cover - cosmetic
        return f"AngularModel({self.spec!r})"


def _one_minus_t2(t: np.ndarray) -> np.ndarray:
    return np.clip(1.0 - np.square(t), 0.0, None)


def fvml(kappa: float) -> AngularModel:
    """Fisher-von Mises-Langevin family, f(t) = exp(kappa t), kappa > 0.

    Internally stabilized as exp(kappa (t - 1)); the tilde-law normalization
    absorbs the constant, so large concentrations do not overflow.
    """
    kappa = float(kappa)
    if not kappa > 0.0:
        raise ValueError("fvml requires kappa > 0")

    def f(t):
        return np.exp(kappa * (np.asarray(t, dtype=float) - 1.0))

    def phi(t):
        return np.full_like(np.asarray(t, dtype=float), kappa)

    def wphi(t):
        return kappa * np.sqrt(_one_minus_t2(np.asarray(t, dtype=float)))

    return AngularModel("fvml", (("kappa", kappa),), f, phi, wphi)


def linear(a: float) -> AngularModel:
    """Linear family, f(t) = t + a.  Positive on [-1, 1] iff a > 1."""
    a = float(a)

    def f(t):
        return np.asarray(t, dtype=float) + a

    def phi(t):
        return 1.0 / (np.asarray(t, dtype=float) + a)

    def wphi(t):
        t = np.asarray(t, dtype=float)
        return np.sqrt(_one_minus_t2(t)) / (t + a)

    return AngularModel("lin", (("a", a),), f, phi, wphi)


def logarithmic(a: float) -> AngularModel:
    """Logarithmic family, f(t) = log(t + a).  Positive on [-1, 1] iff a > 2."""
    a = float(a)

    def f(t):
        arg = np.asarray(t, dtype=float) + a
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.log(arg)

    def phi(t):
        arg = np.asarray(t, dtype=float) + a
        return 1.0 / (arg * np.log(arg))

    def wphi(t):
        t = np.asarray(t, dtype=float)
        arg = t + a
        return np.sqrt(_one_minus_t2(t)) / (arg * np.log(arg))

    return AngularModel("log", (("a", a),), f, phi, wphi)


def logistic(a: float, b: float) -> AngularModel:
    """Logistic family, f(t) = a e^{-b arccos t} / (1 + a e^{-b arccos t})^2.

    Requires a > 0 and b > 0.  Not monotone nondecreasing when a > 1 (the
    density peaks at t = cos(log(a)/b)); validation reports this instead of
    rejecting, since such parameterizations are in routine use.
    """
    a = float(a)
    b = float(b)
    if not (a > 0.0 and b > 0.0):
        raise ValueError("logis requires a > 0 and b > 0")

    def _z(t):
        t = np.clip(np.asarray(t, dtype=float), -1.0, 1.0)
        return a * np.exp(-b * np.arccos(t))

    def f(t):
        z = _z(t)
        return z / np.square(1.0 + z)

    def phi(t):
        t = np.asarray(t, dtype=float)
        z = _z(t)
        with np.errstate(divide="ignore"):
            return b * (1.0 - z) / (np.sqrt(_one_minus_t2(t)) * (1.0 + z))

    def wphi(t):
        z = _z(t)
        return b * (1.0 - z) / (1.0 + z)

    return AngularModel("logis", (("a", a), ("b", b)), f, phi, wphi)


def custom_model(
    f: Callable[[np.ndarray], np.ndarray],
    phi: Callable[[np.ndarray], np.ndarray],
    *,
    name: str = "custom",
    weighted_phi: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> AngularModel:
    """Wrap caller-supplied f and phi = f'/f as an angular model."""
    if weighted_phi is None:

        def weighted_phi(t):  # type: ignore[misc]
            t = np.asarray(t, dtype=float)
            return phi(t) * np.sqrt(_one_minus_t2(t))

    return AngularModel(name, (), f, phi, weighted_phi)


_SPEC_FACTORIES: dict[str, tuple[tuple[str, ...], Callable[..., AngularModel]]] = {
    "fvml": (("kappa",), fvml),
    "lin": (("a",), linear),
    "log": (("a",), logarithmic),
    "logis": (("a", "b"), logistic),
}


def parse_model_spec(spec: str) -> AngularModel:
    """Parse a model spec string, e.g. ``"fvml:kappa=2"`` or ``"logis:a=2,b=1"``.

    Grammar: ``name:key=float[,key=float...]`` with the keys of the named
    family, in any order.
    """
    text = spec.strip()
    name, sep, rest = text.partition(":")
    name = name.strip().lower()
    if name not in _SPEC_FACTORIES:
        raise ModelSpecError(f"unknown model family {name!r} in spec {spec!r}")
    keys, factory = _SPEC_FACTORIES[name]
    if not sep or not rest.strip():
        raise ModelSpecError(f"spec {spec!r} is missing parameters {keys}")
    given: dict[str, float] = {}
    for item in rest.split(","):
        key, eq, value = item.partition("=")
        key = key.strip().lower()
        if not eq or key not in keys:
            raise ModelSpecError(f"spec {spec!r}: expected keys {keys}, got {item!r}")
        if key in given:
            raise ModelSpecError(f"spec {spec!r}: duplicate key {key!r}")
        try:
            given[key] = float(value)
        except ValueError as exc:
            raise ModelSpecError(f"spec {spec!r}: bad float {value!r}") from exc
    missing = [key for key in keys if key not in given]
    if missing:
        raise ModelSpecError(f"spec {spec!r} is missing {missing}")
    try:
        return factory(**given)
    except ValueError as exc:
        raise ModelSpecError(f"spec {spec!r}: {exc}") from exc


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of the angular-function checks that do not block construction."""

    monotone: bool
    messages: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return self.monotone


def validate(model: AngularModel, *, grid_points: int = 1024) -> ValidationReport:
    """Check strict positivity and monotonicity of f on a [-1, 1] grid.

    Positivity is a hard requirement (the tilde law would not be a density)
    and raises NotPositiveError with the offending t.  Monotonicity failures
    are reported, not raised: they void the usual "mass concentrates toward
    the location" reading but leave every downstream computation well defined.
    """
    t = np.linspace(-1.0, 1.0, grid_points)
    vals = np.asarray(model.f(t), dtype=float)
    bad = ~np.isfinite(vals)
    if np.any(bad):
        idx = int(np.argmax(bad))
        raise NotPositiveError(t[idx], vals[idx])
    idx = int(np.argmin(vals))
    if vals[idx] <= 0.0:
        raise NotPositiveError(t[idx], vals[idx])
    scale = float(np.max(vals))
    diffs = np.diff(vals)
    drop = float(np.min(diffs))
    if drop < -1e-12 * scale:
        where = int(np.argmin(diffs))
        message = (
            f"f decreases near t = {t[where]:.4g} "
            f"(relative step {drop / scale:.3g}); not monotone nondecreasing"
        )
        return ValidationReport(monotone=False, messages=(message,))
    return ValidationReport(monotone=True)


class TildeLaw:
    """Law of the projection X'theta on [-1, 1] induced by an angular model.

    All internal machinery is parameterized by s = arcsin(t): the surface
    weight (1 - t^2)^{(k-3)/2} dt becomes cos^{k-2}(s) ds, which is smooth for
    every k >= 2 (for k = 2 the t-density has integrable endpoint
    singularities that this substitution removes).  The cdf is evaluated
    exactly from per-panel Gauss-Legendre integrals on a 2048-panel grid; the
    quantile combines a cached monotone cubic interpolant with a safeguarded
    Newton/bisection refinement against that cdf.
    """

    def __init__(self, model: AngularModel, k: int):
        k = int(k)
        if k < 2:
            raise ValueError("tilde law requires k >= 2")
        self.model = model
        self.k = k
        self.validation = validate(model)

        s_grid = np.linspace(-_HALF_PI, _HALF_PI, GRID_PANELS + 1)
        half = 0.5 * (s_grid[1] - s_grid[0])
        mids = 0.5 * (s_grid[:-1] + s_grid[1:])
        nodes = mids[:, None] + half * _NODES[None, :]
        panels = half * (self._raw_s(nodes) @ _WEIGHTS)
        if np.any(panels < 0.0) or not np.all(np.isfinite(panels)):
            raise NotPositiveError(0.0, float(np.min(panels)))
        total = math.fsum(panels.tolist())
        if not (total > 0.0 and np.isfinite(total)):
            raise NotPositiveError(0.0, total)

        cum = np.concatenate(([0.0], np.cumsum(panels)))
        cum[-1] = total
        self._s_grid = s_grid
        self._cum_raw = cum
        self._total = total
        self.normalizer = 1.0 / total
        self._inverse = self._build_inverse(cum / total, s_grid)

    # -- construction helpers -------------------------------------------------

    def _raw_s(self, s: np.ndarray) -> np.ndarray:
        """Unnormalized density of s = arcsin(t): f(sin s) cos^{k-2}(s)."""
        s = np.asarray(s, dtype=float)
        vals = np.asarray(self.model.f(np.sin(s)), dtype=float)
        if self.k != 2:
            vals = vals * np.cos(s) ** (self.k - 2)
        return vals

    @staticmethod
    def _build_inverse(cdf_grid: np.ndarray, s_grid: np.ndarray):
        if np.all(np.diff(cdf_grid) > 0.0):
            return PchipInterpolator(cdf_grid, s_grid, extrapolate=False)
        return None  # degenerate flat stretches; bisection alone still works

    # -- public surface --------------------------------------------------------

    def density(self, t) -> np.ndarray | float:
        """Tilde density at t (diverges at t = +-1 when k = 2)."""
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore"):
            weight = _one_minus_t2(t) ** (0.5 * (self.k - 3))
        out = self.normalizer * np.asarray(self.model.f(t), dtype=float) * weight
        return float(out) if out.ndim == 0 else out

    def cdf(self, t) -> np.ndarray | float:
        t = np.asarray(t, dtype=float)
        s = np.arcsin(np.clip(t, -1.0, 1.0))
        out = self._cdf_s(np.atleast_1d(s)).reshape(s.shape)
        return float(out) if out.ndim == 0 else out

    def quantile(self, u) -> np.ndarray | float:
        """Inverse cdf; refined to 1e-11 in the arcsin parameterization."""
        u = np.asarray(u, dtype=float)
        if np.any((u < -1e-12) | (u > 1.0 + 1e-12)):
            raise ValueError("quantile argument must lie in [0, 1]")
        flat = np.clip(u.ravel(), 0.0, 1.0)
        out = np.sin(self._quantile_s(flat)).reshape(u.shape)
        return float(out) if out.ndim == 0 else out

    # -- exact cdf / quantile in s --------------------------------------------

    def _cdf_s(self, s: np.ndarray) -> np.ndarray:
        s = np.clip(np.asarray(s, dtype=float), -_HALF_PI, _HALF_PI)
        idx = np.clip(np.searchsorted(self._s_grid, s, side="right") - 1, 0, GRID_PANELS - 1)
        base = self._s_grid[idx]
        half = 0.5 * (s - base)
        nodes = (base + half)[:, None] + half[:, None] * _NODES[None, :]
        partial = half * (self._raw_s(nodes) @ _WEIGHTS)
        return (self._cum_raw[idx] + partial) / self._total

    def _quantile_s(self, u: np.ndarray) -> np.ndarray:
        cdf_grid = self._cum_raw / self._total
        idx = np.clip(np.searchsorted(cdf_grid, u, side="left"), 1, GRID_PANELS)
        lo = self._s_grid[idx - 1].copy()
        hi = self._s_grid[idx].copy()
        if self._inverse is not None:
            mid = np.clip(self._inverse(u), lo, hi)
        else:
            mid = 0.5 * (lo + hi)
        for _ in range(80):
            f_mid = self._cdf_s(mid) - u
            below = f_mid < 0.0
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
            if float(np.max(hi - lo)) < _QUANTILE_S_TOL:
                break
            # guarded Newton step from the current midpoint, falling back to
            # plain bisection wherever it leaves the bracket
            dens = self._raw_s(mid) / self._total
            with np.errstate(divide="ignore", invalid="ignore"):
                newton = mid - f_mid / dens
            mid = np.where(
                np.isfinite(newton) & (newton > lo) & (newton < hi),
                newton,
                0.5 * (lo + hi),
            )
        return 0.5 * (lo + hi)


@lru_cache(maxsize=128)
def make_tilde_law(model: AngularModel, k: int) -> TildeLaw:
    """Construct (and memoize) the tilde law of X'theta for ``model`` on S^{k-1}."""
    return TildeLaw(model, k)


@dataclass(frozen=True)
class LawConstants:
    """Scalar functionals of a tilde law used by the tests and ARE formulas.

    B = 1 - E[(X'theta)^2], E = E[X'theta], C = E[(1 - (X'theta)^2) phi(X'theta)],
    D = E/B, and ``fisher`` is the location Fisher-information integral
    int phi^2(t) (1 - t^2) dtilde(t) dt.
    """

    B: float
    E: float
    C: float
    D: float
    fisher: float


@lru_cache(maxsize=256)
def law_constants(law: TildeLaw, *, abs_tol: float = 1e-12) -> LawConstants:
    """All five constants by adaptive quadrature against the tilde density."""
    dens = lambda s: law._raw_s(s) * law.normalizer  # noqa: E731
    wphi = law.model.weighted_phi

    e_val = integrate(lambda s: np.sin(s) * dens(s), -_HALF_PI, _HALF_PI, abs_tol=abs_tol)
    second = integrate(lambda s: np.sin(s) ** 2 * dens(s), -_HALF_PI, _HALF_PI, abs_tol=abs_tol)
    c_val = integrate(
        lambda s: wphi(np.sin(s)) * np.cos(s) * dens(s), -_HALF_PI, _HALF_PI, abs_tol=abs_tol
    )
    fisher = integrate(
        lambda s: wphi(np.sin(s)) ** 2 * dens(s), -_HALF_PI, _HALF_PI, abs_tol=abs_tol
    )
    b_val = 1.0 - second
    if not 0.0 < b_val < 1.0:
        raise ValueError(f"B = {b_val!r} outside (0, 1); law too degenerate")
    return LawConstants(B=b_val, E=e_val, C=c_val, D=e_val / b_val, fisher=fisher)


class ScoreFunction:
    """A continuous score K: [0, 1] -> R with its integral JK = int_0^1 K^2.

    Model-derived scores are K_f(u) = phi_f(Ftilde^{-1}(u)) sqrt(1 - Ftilde^{-1}(u)^2);
    for those JK equals the Fisher integral of the generating law.  ``table(n)``
    caches K(j/(n+1)) for j = 1..n, the only evaluations rank statistics need.
    Instances are immutable apart from that memo table.
    """

    def __init__(
        self,
        fn: Callable[[np.ndarray], np.ndarray],
        jk: float,
        *,
        label: str = "custom",
        k: Optional[int] = None,
    ):
        self._fn = fn
        self.jk = float(jk)
        self.label = label
        self.k = k
        self._tables: dict[int, np.ndarray] = {}

    def __call__(self, u) -> np.ndarray:
        return np.asarray(self._fn(np.asarray(u, dtype=float)), dtype=float)

    def table(self, n: int) -> np.ndarray:
        n = int(n)
        got = self._tables.get(n)
        if got is None:
            got = self(np.arange(1, n + 1) / (n + 1.0))
            got.setflags(write=False)
            self._tables[n] = got
        return got

    def __repr__(self) -> str:  # pragma: no cover - cosmetic
        return f"ScoreFunction({self.label!r}, jk={self.jk:.6g})"


def score_from_model(model: AngularModel, k: int) -> ScoreFunction:
    """Score function of ``model`` on S^{k-1}, evaluated through its quantile."""
    law = make_tilde_law(model, k)
    consts = law_constants(law)

    def fn(u):
        return model.weighted_phi(law.quantile(u))

    return ScoreFunction(fn, jk=consts.fisher, label=f"K[{model.spec}|k={k}]", k=k)


def j_cross(score: ScoreFunction, law: TildeLaw, *, abs_tol: float = 1e-11) -> float:
    """Cross integral int_0^1 K(u) K_g(u) du of a score against a tilde law.

    Computed in the t domain by the substitution u = Gtilde(t), where the
    integrand is K(Gtilde(t)) phi_g(t) sqrt(1 - t^2) gtilde(t).
    """
    if score.k is not None and score.k != law.k:
        raise ValueError(f"score built for k={score.k} used with a k={law.k} law")
    wphi = law.model.weighted_phi

    def integrand(s):
        u = law._cdf_s(np.atleast_1d(s))
        return score(u) * wphi(np.sin(s)) * law._raw_s(s) * law.normalizer

    return integrate(integrand, -_HALF_PI, _HALF_PI, abs_tol=abs_tol)
