"""m-sample location tests on the sphere and their chi-square calibration.

Three computational paths share one null distribution (chi-square with
(m-1)(k-1) degrees of freedom under equality of the group locations):

* ``pseudo_fvml_test`` -- the studentized spherical-mean statistic in closed
  form.  Valid under any rotationally symmetric law; optimal when every group
  is Fisher-von Mises-Langevin.  The underlying concentrations cancel and are
  never inputs.
* ``rank_test`` -- the sign-and-rank statistic for a chosen m-tuple of score
  functions, with the unknown cross-information coefficients estimated by the
  scan in :mod:`sphanova.estimators`.
* ``reference_quadratic_form`` -- the general quadratic form assembled from
  block information matrices and Moore-Penrose pseudo-inverses.  It exists to
  cross-validate the closed forms: both must agree to 1e-8.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.special as sc

from .errors import DegenerateGroupError, NegativeStatisticError, SphanovaError
from .estimators import CrossInfoEstimate, MultiSample, cross_info_estimate, spherical_mean
from .models import ScoreFunction
from .sphere import as_unit_vector, pseudo_inverse, sign_vectors

_CLAMP = 1e-9
_DEGENERACY_TOL = 1e-10


def chi2_cdf(x: float, df: int) -> float:
    """Chi-square cdf via the regularized lower incomplete gamma function."""
    if df < 1:
        raise ValueError("df must be >= 1")
    if x < 0:
        raise ValueError("x must be >= 0")
    return float(sc.gammainc(df / 2.0, x / 2.0))


def chi2_sf(x: float, df: int) -> float:
    """Upper tail 1 - chi2_cdf, computed without cancellation."""
    if df < 1:
        raise ValueError("df must be >= 1")
    if x < 0:
        raise ValueError("x must be >= 0")
    return float(sc.gammaincc(df / 2.0, x / 2.0))


def chi2_quantile(p: float, df: int) -> float:
    """Inverse chi-square cdf at probability ``p`` in (0, 1)."""
    if df < 1:
        raise ValueError("df must be >= 1")
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie strictly between 0 and 1")
    return float(2.0 * sc.gammaincinv(df / 2.0, p))


@dataclass(frozen=True)
class GroupSummary:
    """Plug-in moments of one group against the common location estimate."""

    n: int
    b_hat: float  # 1 - mean (x'theta)^2
    e_hat: float  # mean x'theta
    d_hat: float  # e_hat / b_hat


@dataclass(frozen=True)
class RankGroupSummary:
    """Per-group score diagnostics of the rank statistic."""

    n: int
    jk: float
    j_hat: float
    rho_hat: float


@dataclass(frozen=True)
class TestResult:
    statistic: float
    df: int
    p_value: float
    theta_hat: np.ndarray
    per_group: tuple
    method: str

    def __post_init__(self):
        th = np.asarray(self.theta_hat, dtype=float)
        th.setflags(write=False)
        object.__setattr__(self, "theta_hat", th)

    def reject(self, alpha: float = 0.05) -> bool:
        return self.p_value < alpha

    def asdict(self) -> dict:
        return {
            "statistic": self.statistic,
            "df": self.df,
            "p_value": self.p_value,
            "theta_hat": self.theta_hat.tolist(),
            "method": self.method,
        }


def _clamped(q: float) -> float:
    if q < -_CLAMP:
        raise NegativeStatisticError(f"statistic {q!r} negative beyond the clamp tolerance")
    return max(q, 0.0)


def _group_summaries(ms: MultiSample, theta_hat: np.ndarray) -> list[GroupSummary]:
    out = []
    for i, g in enumerate(ms.groups):
        proj = g @ theta_hat
        e_hat = float(np.mean(proj))
        b_hat = float(1.0 - np.mean(proj**2))
        if b_hat <= _DEGENERACY_TOL:
            raise DegenerateGroupError(i, f"B_hat = {b_hat:.3g} (all mass at +-theta_hat)")
        if abs(e_hat) <= _DEGENERACY_TOL:
            raise DegenerateGroupError(i, f"E_hat = {e_hat:.3g} (D_hat undefined)")
        out.append(GroupSummary(n=g.shape[0], b_hat=b_hat, e_hat=e_hat, d_hat=e_hat / b_hat))
    return out


def _finalize(statistic: float, ms: MultiSample, theta_hat, per_group, method: str) -> TestResult:
    df = (ms.m - 1) * (ms.k - 1)
    stat = _clamped(statistic)
    return TestResult(
        statistic=stat,
        df=df,
        p_value=chi2_sf(stat, df),
        theta_hat=theta_hat,
        per_group=tuple(per_group),
        method=method,
    )


def pseudo_fvml_test(ms: MultiSample, theta_hat=None) -> TestResult:
    """Studentized spherical-mean ANOVA statistic (closed form).

    Parameters
    ----------
    ms : MultiSample
        m >= 2 groups of unit vectors.
    theta_hat : array_like, optional
        Common-location estimate; defaults to the pooled spherical mean.

    Returns
    -------
    TestResult
        Statistic, (m-1)(k-1) degrees of freedom, p-value, and per-group
        plug-in moments.

    Raises
    ------
    DegenerateGroupError
        When a group's plug-in B or E is numerically zero, which voids the
        studentization.
    """
    theta = spherical_mean(ms) if theta_hat is None else as_unit_vector(theta_hat)
    k = ms.k
    n = ms.total
    stats = _group_summaries(ms, theta)
    h_hat = sum(g.n / n * g.d_hat**2 * g.b_hat for g in stats)

    xbars = np.array([g.mean(axis=0) for g in ms.groups])
    tangents = xbars - np.outer(xbars @ theta, theta)
    gram = tangents @ tangents.T

    sizes = ms.sizes.astype(float)
    direct = sum(
        (k - 1) * sizes[i] * stats[i].d_hat / stats[i].e_hat * gram[i, i] for i in range(ms.m)
    )
    d_vec = np.array([g.d_hat for g in stats])
    coupling = (k - 1) / (n * h_hat) * float(
        (sizes * d_vec) @ gram @ (sizes * d_vec)
    )
    return _finalize(direct - coupling, ms, theta, stats, "pseudo_fvml")


def _resolve_cross_info(
    ms: MultiSample,
    theta: np.ndarray,
    scores: Sequence[ScoreFunction],
    cross_info: Optional[Sequence[CrossInfoEstimate]],
) -> list[CrossInfoEstimate]:
    if cross_info is not None:
        if len(cross_info) != ms.m:
            raise ValueError("cross_info must supply one estimate per group")
        return list(cross_info)
    out = []
    for i, (g, score) in enumerate(zip(ms.groups, scores)):
        try:
            out.append(cross_info_estimate(g, theta, score))
        except SphanovaError as exc:
            exc.group_index = i
            raise
    return out


def rank_test(
    ms: MultiSample,
    scores: Sequence[ScoreFunction],
    theta_hat=None,
    cross_info: Optional[Sequence[CrossInfoEstimate]] = None,
) -> TestResult:
    """Sign-and-rank ANOVA statistic for an m-tuple of score functions.

    The statistic depends on the data only through the ranks of the
    projections and the spherical signs at ``theta_hat``, plus the estimated
    cross-information weights.  Pass ``cross_info`` to reuse estimates (or to
    hold them fixed across invariance checks); otherwise they are estimated
    per group by :func:`sphanova.estimators.cross_info_estimate`, and any
    failure is re-raised with the offending group's index attached.
    """
    if len(scores) != ms.m:
        raise ValueError(f"need {ms.m} score functions, got {len(scores)}")
    theta = spherical_mean(ms) if theta_hat is None else as_unit_vector(theta_hat)
    k = ms.k
    n = ms.total
    estimates = _resolve_cross_info(ms, theta, scores, cross_info)

    ubars = []
    for g, score in zip(ms.groups, scores):
        proj, signs = sign_vectors(theta, g)
        order = np.argsort(proj, kind="stable")
        rk = np.empty(g.shape[0], dtype=int)
        rk[order] = np.arange(1, g.shape[0] + 1)
        kv = score.table(g.shape[0])[rk - 1]
        ubars.append((kv @ signs) / g.shape[0])
    ubars = np.array(ubars)
    gram = ubars @ ubars.T

    sizes = ms.sizes.astype(float)
    jk = np.array([s.jk for s in scores])
    j_hat = np.array([e.j_hat for e in estimates])
    h_hat = float(np.sum(sizes / n * j_hat**2 / jk))
    direct = float(np.sum((k - 1) * sizes / jk * np.diag(gram)))
    weights = sizes * j_hat / jk
    coupling = (k - 1) / (n * h_hat) * float(weights @ gram @ weights)

    per_group = tuple(
        RankGroupSummary(n=int(sz), jk=float(s.jk), j_hat=e.j_hat, rho_hat=e.rho_hat)
        for sz, s, e in zip(ms.sizes, scores, estimates)
    )
    return _finalize(direct - coupling, ms, theta, per_group, "rank")


def _perp_matrix(
    base_coefs: np.ndarray,
    cross_coefs: np.ndarray,
    proj: np.ndarray,
    weights: np.ndarray,
    tol: float = 1e-10,
) -> np.ndarray:
    """Residual information matrix of the constrained location problem.

    Given block-diagonal matrices with blocks ``base_coefs[i] * proj`` and
    ``cross_coefs[i] * proj`` (proj the tangent projector) and the constraint
    matrix stacking ``sqrt(weights[i]) * proj``, returns

        base^- - base^- cross U (U' cross base^- cross U)^- U' cross base^-.
    """
    m = base_coefs.size
    k = proj.shape[0]
    base = np.kron(np.diag(base_coefs), proj)
    cross = np.kron(np.diag(cross_coefs), proj)
    upsilon = np.kron(np.sqrt(weights)[:, None], proj)  # (m k, k)
    base_inv = pseudo_inverse(base, tol)
    middle = upsilon.T @ cross @ base_inv @ cross @ upsilon
    middle_inv = pseudo_inverse(middle, tol)
    wing = base_inv @ cross @ upsilon
    return base_inv - wing @ middle_inv @ wing.T


def reference_quadratic_form(
    ms: MultiSample,
    theta_hat=None,
    mode: str = "pseudo",
    scores: Optional[Sequence[ScoreFunction]] = None,
    cross_info: Optional[Sequence[CrossInfoEstimate]] = None,
    kappas: Optional[Sequence[float]] = None,
) -> TestResult:
    """Statistic via the explicit pseudo-inverse sandwich (validation path).

    Builds the stacked central sequence, estimated block information matrices
    and the constraint matrix, and evaluates Delta' Gamma_perp Delta.  Agrees
    with the corresponding closed form to 1e-8 by construction; ``kappas``
    (pseudo mode) rescales the score blocks and must not change the result.
    """
    theta = spherical_mean(ms) if theta_hat is None else as_unit_vector(theta_hat)
    k = ms.k
    m = ms.m
    proj = np.eye(k) - np.outer(theta, theta)
    weights = ms.sizes / ms.total
    sizes = ms.sizes.astype(float)

    if mode == "pseudo":
        kap = np.ones(m) if kappas is None else np.asarray(kappas, dtype=float)
        if kap.size != m or np.any(kap <= 0):
            raise ValueError("kappas must give one positive value per group")
        stats = _group_summaries(ms, theta)
        b_hat = np.array([g.b_hat for g in stats])
        e_hat = np.array([g.e_hat for g in stats])
        deltas = [
            kap[i] * np.sqrt(sizes[i]) * proj @ ms.groups[i].mean(axis=0) for i in range(m)
        ]
        base_coefs = kap**2 * b_hat / (k - 1)
        cross_coefs = kap * e_hat
        per_group = tuple(stats)
        method = "reference[pseudo_fvml]"
    elif mode == "rank":
        if scores is None or len(scores) != m:
            raise ValueError("rank mode needs one score function per group")
        estimates = _resolve_cross_info(ms, theta, scores, cross_info)
        deltas = []
        for g, score in zip(ms.groups, scores):
            p, signs = sign_vectors(theta, g)
            order = np.argsort(p, kind="stable")
            rk = np.empty(g.shape[0], dtype=int)
            rk[order] = np.arange(1, g.shape[0] + 1)
            kv = score.table(g.shape[0])[rk - 1]
            deltas.append((kv @ signs) / np.sqrt(g.shape[0]))
        jk = np.array([s.jk for s in scores])
        j_hat = np.array([e.j_hat for e in estimates])
        base_coefs = jk / (k - 1)
        cross_coefs = j_hat / (k - 1)
        per_group = tuple(
            RankGroupSummary(n=int(sz), jk=float(s.jk), j_hat=e.j_hat, rho_hat=e.rho_hat)
            for sz, s, e in zip(ms.sizes, scores, estimates)
        )
        method = "reference[rank]"
    else:
        raise ValueError(f"unknown mode {mode!r}")

    delta = np.concatenate(deltas)
    perp = _perp_matrix(np.asarray(base_coefs), np.asarray(cross_coefs), proj, weights)
    return _finalize(float(delta @ perp @ delta), ms, theta, per_group, method)
