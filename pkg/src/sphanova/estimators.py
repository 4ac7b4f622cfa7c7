"""Location and cross-information estimators for grouped spherical samples."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    CollinearInputError,
    DegenerateMeanError,
    NoSignChangeError,
    ZeroCentralSequenceError,
)
from .models import ScoreFunction
from .sphere import COLLINEAR_TOL, sign_vectors

RHO_STEP = 0.01
RHO_MAX = 100.0
RHO_TOL = 1e-6
_SCAN_CHUNK = 128


@dataclass(frozen=True)
class MultiSample:
    """m groups of unit vectors sharing a common dimension k."""

    groups: tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.groups) < 2:
            raise ValueError("a MultiSample needs at least two groups")
        arrays = []
        k = None
        for i, g in enumerate(self.groups):
            arr = np.array(g, dtype=float)
            if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 2:
                raise ValueError(f"group {i} must be a nonempty (n_i, k>=2) array")
            if k is None:
                k = arr.shape[1]
            elif arr.shape[1] != k:
                raise ValueError(f"group {i} has k={arr.shape[1]}, expected {k}")
            norms = np.linalg.norm(arr, axis=1)
            if np.max(np.abs(norms - 1.0)) > 1e-9:
                bad = int(np.argmax(np.abs(norms - 1.0)))
                raise ValueError(f"group {i} row {bad} is not unit (norm {norms[bad]!r})")
            arr.setflags(write=False)
            arrays.append(arr)
        object.__setattr__(self, "groups", tuple(arrays))

    @property
    def m(self) -> int:
        return len(self.groups)

    @property
    def k(self) -> int:
        return self.groups[0].shape[1]

    @property
    def sizes(self) -> np.ndarray:
        return np.array([g.shape[0] for g in self.groups])

    @property
    def total(self) -> int:
        return int(self.sizes.sum())

    @property
    def weights(self) -> np.ndarray:
        """Relative group sizes r_i = n_i / n."""
        sizes = self.sizes
        return sizes / sizes.sum()

    def pooled(self) -> np.ndarray:
        return np.vstack(self.groups)


def spherical_mean(ms: MultiSample) -> np.ndarray:
    """Pooled spherical mean: the normalized sum of all observations.

    Raises DegenerateMeanError when the pooled resultant is numerically zero,
    i.e. the data carry no preferred direction.
    """
    resultant = ms.pooled().sum(axis=0)
    norm = float(np.linalg.norm(resultant))
    if norm <= 1e-10:
        raise DegenerateMeanError(f"pooled resultant norm {norm:.3g}")
    return resultant / norm


def ranks(group, theta) -> np.ndarray:
    """Ranks (1..n) of the projections x'theta within a group.

    Ties are broken by input order; under a continuous law they occur with
    probability zero, so the rule only stabilizes degenerate synthetic input.
    """
    proj = np.atleast_2d(np.asarray(group, dtype=float)) @ np.asarray(theta, dtype=float)
    return _ranks_of(proj)


def _ranks_of(proj: np.ndarray) -> np.ndarray:
    order = np.argsort(proj, axis=0, kind="stable")
    out = np.empty_like(order)
    if proj.ndim == 1:
        out[order] = np.arange(1, proj.shape[0] + 1)
    else:
        np.put_along_axis(
            out, order, np.arange(1, proj.shape[0] + 1)[:, None].repeat(proj.shape[1], 1), axis=0
        )
    return out


def rank_central_sequence(group, theta, score: ScoreFunction) -> np.ndarray:
    """Rank-based central sequence n^{-1/2} sum_j K(R_j/(n+1)) S_theta(X_j).

    The result lies in the tangent space at theta.  Raises CollinearInputError
    if any observation is collinear with theta.
    """
    group = np.atleast_2d(np.asarray(group, dtype=float))
    proj, signs = sign_vectors(theta, group)
    kv = score.table(group.shape[0])[_ranks_of(proj) - 1]
    return (kv @ signs) / np.sqrt(group.shape[0])


@dataclass(frozen=True)
class CrossInfoEstimate:
    """Result of the rho-scan estimator of a cross-information coefficient.

    ``j_hat = 1 / rho_hat`` estimates the cross integral between the score in
    use and the score of the (unknown) underlying law.  ``trace`` records every
    (rho, h(rho)) evaluation, scan and bisection alike, for auditability.
    """

    rho_hat: float
    j_hat: float
    trace: np.ndarray

    def __post_init__(self):
        tr = np.asarray(self.trace, dtype=float)
        tr.setflags(write=False)
        object.__setattr__(self, "trace", tr)


def cross_info_estimate(
    group,
    theta_hat,
    score: ScoreFunction,
    *,
    rho_step: float = RHO_STEP,
    rho_max: float = RHO_MAX,
    rho_tol: float = RHO_TOL,
) -> CrossInfoEstimate:
    """Estimate a cross-information coefficient by the sign-change scan.

    The location is perturbed along the rank central sequence,
    ``theta(rho) = normalize(theta_hat + n^{-1/2} rho (k-1) P Delta)``, and
    ``h(rho) = (k-1)/JK * Delta' Delta(rho)`` is evaluated with ranks and signs
    recomputed at each perturbed location.  h starts nonnegative and first
    turns negative near rho = 1/J(K, g); the first sign change is located to
    ``rho_tol`` by bisection on the bracketing grid interval and inverted.

    Raises
    ------
    ZeroCentralSequenceError
        If the central sequence at theta_hat has numerically zero norm.
    NoSignChangeError
        If h(rho) >= 0 for every rho <= rho_max (pathological data or a far
        too small group).
    """
    x = np.atleast_2d(np.asarray(group, dtype=float))
    theta = np.asarray(theta_hat, dtype=float)
    n, k = x.shape
    kv_table = score.table(n)
    sqrt_n = np.sqrt(n)

    delta0 = rank_central_sequence(x, theta, score)
    norm0 = float(np.linalg.norm(delta0))
    if norm0 <= 1e-10:
        raise ZeroCentralSequenceError(f"central sequence norm {norm0:.3g}")
    direction = (k - 1) / sqrt_n * (delta0 - np.dot(delta0, theta) * theta)

    def h_batch(rhos: np.ndarray) -> np.ndarray:
        thetas = theta[None, :] + rhos[:, None] * direction[None, :]
        thetas = thetas / np.linalg.norm(thetas, axis=1)[:, None]
        proj = x @ thetas.T  # (n, C)
        resid = x[:, None, :] - proj[:, :, None] * thetas[None, :, :]
        norms = np.linalg.norm(resid, axis=2)
        if np.any(norms <= COLLINEAR_TOL):
            raise CollinearInputError("perturbed location collinear with an observation")
        kv = kv_table[_ranks_of(proj) - 1]
        deltas = np.einsum("nc,nck->ck", kv, resid / norms[..., None]) / sqrt_n
        return (k - 1) / score.jk * (deltas @ delta0)

    trace: list[tuple[float, float]] = []
    lo = 0.0
    hi = None
    n_grid = int(np.floor(rho_max / rho_step + 1e-9))
    start = 1
    while start <= n_grid and hi is None:
        stop = min(start + _SCAN_CHUNK - 1, n_grid)
        rhos = rho_step * np.arange(start, stop + 1)
        h_vals = h_batch(rhos)
        trace.extend(zip(rhos.tolist(), h_vals.tolist()))
        negative = np.nonzero(h_vals < 0.0)[0]
        if negative.size:
            first = int(negative[0])
            hi = float(rhos[first])
            lo = float(rhos[first - 1]) if first > 0 else (rhos[0] - rho_step)
        start = stop + 1
    if hi is None:
        raise NoSignChangeError(rho_max)

    lo = max(lo, 0.0)
    while hi - lo > rho_tol:
        mid = 0.5 * (lo + hi)
        h_mid = float(h_batch(np.array([mid]))[0])
        trace.append((mid, h_mid))
        if h_mid < 0.0:
            hi = mid
        else:
            lo = mid
    rho_hat = 0.5 * (lo + hi)
    return CrossInfoEstimate(rho_hat=rho_hat, j_hat=1.0 / rho_hat, trace=np.array(trace))
