"""Pitman asymptotic relative efficiencies and local noncentrality parameters.

The homogeneous closed form compares the rank test with a common score K
against the studentized spherical-mean test when all groups share one angular
density g:

    ARE = Jc(K, g)^2 * B_g / (J(K) * C_g^2),

where Jc is the cross integral of the two scores, J(K) = int_0^1 K^2, and
B_g, C_g are the projection-law constants.  For a matched pair (K = K_g) the
FvML case gives exactly 1.  The general (possibly heterogeneous) comparison
goes through the noncentrality parameters of the two limiting noncentral
chi-square laws, exposed here as ``noncentrality_pseudo`` and
``noncentrality_rank``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import ncx2

from .anova import _perp_matrix, chi2_quantile
from .models import (
    AngularModel,
    LawConstants,
    fvml,
    j_cross,
    law_constants,
    linear,
    logarithmic,
    logistic,
    make_tilde_law,
    score_from_model,
)
from .sphere import as_unit_vector

ARE_TABLE_DENSITIES: tuple[AngularModel, ...] = (
    fvml(1.0),
    fvml(2.0),
    fvml(6.0),
    linear(2.0),
    linear(4.0),
    logarithmic(2.5),
    logarithmic(4.0),
    logistic(1.0, 1.0),
    logistic(2.0, 1.0),
)

ARE_TABLE_SCORES: tuple[AngularModel, ...] = (
    fvml(2.0),
    fvml(6.0),
    linear(2.0),
    linear(4.0),
    logarithmic(2.5),
    logistic(1.0, 1.0),
    logistic(2.0, 1.0),
)


def are_homogeneous(score_model: AngularModel, true_model: AngularModel, k: int = 3) -> float:
    """ARE of the rank test with score K_{score_model} vs. the studentized
    spherical-mean test, all groups drawn from ``true_model`` on S^{k-1}."""
    truth = make_tilde_law(true_model, k)
    consts = law_constants(truth)
    score = score_from_model(score_model, k)
    cross = j_cross(score, truth)
    return cross**2 * consts.B / (score.jk * consts.C**2)


def are_table(k: int = 3) -> np.ndarray:
    """9 x 7 grid of homogeneous AREs over the built-in density/score catalog.

    Rows follow ``ARE_TABLE_DENSITIES``, columns ``ARE_TABLE_SCORES``.
    """
    out = np.empty((len(ARE_TABLE_DENSITIES), len(ARE_TABLE_SCORES)))
    scores = [score_from_model(model, k) for model in ARE_TABLE_SCORES]
    for i, density in enumerate(ARE_TABLE_DENSITIES):
        truth = make_tilde_law(density, k)
        consts = law_constants(truth)
        for j, score in enumerate(scores):
            cross = j_cross(score, truth)
            out[i, j] = cross**2 * consts.B / (score.jk * consts.C**2)
    return out


@dataclass(frozen=True)
class NoncentralityInput:
    """Local shift specification for the noncentral limits.

    ``shifts`` stacks the m tangent blocks t_i (each orthogonal to ``theta``
    within 1e-10, the sphere's tangency constraint); ``weights`` are the
    limiting relative group sizes r_i.
    """

    theta: np.ndarray
    shifts: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        theta = as_unit_vector(self.theta)
        shifts = np.atleast_2d(np.asarray(self.shifts, dtype=float))
        weights = np.asarray(self.weights, dtype=float)
        if shifts.shape[1] != theta.size:
            raise ValueError("shift blocks must have the same dimension as theta")
        if weights.shape != (shifts.shape[0],):
            raise ValueError("need one weight per shift block")
        if np.any(weights <= 0) or abs(float(weights.sum()) - 1.0) > 1e-9:
            raise ValueError("weights must be positive and sum to 1")
        tangency = np.abs(shifts @ theta)
        if np.any(tangency > 1e-10):
            bad = int(np.argmax(tangency))
            raise ValueError(
                f"shift block {bad} violates tangency: |theta' t| = {tangency[bad]:.3g}"
            )
        theta.setflags(write=False)
        shifts.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "shifts", shifts)
        object.__setattr__(self, "weights", weights)

    @property
    def m(self) -> int:
        return self.shifts.shape[0]

    @property
    def k(self) -> int:
        return self.theta.size


def _noncentrality(inp: NoncentralityInput, base: np.ndarray, cross: np.ndarray) -> float:
    proj = np.eye(inp.k) - np.outer(inp.theta, inp.theta)
    perp = _perp_matrix(base, cross, proj, inp.weights)
    shift_op = np.kron(np.diag(cross), proj)
    t = inp.shifts.ravel()
    value = float(t @ shift_op @ perp @ shift_op @ t)
    return max(value, 0.0)


def noncentrality_pseudo(inp: NoncentralityInput, constants: Sequence[LawConstants]) -> float:
    """Noncentrality of the studentized spherical-mean test under local shifts.

    ``constants`` supplies the population (B, C, E) per group.  The FvML score
    concentrations cancel in the sandwich, exactly as in the statistic itself,
    so unit concentrations are used.  The constraint operator has blocks
    E (I - theta theta') and the contiguous-shift operator C/(k-1) times the
    projector; the two coincide analytically through C = (k-1) E but are kept
    distinct, as computed, on purpose.
    """
    if len(constants) != inp.m:
        raise ValueError("need one LawConstants per shift block")
    k = inp.k
    b = np.array([c.B for c in constants])
    e = np.array([c.E for c in constants])
    c_vals = np.array([c.C for c in constants])
    proj = np.eye(k) - np.outer(inp.theta, inp.theta)
    perp = _perp_matrix(b / (k - 1), e, proj, inp.weights)
    shift_op = np.kron(np.diag(c_vals / (k - 1)), proj)
    t = inp.shifts.ravel()
    return max(float(t @ shift_op @ perp @ shift_op @ t), 0.0)


def noncentrality_rank(
    inp: NoncentralityInput, jk: Sequence[float], jcross: Sequence[float]
) -> float:
    """Noncentrality of the rank test: shift operator blocks Jc(K_i, g_i)/(k-1),
    information blocks J(K_i)/(k-1)."""
    jk = np.asarray(jk, dtype=float)
    jcross = np.asarray(jcross, dtype=float)
    if jk.shape != (inp.m,) or jcross.shape != (inp.m,):
        raise ValueError("need one J(K) and one Jc(K, g) per shift block")
    k = inp.k
    return _noncentrality(inp, base=jk / (k - 1), cross=jcross / (k - 1))


def asymptotic_power(noncentrality: float, df: int, alpha: float = 0.05) -> float:
    """Limiting power of a chi-square test with the given noncentrality."""
    if noncentrality < 0:
        raise ValueError("noncentrality must be >= 0")
    cutoff = chi2_quantile(1.0 - alpha, df)
    if noncentrality == 0.0:
        return alpha
    return float(ncx2.sf(cutoff, df, noncentrality))
