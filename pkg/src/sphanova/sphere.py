"""Unit-sphere geometry: projections, spherical signs, rotations, pseudo-inverse."""

from __future__ import annotations

import numpy as np

from .errors import CollinearInputError

UNIT_TOL = 1e-12
COLLINEAR_TOL = 1e-12


def as_unit_vector(x, *, tol: float = UNIT_TOL) -> np.ndarray:
    """Return ``x`` as a float vector after checking |x| = 1 within ``tol``."""
    v = np.asarray(x, dtype=float)
    if v.ndim != 1 or v.size < 2:
        raise ValueError("unit vector must be one-dimensional with k >= 2")
    norm = float(np.linalg.norm(v))
    if abs(norm - 1.0) > tol:
        raise ValueError(f"vector norm {norm!r} deviates from 1 by more than {tol:g}")
    return v


def normalize(x) -> np.ndarray:
    """Scale a nonzero vector to unit norm."""
    v = np.asarray(x, dtype=float)
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        raise ValueError("cannot normalize the zero vector")
    return v / norm


def tangent_project(theta, x) -> np.ndarray:
    """Project ``x`` onto the tangent space at ``theta``: (I - theta theta')x."""
    theta = np.asarray(theta, dtype=float)
    x = np.asarray(x, dtype=float)
    if theta.shape != x.shape:
        raise ValueError(f"dimension mismatch: theta has shape {theta.shape}, x has {x.shape}")
    return x - np.dot(x, theta) * theta


def sign_vector(theta, x) -> np.ndarray:
    """Spherical sign of ``x`` at ``theta``: the unit direction of its tangent part.

    Raises
    ------
    CollinearInputError
        If ``x`` is numerically collinear with ``theta`` (tangent part below
        ``COLLINEAR_TOL``); the sign is undefined and callers must reject or
        resample such points.
    """
    resid = tangent_project(theta, x)
    norm = float(np.linalg.norm(resid))
    if norm <= COLLINEAR_TOL:
        raise CollinearInputError(f"input collinear with theta (tangent norm {norm:.3g})")
    return resid / norm


def sign_vectors(theta, x) -> tuple[np.ndarray, np.ndarray]:
    """Projections and spherical signs for a batch of rows.

    Returns ``(proj, signs)`` where ``proj[i] = x[i]'theta`` and ``signs[i]``
    is the spherical sign of row ``i``.  Raises CollinearInputError if any
    row is collinear with ``theta``.
    """
    theta = np.asarray(theta, dtype=float)
    x = np.atleast_2d(np.asarray(x, dtype=float))
    proj = x @ theta
    resid = x - np.outer(proj, theta)
    norms = np.linalg.norm(resid, axis=1)
    if np.any(norms <= COLLINEAR_TOL):
        idx = int(np.argmin(norms))
        raise CollinearInputError(f"row {idx} collinear with theta (tangent norm {norms[idx]:.3g})")
    return proj, resid / norms[:, None]


def rotation_xi(xi: int) -> np.ndarray:
    """3x3 rotation by angle pi*xi/16 about the third coordinate axis."""
    angle = np.pi * xi / 16.0
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def is_rotation(m, *, tol: float = UNIT_TOL) -> bool:
    """True when ``m`` is orthogonal with determinant 1 within ``tol``."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    eye = np.eye(m.shape[0])
    return bool(
        np.max(np.abs(m.T @ m - eye)) <= tol and abs(np.linalg.det(m) - 1.0) <= tol
    )


def pseudo_inverse(m, tol: float = 1e-10) -> np.ndarray:
    """Moore-Penrose pseudo-inverse of a symmetric matrix via eigendecomposition.

    Eigenvalues of magnitude below ``tol * max|eigenvalue|`` are treated as
    exact zeros.  Only symmetric inputs are supported; asymmetry beyond 1e-10
    is rejected.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("pseudo_inverse expects a square matrix")
    if float(np.max(np.abs(m - m.T), initial=0.0)) > 1e-10:
        raise ValueError("pseudo_inverse expects a symmetric matrix")
    w, v = np.linalg.eigh(0.5 * (m + m.T))
    scale = float(np.max(np.abs(w), initial=0.0))
    if scale == 0.0:
        return np.zeros_like(m)
    cutoff = tol * scale
    inv_w = np.where(np.abs(w) > cutoff, 1.0 / np.where(np.abs(w) > cutoff, w, 1.0), 0.0)
    return (v * inv_w) @ v.T
