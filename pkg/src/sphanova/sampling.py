"""Sampling from rotationally symmetric laws via the tangent-normal decomposition."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .models import TildeLaw
from .sphere import as_unit_vector


@dataclass(frozen=True)
class RngStream:
    """A reproducible random stream identified by (seed, stream id).

    Identical (seed, stream) pairs produce identical output sequences; distinct
    stream ids are statistically independent, so parallel replications can use
    (seed, replication index) and aggregate order-independently.
    """

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream,))
        return np.random.default_rng(ss)


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError("rng must be an RngStream or numpy Generator")


def sample_subsphere(theta, rng, size: int | None = None) -> np.ndarray:
    """Uniform draws from the subsphere orthogonal to ``theta``.

    Gaussian fill, tangent projection, normalization; the measure-zero event
    of a zero projection is resampled.  Returns shape (k,) when ``size`` is
    None, else (size, k).
    """
    theta = as_unit_vector(theta)
    gen = _as_generator(rng)
    n = 1 if size is None else int(size)
    k = theta.size
    z = gen.standard_normal((n, k))
    resid = z - np.outer(z @ theta, theta)
    norms = np.linalg.norm(resid, axis=1)
    while np.any(norms <= 1e-12):
        redo = norms <= 1e-12
        z = gen.standard_normal((int(np.sum(redo)), k))
        resid[redo] = z - np.outer(z @ theta, theta)
        norms = np.linalg.norm(resid, axis=1)
    out = resid / norms[:, None]
    return out[0] if size is None else out


def sample_rotsym(theta, law: TildeLaw, n: int, rng) -> np.ndarray:
    """n i.i.d. draws from the rotationally symmetric law with location ``theta``.

    Each draw is X = t theta + sqrt(1 - t^2) V with t from the tilde law by
    inverse-cdf sampling and V uniform on the subsphere orthogonal to theta.
    The uniforms for t are consumed before the Gaussian fill, so the output is
    a pure function of the stream state.
    """
    theta = as_unit_vector(theta)
    if theta.size != law.k:
        raise ValueError(f"theta has k={theta.size} but the law was built for k={law.k}")
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    gen = _as_generator(rng)
    t = np.asarray(law.quantile(gen.uniform(size=n)), dtype=float)
    v = sample_subsphere(theta, gen, size=n)
    x = t[:, None] * theta[None, :] + np.sqrt(np.clip(1.0 - t * t, 0.0, None))[:, None] * v
    x /= np.linalg.norm(x, axis=1)[:, None]
    return x
