"""Replicated rejection-frequency experiments and null-distribution diagnostics."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.stats import chi2 as chi2_dist
from scipy.stats import kstest

from .anova import chi2_quantile, pseudo_fvml_test, rank_test
from .errors import ConfigError, ExperimentInvalidError, SphanovaError
from .estimators import MultiSample, spherical_mean
from .models import make_tilde_law, parse_model_spec, score_from_model
from .sampling import RngStream, sample_rotsym
from .sphere import rotation_xi


@dataclass(frozen=True)
class TestSpec:
    """One test to run per replication: ``pseudo`` or ``rank`` with score specs."""

    method: str
    scores: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        if self.method not in ("pseudo", "rank"):
            raise ConfigError(f"unknown test method {self.method!r}")
        if self.method == "rank":
            if not self.scores:
                raise ConfigError("rank tests need one score spec per group")
            object.__setattr__(self, "scores", tuple(self.scores))
        elif self.scores:
            raise ConfigError("the pseudo test takes no scores")

    @property
    def label(self) -> str:
        if self.method == "pseudo":
            return "pseudo"
        return "rank(" + ",".join(self.scores) + ")"

    def to_dict(self) -> dict:
        out: dict = {"method": self.method}
        if self.scores:
            out["scores"] = list(self.scores)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "TestSpec":
        scores = data.get("scores")
        return cls(method=data.get("method", ""), scores=tuple(scores) if scores else None)


@dataclass(frozen=True)
class ExperimentConfig:
    """Design of a replicated m-sample experiment.

    Groups are drawn at the common location ``theta0`` from the configured
    angular models; the ``alternative`` group is then rotated by the sixteenth
    turn O_xi for each xi in the grid (xi = 0 is the null).  Replication r
    consumes the stream (seed, r), so results do not depend on execution order.
    """

    m: int
    k: int
    sizes: tuple[int, ...]
    theta0: tuple[float, ...]
    models: tuple[str, ...]
    alternative_group: int
    xi_grid: tuple[int, ...]
    tests: tuple[TestSpec, ...]
    replications: int
    seed: int
    alpha: float = 0.05

    def __post_init__(self):
        if self.m != len(self.sizes) or self.m != len(self.models) or self.m < 2:
            raise ConfigError("m must match the number of sizes and models, and be >= 2")
        if any(int(n) < 1 for n in self.sizes):
            raise ConfigError("group sizes must be positive")
        if self.k != len(self.theta0) or self.k < 2:
            raise ConfigError("k must match the dimension of theta0 and be >= 2")
        norm = float(np.linalg.norm(self.theta0))
        if abs(norm - 1.0) > 1e-6:
            raise ConfigError(f"theta0 must be a unit vector (norm {norm!r})")
        if not 0 <= self.alternative_group < self.m:
            raise ConfigError("alternative group index out of range")
        if not self.xi_grid:
            raise ConfigError("xi grid must be nonempty")
        if any(int(x) != 0 for x in self.xi_grid) and self.k != 3:
            raise ConfigError("nonzero xi rotations are defined for k = 3 only")
        if not self.tests:
            raise ConfigError("configure at least one test")
        for spec in self.tests:
            if spec.method == "rank" and len(spec.scores) != self.m:
                raise ConfigError(f"test {spec.label}: need {self.m} score specs")
        if int(self.replications) < 1:
            raise ConfigError("replications must be >= 1")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError("alpha must lie in (0, 1)")
        object.__setattr__(self, "sizes", tuple(int(n) for n in self.sizes))
        object.__setattr__(self, "theta0", tuple(float(v) / norm for v in self.theta0))
        object.__setattr__(self, "models", tuple(self.models))
        object.__setattr__(self, "xi_grid", tuple(int(x) for x in self.xi_grid))
        object.__setattr__(self, "tests", tuple(self.tests))

    @property
    def df(self) -> int:
        return (self.m - 1) * (self.k - 1)

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "k": self.k,
            "sizes": list(self.sizes),
            "theta0": list(self.theta0),
            "models": list(self.models),
            "alternative": {"group": self.alternative_group, "xi": list(self.xi_grid)},
            "tests": [t.to_dict() for t in self.tests],
            "replications": self.replications,
            "seed": self.seed,
            "alpha": self.alpha,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        try:
            alternative = data.get("alternative", {"group": len(data["sizes"]) - 1, "xi": [0]})
            return cls(
                m=int(data.get("m", len(data["sizes"]))),
                k=int(data.get("k", len(data["theta0"]))),
                sizes=tuple(data["sizes"]),
                theta0=tuple(data["theta0"]),
                models=tuple(data["models"]),
                alternative_group=int(alternative["group"]),
                xi_grid=tuple(alternative["xi"]),
                tests=tuple(TestSpec.from_dict(t) for t in data["tests"]),
                replications=int(data["replications"]),
                seed=int(data["seed"]),
                alpha=float(data.get("alpha", 0.05)),
            )
        except KeyError as exc:
            raise ConfigError(f"config is missing field {exc.args[0]!r}") from exc


@dataclass(frozen=True)
class CellReport:
    """Rejection tally of one (test, xi) cell."""

    xi: int
    rejections: int
    failures: int
    evaluated: int
    frequency: float
    std_error: float
    elapsed_seconds: float

    def to_dict(self) -> dict:
        return {
            "xi": self.xi,
            "rejections": self.rejections,
            "failures": self.failures,
            "evaluated": self.evaluated,
            "frequency": self.frequency,
            "std_error": self.std_error,
            "elapsed_seconds": self.elapsed_seconds,
        }


@dataclass(frozen=True)
class ExperimentReport:
    config: ExperimentConfig
    cells: dict[str, tuple[CellReport, ...]]
    statistics: dict[str, np.ndarray] = field(repr=False)

    def cell(self, label: str, xi: int) -> CellReport:
        for c in self.cells[label]:
            if c.xi == xi:
                return c
        raise KeyError(f"no cell for test {label!r} at xi={xi}")

    def to_dict(self, include_statistics: bool = False) -> dict:
        out = {
            "config": self.config.to_dict(),
            "results": {
                label: [c.to_dict() for c in cells] for label, cells in self.cells.items()
            },
        }
        if include_statistics:
            out["statistics"] = {
                label: np.where(np.isnan(stats), None, stats).tolist()
                for label, stats in self.statistics.items()
            }
        return out

    def text_table(self) -> str:
        """Rejection frequencies as a fixed-width table, tests by xi."""
        xis = list(self.config.xi_grid)
        label_width = max(len(label) for label in self.cells)
        header = "test".ljust(label_width) + "".join(f"   xi={xi:<4d}" for xi in xis)
        lines = [header, "-" * len(header)]
        for label, cells in self.cells.items():
            row = label.ljust(label_width)
            for c in cells:
                row += f"   {c.frequency:.4f} "
            lines.append(row)
        return "\n".join(lines)


def _resolve_tests(cfg: ExperimentConfig):
    resolved = []
    for spec in cfg.tests:
        if spec.method == "pseudo":
            resolved.append((spec.label, None))
        else:
            scores = tuple(
                score_from_model(parse_model_spec(s), cfg.k) for s in spec.scores
            )
            for score, n in zip(scores, cfg.sizes):
                score.table(n)  # warm the K(j/(n+1)) memo once for all replications
            resolved.append((spec.label, scores))
    return resolved


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Run the replicated design and tally rejections at level ``cfg.alpha``.

    Per-replication domain errors (degenerate estimates, failed scans) are
    recorded as failures of the affected (test, xi) cell rather than aborting
    the run; if any cell's failure count exceeds 1% of the replications the
    whole run is declared invalid.

    Deterministic given the seed: replication r draws from stream (seed, r),
    and the same draws are reused across the xi grid, mirroring a
    common-random-numbers design.
    """
    theta0 = np.asarray(cfg.theta0)
    laws = [make_tilde_law(parse_model_spec(s), cfg.k) for s in cfg.models]
    tests = _resolve_tests(cfg)
    cutoff = chi2_quantile(1.0 - cfg.alpha, cfg.df)
    rotations = {xi: rotation_xi(xi) for xi in cfg.xi_grid if xi != 0}

    n_tests, n_xi, reps = len(tests), len(cfg.xi_grid), cfg.replications
    rejections = np.zeros((n_tests, n_xi), dtype=int)
    failures = np.zeros((n_tests, n_xi), dtype=int)
    elapsed = np.zeros((n_tests, n_xi))
    stats = np.full((n_tests, n_xi, reps), np.nan)

    for r in range(reps):
        gen = RngStream(cfg.seed, r).generator()
        draws = [sample_rotsym(theta0, law, n, gen) for law, n in zip(laws, cfg.sizes)]
        for xi_idx, xi in enumerate(cfg.xi_grid):
            groups = list(draws)
            if xi != 0:
                groups[cfg.alternative_group] = draws[cfg.alternative_group] @ rotations[xi].T
            ms = MultiSample(tuple(groups))
            try:
                theta_hat = spherical_mean(ms)
            except SphanovaError:
                failures[:, xi_idx] += 1
                continue
            for t_idx, (label, scores) in enumerate(tests):
                start = time.perf_counter()
                try:
                    if scores is None:
                        result = pseudo_fvml_test(ms, theta_hat)
                    else:
                        result = rank_test(ms, scores, theta_hat)
                except SphanovaError:
                    failures[t_idx, xi_idx] += 1
                else:
                    stats[t_idx, xi_idx, r] = result.statistic
                    if result.statistic > cutoff:
                        rejections[t_idx, xi_idx] += 1
                elapsed[t_idx, xi_idx] += time.perf_counter() - start

    max_failures = int(np.max(failures))
    if max_failures > 0.01 * reps:
        raise ExperimentInvalidError(
            f"{max_failures} degenerate replications in one cell exceeds 1% of M={reps}"
        )

    cells: dict[str, tuple[CellReport, ...]] = {}
    statistics: dict[str, np.ndarray] = {}
    for t_idx, (label, _) in enumerate(tests):
        row = []
        for xi_idx, xi in enumerate(cfg.xi_grid):
            evaluated = reps - int(failures[t_idx, xi_idx])
            freq = rejections[t_idx, xi_idx] / evaluated if evaluated else float("nan")
            se = float(np.sqrt(freq * (1.0 - freq) / evaluated)) if evaluated else float("nan")
            row.append(
                CellReport(
                    xi=xi,
                    rejections=int(rejections[t_idx, xi_idx]),
                    failures=int(failures[t_idx, xi_idx]),
                    evaluated=evaluated,
                    frequency=float(freq),
                    std_error=se,
                    elapsed_seconds=float(elapsed[t_idx, xi_idx]),
                )
            )
        cells[label] = tuple(row)
        arr = stats[t_idx]
        arr.setflags(write=False)
        statistics[label] = arr
    return ExperimentReport(config=cfg, cells=cells, statistics=statistics)


def null_distribution_check(
    cfg: ExperimentConfig, labels: Optional[Sequence[str]] = None
) -> dict[str, tuple[float, float]]:
    """Kolmogorov-Smirnov check of the null statistic law against chi-square.

    The configuration must sit at the null (xi grid == (0,)).  Returns, per
    test label, the KS distance between the replicated statistics and the
    chi-square law with (m-1)(k-1) degrees of freedom, with its p-value.
    """
    if tuple(cfg.xi_grid) != (0,):
        raise ConfigError("null_distribution_check requires xi_grid == (0,)")
    report = run_experiment(cfg)
    chosen = list(labels) if labels is not None else list(report.statistics)
    out: dict[str, tuple[float, float]] = {}
    for label in chosen:
        values = report.statistics[label][0]
        values = values[np.isfinite(values)]
        ks = kstest(values, chi2_dist(cfg.df).cdf)
        out[label] = (float(ks.statistic), float(ks.pvalue))
    return out
