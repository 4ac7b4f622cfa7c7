"""Exception hierarchy shared across the package."""


class SphanovaError(Exception):
    """Base class for all domain errors raised by this package."""


class QuadratureError(SphanovaError):
    """Adaptive quadrature failed to converge within the depth budget."""


class NotPositiveError(SphanovaError, ValueError):
    """Angular function is not strictly positive on [-1, 1]."""

    def __init__(self, t: float, value: float):
        self.t = float(t)
        self.value = float(value)
        super().__init__(f"angular function not strictly positive: f({t:.6g}) = {value:.6g}")


class NotMonotoneError(SphanovaError, ValueError):
    """Angular function decreases somewhere on [-1, 1]."""

    def __init__(self, t: float, drop: float):
        self.t = float(t)
        self.drop = float(drop)
        super().__init__(f"angular function decreases near t = {t:.6g} (step {drop:.3g})")


class CollinearInputError(SphanovaError):
    """Observation is numerically collinear with the location; its sign is undefined."""


class DegenerateMeanError(SphanovaError):
    """Pooled resultant vector is numerically zero; no preferred direction."""


class DegenerateGroupError(SphanovaError):
    """Plug-in moments of a group are too degenerate for studentization."""

    def __init__(self, group: int, reason: str):
        self.group = int(group)
        self.reason = reason
        super().__init__(f"group {group}: {reason}")


class ZeroCentralSequenceError(SphanovaError):
    """Rank central sequence has (numerically) zero norm; no perturbation direction."""


class NoSignChangeError(SphanovaError):
    """Cross-information scan found no sign change up to the scan bound."""

    def __init__(self, rho_max: float):
        self.rho_max = float(rho_max)
        super().__init__(f"h(rho) stayed nonnegative for all rho <= {rho_max:g}")


class NegativeStatisticError(SphanovaError):
    """Test statistic came out negative beyond the floating-point clamp."""


class DataFormatError(SphanovaError, ValueError):
    """Data file violates the grouped unit-vector format."""


class MixedDimensionsError(DataFormatError):
    """Rows of a data file carry inconsistent coordinate counts."""


class TooFewGroupsError(DataFormatError):
    """Fewer than two distinct group labels in a data file."""


class NonUnitRowError(DataFormatError):
    """Row norm deviates from 1 by more than the rejection threshold."""

    def __init__(self, row: int, norm: float):
        self.row = int(row)
        self.norm = float(norm)
        super().__init__(f"row {row}: norm {norm:.6g} deviates from 1 by more than 1e-3")


class ModelSpecError(SphanovaError, ValueError):
    """Malformed angular-model specification string."""


class ConfigError(SphanovaError, ValueError):
    """Invalid experiment configuration."""


class ExperimentInvalidError(SphanovaError):
    """Too many degenerate replications; the run is not interpretable."""
