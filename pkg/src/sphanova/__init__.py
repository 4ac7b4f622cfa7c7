"""Location ANOVA tests for directional data on the unit hypersphere.

Tests of equality of the location parameters of m rotationally symmetric
samples: a studentized spherical-mean test valid under the whole class and a
family of sign-and-rank tests that can be tuned to any angular density, plus
asymptotic relative efficiencies, a sampler, and a Monte Carlo harness.
"""

__version__ = "0.1.0"

from .anova import (
    GroupSummary,
    RankGroupSummary,
    TestResult,
    chi2_cdf,
    chi2_quantile,
    chi2_sf,
    pseudo_fvml_test,
    rank_test,
    reference_quadratic_form,
)
from .dataio import format_vectors_csv, parse_data, parse_rows
from .efficiency import (
    ARE_TABLE_DENSITIES,
    ARE_TABLE_SCORES,
    NoncentralityInput,
    are_homogeneous,
    are_table,
    asymptotic_power,
    noncentrality_pseudo,
    noncentrality_rank,
)
from .errors import (
    CollinearInputError,
    ConfigError,
    DataFormatError,
    DegenerateGroupError,
    DegenerateMeanError,
    ExperimentInvalidError,
    MixedDimensionsError,
    ModelSpecError,
    NegativeStatisticError,
    NonUnitRowError,
    NoSignChangeError,
    NotMonotoneError,
    NotPositiveError,
    QuadratureError,
    SphanovaError,
    TooFewGroupsError,
    ZeroCentralSequenceError,
)
from .estimators import (
    CrossInfoEstimate,
    MultiSample,
    cross_info_estimate,
    rank_central_sequence,
    ranks,
    spherical_mean,
)
from .harness import (
    CellReport,
    ExperimentConfig,
    ExperimentReport,
    TestSpec,
    null_distribution_check,
    run_experiment,
)
from .models import (
    AngularModel,
    LawConstants,
    ScoreFunction,
    TildeLaw,
    ValidationReport,
    custom_model,
    fvml,
    j_cross,
    law_constants,
    linear,
    logarithmic,
    logistic,
    make_tilde_law,
    parse_model_spec,
    score_from_model,
    validate,
)
from .quadrature import integrate
from .sampling import RngStream, sample_rotsym, sample_subsphere
from .sphere import (
    as_unit_vector,
    pseudo_inverse,
    rotation_xi,
    sign_vector,
    sign_vectors,
    tangent_project,
)

__all__ = [
    "__version__",
    # models
    "AngularModel",
    "LawConstants",
    "ScoreFunction",
    "TildeLaw",
    "ValidationReport",
    "custom_model",
    "fvml",
    "j_cross",
    "law_constants",
    "linear",
    "logarithmic",
    "logistic",
    "make_tilde_law",
    "parse_model_spec",
    "score_from_model",
    "validate",
    # sphere / quadrature
    "as_unit_vector",
    "integrate",
    "pseudo_inverse",
    "rotation_xi",
    "sign_vector",
    "sign_vectors",
    "tangent_project",
    # sampling
    "RngStream",
    "sample_rotsym",
    "sample_subsphere",
    # estimators
    "CrossInfoEstimate",
    "MultiSample",
    "cross_info_estimate",
    "rank_central_sequence",
    "ranks",
    "spherical_mean",
    # tests
    "GroupSummary",
    "RankGroupSummary",
    "TestResult",
    "chi2_cdf",
    "chi2_quantile",
    "chi2_sf",
    "pseudo_fvml_test",
    "rank_test",
    "reference_quadratic_form",
    # efficiency
    "ARE_TABLE_DENSITIES",
    "ARE_TABLE_SCORES",
    "NoncentralityInput",
    "are_homogeneous",
    "are_table",
    "asymptotic_power",
    "noncentrality_pseudo",
    "noncentrality_rank",
    # harness
    "CellReport",
    "ExperimentConfig",
    "ExperimentReport",
    "TestSpec",
    "null_distribution_check",
    "run_experiment",
    # data io
    "format_vectors_csv",
    "parse_data",
    "parse_rows",
    # errors
    "SphanovaError",
    "CollinearInputError",
    "ConfigError",
    "DataFormatError",
    "DegenerateGroupError",
    "DegenerateMeanError",
    "ExperimentInvalidError",
    "MixedDimensionsError",
    "ModelSpecError",
    "NegativeStatisticError",
    "NonUnitRowError",
    "NoSignChangeError",
    "NotMonotoneError",
    "NotPositiveError",
    "QuadratureError",
    "TooFewGroupsError",
    "ZeroCentralSequenceError",
]
