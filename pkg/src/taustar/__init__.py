"""Sign covariance tau* and its sample statistic t*, with permutation tests
of independence and exact population functionals."""

from .data import ContingencyTable, PairedSample
from .dataio import load_fixture, parse_pairs, parse_table, tabulate_sample
from .errors import (
    DegenerateInputError,
    InvalidArgumentError,
    ParseError,
    ResourceError,
    TauStarError,
    UnsupportedError,
)
from .estimators import (
    EstimatorConfig,
    Method,
    Normalization,
    dewet_d,
    hoeffding_h,
    kendall_t,
    pearson_chi_square,
    t_star,
    t_star_from_table,
)
from .permutation import Sidedness, TestResult, exact_permutation_test, permutation_test
from .population import JointDistribution, pop_quadruple_probs, pop_tau_star

__version__ = "0.1.0"

__all__ = [
    "ContingencyTable",
    "PairedSample",
    "load_fixture",
    "parse_pairs",
    "parse_table",
    "tabulate_sample",
    "TauStarError",
    "InvalidArgumentError",
    "DegenerateInputError",
    "ResourceError",
    "UnsupportedError",
    "ParseError",
    "EstimatorConfig",
    "Method",
    "Normalization",
    "t_star",
    "t_star_from_table",
    "kendall_t",
    "pearson_chi_square",
    "hoeffding_h",
    "dewet_d",
    "Sidedness",
    "TestResult",
    "permutation_test",
    "exact_permutation_test",
    "JointDistribution",
    "pop_tau_star",
    "pop_quadruple_probs",
]
