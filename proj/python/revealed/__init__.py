"""Forecast aggregation through revealed information structures.

The panel of forecasts is treated as noisy evidence about how much each
forecaster knows and how much of that knowledge is shared.  ``prepare``
turns a panel into an unconstrained covariance estimate on the information
scale, ``project`` (or ``select_kappa``) makes it a realizable structure
with a bounded condition number, and ``aggregate`` conditions on the whole
panel to produce the revealed aggregate next to the usual baselines.
"""

from ._revealed import (
    ContractError,
    DataError,
    Error,
    NumericalError,
    UsageError,
    aggregate,
    block_sigma,
    condition_number_h,
    conditional_z0,
    min_eigenvalue_h,
    nested_sigma,
    norm_cdf,
    norm_ppf,
    pairwise_covariance,
    prepare,
    probit_sigma,
    project,
    select_kappa,
    simulate,
)

__all__ = [
    "ContractError",
    "DataError",
    "Error",
    "NumericalError",
    "UsageError",
    "aggregate",
    "block_sigma",
    "condition_number_h",
    "conditional_z0",
    "min_eigenvalue_h",
    "nested_sigma",
    "norm_cdf",
    "norm_ppf",
    "pairwise_covariance",
    "prepare",
    "probit_sigma",
    "project",
    "select_kappa",
    "simulate",
]
