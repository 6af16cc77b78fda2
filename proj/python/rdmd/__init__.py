"""Randomized dynamic mode decomposition.

Snapshot matrices are 2-D float64 arrays with one snapshot per column.
"""

from ._rdmd import (
    DmdResult,
    RdmdError,
    add_noise,
    blocked_randomized_qb,
    decompose,
    decompose_file,
    economic_svd,
    eig,
    eigen_match_error,
    expected_error_bound,
    filter_factors,
    gaussian_test_matrix,
    pseudoinverse,
    randomized_qb,
    read_sms,
    reconstruct,
    synth_linear_dynamics,
    tikhonov_inverse,
    write_sms,
)

__all__ = [
    "DmdResult",
    "RdmdError",
    "add_noise",
    "blocked_randomized_qb",
    "decompose",
    "decompose_file",
    "economic_svd",
    "eig",
    "eigen_match_error",
    "expected_error_bound",
    "filter_factors",
    "gaussian_test_matrix",
    "pseudoinverse",
    "randomized_qb",
    "read_sms",
    "reconstruct",
    "synth_linear_dynamics",
    "tikhonov_inverse",
    "write_sms",
]
