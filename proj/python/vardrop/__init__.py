"""Python bindings for the vardrop C++ core."""

from ._core import (
    ModelParams,
    VarDropError,
    adjusted_rand_index,
    amplitude_spectrum,
    count_flops,
    group_by_hash,
    kdfh,
    low_pass,
    pearson_matrix,
    predict_full,
    reconstruction_error,
    reduction_ratio,
    stratified_sample,
    synth_redundant,
)

__all__ = [
    "ModelParams",
    "VarDropError",
    "adjusted_rand_index",
    "amplitude_spectrum",
    "count_flops",
    "group_by_hash",
    "kdfh",
    "low_pass",
    "pearson_matrix",
    "predict_full",
    "reconstruction_error",
    "reduction_ratio",
    "stratified_sample",
    "synth_redundant",
]
