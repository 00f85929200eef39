"""Convolution arithmetic: output shapes, reference convolutions, and their
matrix form, for direct, strided, padded, dilated, pooled and transposed
layers."""

from convarith.engine import PoolKind, conv, conv_transposed, conv_unit_stride_then_subsample, pool
from convarith.errors import ConvArithError, InvalidGeometry, ShapeMismatch
from convarith.geometry import (
    AxisSpec,
    ConvSpec,
    TransposedPlan,
    ambiguity_class,
    conv_output_size,
    effective_kernel_size,
    full_padding,
    half_padding,
    pool_output_size,
    transposed_plan,
    transposed_plan_from_input,
)
from convarith.lowering import ConvMatrix, apply, apply_transpose, build_matrix
from convarith.tensor import Tensor, dilate_kernel, flatten, pad, reshape, stretch, subsample

__version__ = "0.1.0"

__all__ = [
    "AxisSpec",
    "ConvArithError",
    "ConvMatrix",
    "ConvSpec",
    "InvalidGeometry",
    "PoolKind",
    "ShapeMismatch",
    "Tensor",
    "TransposedPlan",
    "ambiguity_class",
    "apply",
    "apply_transpose",
    "build_matrix",
    "conv",
    "conv_output_size",
    "conv_transposed",
    "conv_unit_stride_then_subsample",
    "dilate_kernel",
    "effective_kernel_size",
    "flatten",
    "full_padding",
    "half_padding",
    "pad",
    "pool",
    "pool_output_size",
    "reshape",
    "stretch",
    "subsample",
    "transposed_plan",
    "transposed_plan_from_input",
]
