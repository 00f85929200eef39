"""Output-shape arithmetic for convolution, pooling and transposed layers.

Everything here is integer arithmetic on hyperparameters; no tensor data is
touched. Shapes are computed one axis at a time because the hyperparameters of
different axes never interact.
"""

from __future__ import annotations

import operator
from dataclasses import dataclass
from typing import Sequence

from convarith.errors import InvalidGeometry

__all__ = [
    "AxisSpec",
    "ConvSpec",
    "TransposedPlan",
    "effective_kernel_size",
    "conv_output_size",
    "pool_output_size",
    "half_padding",
    "full_padding",
    "ambiguity_class",
    "residue",
    "transposed_plan",
    "transposed_plan_from_input",
]


def _as_int(name: str, value, minimum: int) -> int:
    if isinstance(value, bool):
        raise InvalidGeometry(f"{name} must be an integer, got {value!r}")
    try:
        value = operator.index(value)
    except TypeError:
        raise InvalidGeometry(f"{name} must be an integer, got {value!r}") from None
    if value < minimum:
        raise InvalidGeometry(f"{name} must be >= {minimum}, got {value}")
    return value


def effective_kernel_size(k: int, d: int = 1) -> int:
    """Span of a kernel of size ``k`` once ``d - 1`` gaps separate its taps."""
    k = _as_int("kernel_size", k, 1)
    d = _as_int("dilation", d, 1)
    return k + (k - 1) * (d - 1)


@dataclass(frozen=True)
class AxisSpec:
    """Hyperparameters of a convolution along a single axis.

    Attributes:
        input_size: number of input elements ``i``.
        kernel_size: number of kernel taps ``k``.
        stride: distance ``s`` between consecutive kernel placements.
        padding: zeros ``p`` added at both the beginning and the end.
        dilation: tap spacing ``d``; 1 is an ordinary convolution.
    """

    input_size: int
    kernel_size: int
    stride: int = 1
    padding: int = 0
    dilation: int = 1

    def __post_init__(self):
        object.__setattr__(self, "input_size", _as_int("input_size", self.input_size, 1))
        object.__setattr__(self, "kernel_size", _as_int("kernel_size", self.kernel_size, 1))
        object.__setattr__(self, "stride", _as_int("stride", self.stride, 1))
        object.__setattr__(self, "padding", _as_int("padding", self.padding, 0))
        object.__setattr__(self, "dilation", _as_int("dilation", self.dilation, 1))

    @property
    def effective_kernel_size(self) -> int:
        return effective_kernel_size(self.kernel_size, self.dilation)

    @property
    def padded_size(self) -> int:
        return self.input_size + 2 * self.padding


@dataclass(frozen=True)
class ConvSpec:
    """An N-axis convolution together with its feature-map counts."""

    axes: tuple[AxisSpec, ...]
    in_maps: int = 1
    out_maps: int = 1

    def __post_init__(self):
        axes = tuple(self.axes)
        if not axes:
            raise InvalidGeometry("a convolution needs at least one axis")
        if not all(isinstance(a, AxisSpec) for a in axes):
            raise InvalidGeometry("axes must be AxisSpec instances")
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "in_maps", _as_int("in_maps", self.in_maps, 1))
        object.__setattr__(self, "out_maps", _as_int("out_maps", self.out_maps, 1))

    @property
    def ndim(self) -> int:
        return len(self.axes)

    @property
    def kernel_shape(self) -> tuple[int, ...]:
        """Shape ``(n, m, k_1, ..., k_N)`` of the kernel collection."""
        return (self.out_maps, self.in_maps) + tuple(a.kernel_size for a in self.axes)

    def output_shape(self) -> tuple[int, ...]:
        """Spatial output shape, one :func:`conv_output_size` per axis."""
        return tuple(conv_output_size(a) for a in self.axes)


def conv_output_size(axis: AxisSpec) -> int:
    """Number of kernel placements along one axis.

    Covers zero padding, strides and dilation at once::

        o = floor((i + 2p - k - (k - 1)(d - 1)) / s) + 1

    Raises:
        InvalidGeometry: if the (effective) kernel does not fit inside the
            padded input.
    """
    span = axis.padded_size - axis.effective_kernel_size
    if span < 0:
        raise InvalidGeometry(
            f"effective kernel of size {axis.effective_kernel_size} does not fit "
            f"in padded input of size {axis.padded_size}"
        )
    return span // axis.stride + 1


def pool_output_size(i: int, k: int, s: int = 1) -> int:
    """Number of pooling windows along one axis; pooling never pads."""
    i = _as_int("input_size", i, 1)
    k = _as_int("kernel_size", k, 1)
    s = _as_int("stride", s, 1)
    if i < k:
        raise InvalidGeometry(f"pooling window {k} larger than input {i}")
    return (i - k) // s + 1


def half_padding(k: int) -> int:
    """Padding that keeps the output size equal to the input size (unit stride).

    Only defined for odd ``k``.
    """
    k = _as_int("kernel_size", k, 1)
    if k % 2 == 0:
        raise InvalidGeometry(f"half padding needs an odd kernel size, got {k}")
    return k // 2


def full_padding(k: int) -> int:
    """Padding under which every partial kernel/input overlap is an output."""
    return _as_int("kernel_size", k, 1) - 1


def ambiguity_class(axis: AxisSpec) -> list[int]:
    """All input sizes that yield the same output size as ``axis``.

    Requires ``i + 2p - k_eff`` to be a multiple of the stride, so that
    ``axis.input_size`` is the smallest member of its class.
    """
    span = axis.padded_size - axis.effective_kernel_size
    if span < 0:
        raise InvalidGeometry("kernel does not fit in padded input")
    if span % axis.stride:
        raise InvalidGeometry(
            f"i + 2p - k = {span} is not a multiple of the stride {axis.stride}"
        )
    return [axis.input_size + a for a in range(axis.stride)]


def residue(axis: AxisSpec) -> int:
    """Zeros a transposed convolution appends at the end of the axis.

    It is the part of the padded input never reached by the last placement,
    ``(i + 2p - k) mod s``.
    """
    span = axis.padded_size - axis.effective_kernel_size
    if span < 0:
        raise InvalidGeometry("kernel does not fit in padded input")
    return span % axis.stride


@dataclass(frozen=True)
class TransposedPlan:
    """Direct convolution that computes a transposed convolution along one axis.

    The transposed input of size ``input_size`` (``i'``) is stretched by
    inserting ``stride - 1`` zeros between elements, padded with
    ``padding`` zeros on both sides plus ``residue`` extra zeros at the end,
    then convolved with unit stride.
    """

    input_size: int
    stretched_input: int
    kernel: int
    padding: int
    residue: int
    output_size: int
    forward_stride: int
    stride: int = 1

    @property
    def padded_input(self) -> int:
        return self.stretched_input + 2 * self.padding + self.residue

    def forward_axis(self, forward_padding: int) -> AxisSpec:
        """The direct convolution whose transpose this plan computes."""
        return AxisSpec(self.output_size, self.kernel, self.forward_stride, forward_padding)


def transposed_plan_from_input(
    i_prime: int, k: int, s: int = 1, p: int = 0, a: int = 0
) -> TransposedPlan:
    """Plan for a transposed convolution given its own input size ``i'``.

    ``a`` cannot be inferred from ``i'`` alone; it selects which of the ``s``
    forward input sizes sharing the output size ``i'`` is reconstructed.
    """
    i_prime = _as_int("i_prime", i_prime, 1)
    k = _as_int("kernel_size", k, 1)
    s = _as_int("stride", s, 1)
    p = _as_int("padding", p, 0)
    a = _as_int("a", a, 0)
    if a >= s:
        raise InvalidGeometry(f"residue a must lie in 0..{s - 1}, got {a}")
    if p > k - 1:
        raise InvalidGeometry(f"padding {p} exceeds k - 1 = {k - 1}; no transposed equivalent")
    out = s * (i_prime - 1) + a + k - 2 * p
    if out <= 0:
        raise InvalidGeometry(f"transposed output size would be {out}")
    return TransposedPlan(
        input_size=i_prime,
        stretched_input=i_prime + (i_prime - 1) * (s - 1),
        kernel=k,
        padding=k - p - 1,
        residue=a,
        output_size=out,
        forward_stride=s,
    )


def transposed_plan(
    axis: AxisSpec, i_prime: int | None = None, a: int | None = None
) -> TransposedPlan:
    """Plan for the transpose of the forward convolution ``axis``.

    ``i_prime`` defaults to the forward output size and must agree with it
    when given. ``a`` is derived from the forward input size unless passed
    explicitly, in which case ``axis.input_size`` is ignored.
    """
    if axis.dilation != 1:
        raise InvalidGeometry("transposed convolution of a dilated kernel is not supported")
    if a is None:
        forward_out = conv_output_size(axis)
        if i_prime is None:
            i_prime = forward_out
        elif i_prime != forward_out:
            raise InvalidGeometry(
                f"i' = {i_prime} is not the output size {forward_out} of the forward convolution"
            )
        a = residue(axis)
    elif i_prime is None:
        i_prime = conv_output_size(axis)
    return transposed_plan_from_input(i_prime, axis.kernel_size, axis.stride, axis.padding, a)


def broadcast_axes(n: int, name: str, value: int | Sequence[int]) -> tuple[int, ...]:
    """Expand a scalar hyperparameter to ``n`` axes, or check a sequence's length."""
    if isinstance(value, str):
        raise InvalidGeometry(f"{name} must be integers, got {value!r}")
    try:
        values = tuple(value)
    except TypeError:
        values = (value,) * n
    if len(values) == 1:
        values = values * n
    if len(values) != n:
        raise InvalidGeometry(f"{name} has {len(values)} entries for {n} axes")
    return values
