"""Reference convolution, pooling and transposed convolution.

Convolution here is cross-correlation: the kernel is never flipped. Kernels
come in two forms. A kernel with as many axes as the input is a single map
convolved with a single map. Otherwise the kernel is a stack of shape
``(n, m, k_1, ..., k_N)`` applied to an input of shape ``(m, i_1, ..., i_N)``
and producing ``(n, o_1, ..., o_N)``; output map ``j`` is the elementwise sum
over input maps ``c`` of input ``c`` convolved with ``w[j, c]``.

Each output element is accumulated in a fixed order (input maps outer, kernel
taps row-major inner), so integer-valued inputs give bit-identical results on
every run.
"""

from __future__ import annotations

import enum
import math
from typing import Sequence

import numpy as np

from convarith.errors import InvalidGeometry, ShapeMismatch
from convarith.geometry import (
    AxisSpec,
    broadcast_axes,
    conv_output_size,
    pool_output_size,
    transposed_plan_from_input,
)
from convarith.tensor import Tensor, as_tensor, pad, stretch, subsample

__all__ = [
    "PoolKind",
    "conv",
    "pool",
    "conv_transposed",
    "conv_unit_stride_then_subsample",
]

IntOrSeq = int | Sequence[int]


class PoolKind(enum.Enum):
    MAX = "max"
    AVERAGE = "average"


def _lift(x: Tensor, w: Tensor) -> tuple[np.ndarray, np.ndarray, bool]:
    """Return ``(x, w)`` in stacked form and whether the inputs were single-map."""
    if w.ndim == x.ndim:
        return x.numpy()[None], w.numpy()[None, None], True
    if w.ndim == x.ndim + 1:
        if x.ndim < 2:
            raise ShapeMismatch("a stacked input needs a map axis and at least one spatial axis")
        if x.shape[0] != w.shape[1]:
            raise ShapeMismatch(
                f"input has {x.shape[0]} maps but the kernel expects {w.shape[1]}"
            )
        return x.numpy(), w.numpy(), False
    raise ShapeMismatch(
        f"kernel of rank {w.ndim} does not match input of rank {x.ndim}"
    )


def _correlate(xp: np.ndarray, w: np.ndarray, out_shape, s, d) -> np.ndarray:
    # xp: (m, padded...), w: (n, m, k...)
    n, m = w.shape[:2]
    out = np.zeros((n,) + tuple(out_shape))
    for j in range(n):
        acc = out[j]
        for c in range(m):
            for tap in np.ndindex(*w.shape[2:]):
                window = tuple(
                    slice(t * dd, t * dd + (o - 1) * ss + 1, ss)
                    for t, dd, o, ss in zip(tap, d, out_shape, s)
                )
                acc += w[(j, c) + tap] * xp[(c,) + window]
    return out


def conv(
    x: Tensor, w: Tensor, s: IntOrSeq = 1, p: IntOrSeq = 0, d: IntOrSeq = 1
) -> Tensor:
    """Discrete convolution (cross-correlation) with zero padding.

    Args:
        x: input, ``(i_1, ..., i_N)`` or ``(m, i_1, ..., i_N)``.
        w: kernel, ``(k_1, ..., k_N)`` or ``(n, m, k_1, ..., k_N)``.
        s: stride per spatial axis.
        p: symmetric zero padding per spatial axis.
        d: dilation per spatial axis.

    Returns:
        Tensor of shape ``(o_1, ..., o_N)`` or ``(n, o_1, ..., o_N)``.
    """
    x, w = as_tensor(x), as_tensor(w)
    xs, ws, single = _lift(x, w)
    nd = ws.ndim - 2
    s = broadcast_axes(nd, "stride", s)
    p = broadcast_axes(nd, "padding", p)
    d = broadcast_axes(nd, "dilation", d)
    axes = [AxisSpec(i, k, ss, pp, dd) for i, k, ss, pp, dd in zip(xs.shape[1:], ws.shape[2:], s, p, d)]
    out_shape = [conv_output_size(a) for a in axes]
    xp = np.pad(xs, [(0, 0)] + [(pp, pp) for pp in p])
    out = _correlate(xp, ws, out_shape, s, d)
    return Tensor(out[0] if single else out)


def conv_unit_stride_then_subsample(
    x: Tensor, w: Tensor, p: IntOrSeq = 0, s: IntOrSeq = 1, d: IntOrSeq = 1
) -> Tensor:
    """Strided convolution computed as a unit-stride one keeping every ``s``-th output."""
    x, w = as_tensor(x), as_tensor(w)
    dense = conv(x, w, 1, p, d)
    nd = w.ndim if w.ndim == x.ndim else w.ndim - 2
    step = broadcast_axes(nd, "stride", s)
    if dense.ndim > nd:
        step = (1,) + step
    return subsample(dense, step)


def pool(x: Tensor, kind: PoolKind | str, k: IntOrSeq, s: IntOrSeq = 1) -> Tensor:
    """Max or average pooling without padding.

    A scalar ``k`` pools over every axis of ``x``. A sequence of length ``L``
    pools over the last ``L`` axes and leaves leading axes (e.g. maps) alone.
    """
    x = as_tensor(x)
    kind = PoolKind(kind)
    if isinstance(k, Sequence):
        window = tuple(k)
        if not 1 <= len(window) <= x.ndim:
            raise ShapeMismatch(f"window of rank {len(window)} for a {x.ndim}-D input")
    else:
        window = (k,) * x.ndim
    nd = len(window)
    stride = broadcast_axes(nd, "stride", s)
    lead = x.ndim - nd
    spatial = x.shape[lead:]
    out_shape = tuple(pool_output_size(i, kk, ss) for i, kk, ss in zip(spatial, window, stride))

    a = x.numpy()
    out = None
    for tap in np.ndindex(*window):
        view = a[(slice(None),) * lead + tuple(
            slice(t, t + (o - 1) * ss + 1, ss) for t, o, ss in zip(tap, out_shape, stride)
        )]
        if out is None:
            out = view.copy()
        elif kind is PoolKind.MAX:
            np.maximum(out, view, out=out)
        else:
            out += view
    if kind is PoolKind.AVERAGE:
        out /= math.prod(window)
    return Tensor(out)


def conv_transposed(
    g: Tensor, w: Tensor, s: IntOrSeq = 1, p: IntOrSeq = 0, a: IntOrSeq = 0
) -> Tensor:
    """Transposed convolution through its equivalent direct convolution.

    ``w`` is the kernel of the forward convolution (same conventions as
    :func:`conv`); ``s``, ``p`` are its stride and padding and ``a`` picks
    which forward input size is reconstructed. The input is stretched with
    ``s - 1`` zeros between units, padded with ``k - p - 1`` zeros per side
    plus ``a`` at the end, and convolved at unit stride with the kernel whose
    map axes are swapped and spatial axes reversed.

    The result is the product of the forward convolution's matrix transpose
    with ``g``.
    """
    g, w = as_tensor(g), as_tensor(w)
    single = w.ndim == g.ndim
    if single:
        ws = w.numpy()[None, None]
    elif w.ndim == g.ndim + 1:
        if g.shape[0] != w.shape[0]:
            raise ShapeMismatch(
                f"input has {g.shape[0]} maps but the kernel produces {w.shape[0]}"
            )
        ws = w.numpy()
    else:
        raise ShapeMismatch(f"kernel of rank {w.ndim} does not match input of rank {g.ndim}")

    nd = ws.ndim - 2
    s = broadcast_axes(nd, "stride", s)
    p = broadcast_axes(nd, "padding", p)
    a = broadcast_axes(nd, "a", a)
    spatial_in = g.shape if single else g.shape[1:]
    plans = [
        transposed_plan_from_input(i, k, ss, pp, aa)
        for i, k, ss, pp, aa in zip(spatial_in, ws.shape[2:], s, p, a)
    ]

    # the map axis, when present, is neither stretched nor padded
    unit, zero = ((), ()) if single else ((1,), (0,))
    stretched = stretch(g, unit + s)
    begin = zero + tuple(pl.padding for pl in plans)
    end = zero + tuple(pl.padding + pl.residue for pl in plans)
    padded = pad(stretched, begin, end)

    flipped = ws.swapaxes(0, 1)[(slice(None), slice(None)) + (slice(None, None, -1),) * nd]
    kernel = Tensor(flipped[0, 0] if single else flipped)
    out = conv(padded, kernel, 1, 0, 1)

    spatial_out = out.shape if single else out.shape[1:]
    expected = tuple(pl.output_size for pl in plans)
    if spatial_out != expected:
        raise InvalidGeometry(f"transposed output {spatial_out} disagrees with plan {expected}")
    return out
