"""Convolution as an explicit sparse matrix.

With input and output unrolled row-major, a single-map convolution is the
product ``y = C x`` where every nonzero of ``C`` is one kernel tap. The
transposed convolution is ``C^T g``. Both products are written out entry by
entry so that they share no code with :mod:`convarith.engine` and can serve as
an independent check on it.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from convarith.errors import ShapeMismatch
from convarith.geometry import AxisSpec, conv_output_size
from convarith.tensor import Tensor, as_tensor

__all__ = ["ConvMatrix", "build_matrix", "apply", "apply_transpose"]


@dataclass(frozen=True)
class ConvMatrix:
    """Coordinate-format matrix of a single-map convolution.

    ``entries`` holds ``(row, col, value)`` triples sorted by ``(row, col)``
    with no duplicates. Rows index the flattened output, columns the flattened
    (unpadded) input.
    """

    rows: int
    cols: int
    entries: tuple[tuple[int, int, float], ...]
    input_shape: tuple[int, ...]
    output_shape: tuple[int, ...]

    @property
    def nnz(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[tuple[int, int, float]]:
        return iter(self.entries)

    def to_dense(self) -> np.ndarray:
        dense = np.zeros((self.rows, self.cols))
        for r, c, v in self.entries:
            dense[r, c] = v
        return dense

    def pattern(self) -> set[tuple[int, int]]:
        return {(r, c) for r, c, _ in self.entries}


def _ravel(index: Sequence[int], shape: Sequence[int]) -> int:
    flat = 0
    for i, n in zip(index, shape):
        flat = flat * n + i
    return flat


def build_matrix(w: Tensor, spec: Sequence[AxisSpec]) -> ConvMatrix:
    """Materialize ``C`` for kernel ``w`` and one :class:`AxisSpec` per axis of ``w``.

    Each output position and kernel tap addresses one cell of the padded
    input; taps landing on padding are dropped since they only ever multiply
    zeros, so ``cols`` is the unpadded input size.
    """
    w = as_tensor(w)
    spec = tuple(spec)
    if len(spec) != w.ndim:
        raise ShapeMismatch(f"{len(spec)} axis specs for a {w.ndim}-D kernel")
    for axis, k in zip(spec, w.shape):
        if axis.kernel_size != k:
            raise ShapeMismatch(f"kernel has size {k} where the spec says {axis.kernel_size}")

    in_shape = tuple(a.input_size for a in spec)
    out_shape = tuple(conv_output_size(a) for a in spec)
    weights = w.numpy()

    entries = []
    for row, pos in enumerate(itertools.product(*(range(o) for o in out_shape))):
        for tap in itertools.product(*(range(k) for k in w.shape)):
            cell = []
            for o, t, a in zip(pos, tap, spec):
                j = o * a.stride + t * a.dilation - a.padding
                if not 0 <= j < a.input_size:
                    break
                cell.append(j)
            else:
                entries.append((row, _ravel(cell, in_shape), float(weights[tap])))
    entries.sort(key=lambda e: (e[0], e[1]))
    return ConvMatrix(
        rows=math.prod(out_shape),
        cols=math.prod(in_shape),
        entries=tuple(entries),
        input_shape=in_shape,
        output_shape=out_shape,
    )


def _vector(values, length: int, what: str) -> list[float]:
    if isinstance(values, Tensor):
        values = values.data
    flat = np.asarray(values, dtype=np.float64).reshape(-1).tolist()
    if len(flat) != length:
        raise ShapeMismatch(f"{what} has length {len(flat)}, expected {length}")
    return flat


def apply(C: ConvMatrix, x_flat) -> np.ndarray:
    """``C @ x`` for a flattened input of length ``C.cols``."""
    x = _vector(x_flat, C.cols, "input")
    y = [0.0] * C.rows
    for r, c, v in C.entries:
        y[r] += v * x[c]
    return np.array(y)


def apply_transpose(C: ConvMatrix, g_flat) -> np.ndarray:
    """``C^T @ g`` for a flattened vector of length ``C.rows``."""
    g = _vector(g_flat, C.rows, "input")
    y = [0.0] * C.cols
    for r, c, v in C.entries:
        y[c] += v * g[r]
    return np.array(y)
