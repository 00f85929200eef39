"""Dense row-major tensors and the zero-insertion transforms built on them."""

from __future__ import annotations

import json
import math
from typing import IO, Any, Sequence

import numpy as np

from convarith.errors import ConvArithError, ShapeMismatch

__all__ = [
    "Tensor",
    "TensorFormatError",
    "as_tensor",
    "pad",
    "crop",
    "stretch",
    "dilate_kernel",
    "subsample",
    "flatten",
    "reshape",
    "load",
    "loads",
    "dump",
    "dumps",
]


class TensorFormatError(ConvArithError, ValueError):
    """A tensor document is malformed."""


class Tensor:
    """Immutable dense array of float64 values in row-major order.

    Element ``(r, c)`` of a 2-D tensor is ``data[r * cols + c]``.
    """

    __slots__ = ("_array",)

    def __init__(self, values: Any, shape: Sequence[int] | None = None):
        array = np.array(values, dtype=np.float64, order="C")
        if shape is not None:
            shape = tuple(int(n) for n in shape)
            if array.size != math.prod(shape):
                raise ShapeMismatch(
                    f"{array.size} values cannot fill shape {shape}"
                )
            array = array.reshape(shape)
        if any(n < 1 for n in array.shape):
            raise ShapeMismatch(f"every axis needs at least one element, got {array.shape}")
        array.flags.writeable = False
        self._array = array

    @classmethod
    def zeros(cls, shape: Sequence[int]) -> Tensor:
        return cls(np.zeros(tuple(shape)))

    @classmethod
    def ones(cls, shape: Sequence[int]) -> Tensor:
        return cls(np.ones(tuple(shape)))

    @property
    def shape(self) -> tuple[int, ...]:
        return self._array.shape

    @property
    def ndim(self) -> int:
        return self._array.ndim

    @property
    def size(self) -> int:
        return self._array.size

    @property
    def data(self) -> list[float]:
        """Flat row-major list of the values."""
        return self._array.ravel().tolist()

    def numpy(self) -> np.ndarray:
        """Read-only view of the underlying array."""
        return self._array

    def __getitem__(self, index):
        out = self._array[index]
        return Tensor(out) if isinstance(out, np.ndarray) else float(out)

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self._array
        return self._array.astype(dtype)

    def __eq__(self, other):
        if not isinstance(other, Tensor):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self._array, other._array))

    __hash__ = None

    def __repr__(self):
        return f"Tensor(shape={self.shape}, data={self._array.tolist()!r})"


def as_tensor(value: Any) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


def _per_axis(t: Tensor, name: str, value, minimum: int) -> tuple[int, ...]:
    if np.ndim(value) == 0:
        values = (int(value),) * t.ndim
    else:
        values = tuple(int(v) for v in value)
        if len(values) != t.ndim:
            raise ShapeMismatch(f"{name} has {len(values)} entries for a {t.ndim}-D tensor")
    if any(v < minimum for v in values):
        raise ValueError(f"{name} entries must be >= {minimum}, got {values}")
    return values


def pad(t: Tensor, p_begin, p_end=None) -> Tensor:
    """Surround ``t`` with zeros; ``p_end`` defaults to ``p_begin``."""
    t = as_tensor(t)
    begin = _per_axis(t, "p_begin", p_begin, 0)
    end = begin if p_end is None else _per_axis(t, "p_end", p_end, 0)
    out = np.zeros(tuple(n + b + e for n, b, e in zip(t.shape, begin, end)))
    out[tuple(slice(b, b + n) for b, n in zip(begin, t.shape))] = t.numpy()
    return Tensor(out)


def crop(t: Tensor, p_begin, p_end=None) -> Tensor:
    """Remove ``p_begin``/``p_end`` elements from each end; inverse of :func:`pad`."""
    t = as_tensor(t)
    begin = _per_axis(t, "p_begin", p_begin, 0)
    end = begin if p_end is None else _per_axis(t, "p_end", p_end, 0)
    if any(b + e >= n for n, b, e in zip(t.shape, begin, end)):
        raise ShapeMismatch(f"cannot crop {begin}/{end} from shape {t.shape}")
    return Tensor(t.numpy()[tuple(slice(b, n - e) for n, b, e in zip(t.shape, begin, end))])


def _spread(t: Tensor, step: tuple[int, ...]) -> Tensor:
    out = np.zeros(tuple(n + (n - 1) * (s - 1) for n, s in zip(t.shape, step)))
    out[tuple(slice(None, None, s) for s in step)] = t.numpy()
    return Tensor(out)


def stretch(t: Tensor, s) -> Tensor:
    """Insert ``s - 1`` zeros between neighbouring elements along every axis.

    Element ``j`` of an axis lands at index ``j * s``.
    """
    t = as_tensor(t)
    return _spread(t, _per_axis(t, "s", s, 1))


def dilate_kernel(w: Tensor, d) -> Tensor:
    """Insert ``d - 1`` zeros between kernel taps, giving size ``k + (k-1)(d-1)``.

    A scalar ``d`` applies to every axis of ``w``. To dilate only the spatial
    axes of a kernel stack pass a sequence with 1 for the map axes.
    """
    w = as_tensor(w)
    return _spread(w, _per_axis(w, "d", d, 1))


def subsample(t: Tensor, s) -> Tensor:
    """Keep indices ``0, s, 2s, ...`` on every axis."""
    t = as_tensor(t)
    step = _per_axis(t, "s", s, 1)
    return Tensor(t.numpy()[tuple(slice(None, None, k) for k in step)])


def flatten(t: Tensor) -> np.ndarray:
    """Row-major linearization (left to right, top to bottom)."""
    return as_tensor(t).numpy().reshape(-1).copy()


def reshape(values, shape: Sequence[int]) -> Tensor:
    return Tensor(np.asarray(values, dtype=np.float64).reshape(-1), shape)


# -- file format -----------------------------------------------------------


def _encode_number(x: float):
    # Integer-valued entries are written as JSON integers; repr of a float is
    # already the shortest round-tripping form.
    if math.isfinite(x) and x.is_integer() and not (x == 0 and math.copysign(1, x) < 0):
        return int(x)
    if not math.isfinite(x):
        raise TensorFormatError(f"non-finite value {x} cannot be written")
    return x


def to_document(t: Tensor) -> dict:
    t = as_tensor(t)
    return {"shape": list(t.shape), "data": [_encode_number(x) for x in t.data]}


def from_document(doc: Any) -> Tensor:
    if not isinstance(doc, dict):
        raise TensorFormatError("tensor document must be an object")
    if "shape" not in doc or "data" not in doc:
        raise TensorFormatError("tensor document needs 'shape' and 'data'")
    shape, data = doc["shape"], doc["data"]
    if (
        not isinstance(shape, list)
        or not shape
        or not all(isinstance(n, int) and not isinstance(n, bool) and n >= 1 for n in shape)
    ):
        raise TensorFormatError(f"'shape' must be a non-empty list of positive integers, got {shape!r}")
    if not isinstance(data, list) or not all(
        isinstance(x, (int, float)) and not isinstance(x, bool) for x in data
    ):
        raise TensorFormatError("'data' must be a flat list of numbers")
    if len(data) != math.prod(shape):
        raise TensorFormatError(f"'data' has {len(data)} entries, shape {shape} needs {math.prod(shape)}")
    return Tensor(data, shape)


def dumps(t: Tensor) -> str:
    return json.dumps(to_document(t), separators=(", ", ": ")) + "\n"


def loads(text: str) -> Tensor:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TensorFormatError(f"not valid JSON: {exc}") from exc
    return from_document(doc)


def dump(t: Tensor, fp: IO[str]) -> None:
    fp.write(dumps(t))


def load(fp: IO[str]) -> Tensor:
    return loads(fp.read())
