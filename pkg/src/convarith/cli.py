"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 invalid geometry or shapes,
3 unreadable or malformed files.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from convarith import diagram, engine, lowering
from convarith import tensor as tensor_io
from convarith.errors import InvalidGeometry, ShapeMismatch
from convarith.geometry import (
    AxisSpec,
    TransposedPlan,
    conv_output_size,
    pool_output_size,
    transposed_plan,
    transposed_plan_from_input,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_GEOMETRY = 2
EXIT_IO = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# -- relationship labels ---------------------------------------------------


def conv_relationship(axis: AxisSpec) -> str:
    k, s, p, d = axis.kernel_size, axis.stride, axis.padding, axis.dilation
    if d > 1:
        return "dilated: o = floor((i + 2p - k - (k - 1)(d - 1)) / s) + 1"
    if s == 1:
        if p == 0:
            return "no zero padding, unit strides: o = (i - k) + 1"
        if k % 2 == 1 and p == k // 2:
            return "half padding, unit strides: o = i"
        if p == k - 1:
            return "full padding, unit strides: o = i + (k - 1)"
        return "zero padding, unit strides: o = (i - k) + 2p + 1"
    if p == 0:
        return "no zero padding, non-unit strides: o = floor((i - k) / s) + 1"
    return "zero padding, non-unit strides: o = floor((i + 2p - k) / s) + 1"


def transposed_relationship(plan: TransposedPlan, p: int) -> str:
    k, s, a = plan.kernel, plan.forward_stride, plan.residue
    if s == 1:
        if p == 0:
            return "no zero padding, unit strides, transposed: o' = i' + (k - 1)"
        if k % 2 == 1 and p == k // 2:
            return "half padding, transposed: o' = i'"
        if p == k - 1:
            return "full padding, transposed: o' = i' - (k - 1)"
        return "zero padding, unit strides, transposed: o' = i' + (k - 1) - 2p"
    if a:
        return "zero padding, non-unit strides, transposed: o' = s(i' - 1) + a + k - 2p"
    if p == 0:
        return "no zero padding, non-unit strides, transposed: o' = s(i' - 1) + k"
    return "zero padding, non-unit strides, transposed: o' = s(i' - 1) + k - 2p"


# -- flag handling ---------------------------------------------------------


def _per_axis(name: str, values: list[int] | None, n: int, default: int | None) -> list[int]:
    if not values:
        if default is None:
            raise UsageError(f"{name} is required")
        return [default] * n
    if len(values) == 1:
        return values * n
    if len(values) != n:
        raise UsageError(f"{name} given {len(values)} times for {n} axes")
    return values


def _axes_from_flags(args, n: int | None = None) -> list[AxisSpec]:
    if not args.input_size:
        raise UsageError("-i/--input-size is required")
    n = n or len(args.input_size)
    sizes = _per_axis("-i/--input-size", args.input_size, n, None)
    ks = _per_axis("-k/--kernel-size", args.kernel_size, n, None)
    ss = _per_axis("-s/--stride", args.stride, n, 1)
    ps = _per_axis("-p/--padding", args.padding, n, 0)
    ds = _per_axis("-d/--dilation", getattr(args, "dilation", None), n, 1)
    return [AxisSpec(*v) for v in zip(sizes, ks, ss, ps, ds)]


def _read_tensor(path: str) -> tensor_io.Tensor:
    try:
        if path == "-":
            return tensor_io.load(sys.stdin)
        with open(path) as fp:
            return tensor_io.load(fp)
    except OSError as exc:
        raise tensor_io.TensorFormatError(f"cannot read {path}: {exc.strerror}") from exc


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


# -- subcommands -----------------------------------------------------------


def run_shape(args) -> str:
    lines = [f"mode: {args.mode}"]
    if args.mode == "conv":
        axes = _axes_from_flags(args)
        outs = [conv_output_size(a) for a in axes]
        for n, (a, o) in enumerate(zip(axes, outs)):
            lines.append(
                f"axis {n}: i={a.input_size} k={a.kernel_size} s={a.stride} p={a.padding} "
                f"d={a.dilation} -> o = {o}  [{conv_relationship(a)}]"
            )
    elif args.mode == "pool":
        if args.padding and any(args.padding):
            raise UsageError("pooling takes no padding")
        n = len(args.input_size or [])
        sizes = _per_axis("-i/--input-size", args.input_size, n, None)
        ks = _per_axis("-k/--kernel-size", args.kernel_size, n, None)
        ss = _per_axis("-s/--stride", args.stride, n, 1)
        outs = []
        for n, (i, k, s) in enumerate(zip(sizes, ks, ss)):
            o = pool_output_size(i, k, s)
            outs.append(o)
            lines.append(
                f"axis {n}: i={i} k={k} s={s} -> o = {o}  [pooling: o = floor((i - k) / s) + 1]"
            )
        if not outs:
            raise UsageError("-i/--input-size is required")
    else:
        outs = []
        for n, plan in enumerate(_plans_from_flags(args)):
            p = plan.kernel - 1 - plan.padding
            outs.append(plan.output_size)
            lines.append(
                f"axis {n}: i' = {plan.input_size}, stretched i' = {plan.stretched_input}, "
                f"k' = {plan.kernel}, s' = {plan.stride}, p' = {plan.padding}, "
                f"a = {plan.residue} -> o' = {plan.output_size}  "
                f"[{transposed_relationship(plan, p)}]"
            )
    lines.append("output shape: " + " x ".join(str(o) for o in outs))
    return "\n".join(lines) + "\n"


def _plans_from_flags(args) -> list[TransposedPlan]:
    if args.dilation and any(d != 1 for d in args.dilation):
        raise InvalidGeometry("transposed convolution of a dilated kernel is not supported")
    n = max(len(args.input_size or []), len(args.i_prime or []))
    if n == 0:
        raise UsageError("transposed mode needs -i/--input-size or --i-prime")
    ks = _per_axis("-k/--kernel-size", args.kernel_size, n, None)
    ss = _per_axis("-s/--stride", args.stride, n, 1)
    ps = _per_axis("-p/--padding", args.padding, n, 0)
    i_primes = _per_axis("--i-prime", args.i_prime, n, None) if args.i_prime else [None] * n
    a_vals = _per_axis("--a", args.a, n, None) if args.a else [None] * n
    plans = []
    if args.input_size:
        sizes = _per_axis("-i/--input-size", args.input_size, n, None)
        for i, k, s, p, ip, a in zip(sizes, ks, ss, ps, i_primes, a_vals):
            plans.append(transposed_plan(AxisSpec(i, k, s, p), ip, a))
    else:
        for k, s, p, ip, a in zip(ks, ss, ps, i_primes, a_vals):
            plans.append(transposed_plan_from_input(ip, k, s, p, a or 0))
    return plans


def run_conv(args) -> str:
    x, w = _read_tensor(args.input), _read_tensor(args.kernel)
    return tensor_io.dumps(engine.conv(x, w, args.stride or 1, args.padding or 0, args.dilation or 1))


def run_pool(args) -> str:
    x = _read_tensor(args.input)
    if not args.kernel_size:
        raise UsageError("-k/--kernel-size is required")
    k = args.kernel_size[0] if len(args.kernel_size) == 1 else args.kernel_size
    return tensor_io.dumps(engine.pool(x, args.kind, k, args.stride or 1))


def run_transpose(args) -> str:
    g, w = _read_tensor(args.input), _read_tensor(args.kernel)
    return tensor_io.dumps(
        engine.conv_transposed(g, w, args.stride or 1, args.padding or 0, args.a or 0)
    )


def _format_value(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def run_matrix(args) -> str:
    if args.kernel is not None:
        w = _read_tensor(args.kernel)
        if args.kernel_size:
            raise UsageError("give either a kernel file or -k, not both")
        args.kernel_size = list(w.shape)
        labels = None
    else:
        if not args.kernel_size:
            raise UsageError("a kernel file or -k/--kernel-size is required")
        n = max(len(args.input_size or []), len(args.kernel_size), 2)
        shape = _per_axis("-k/--kernel-size", args.kernel_size, n, None)
        # symbolic matrix: entries are kernel tap labels
        w = tensor_io.Tensor(np.arange(int(np.prod(shape))), shape)
        labels = ["w" + ",".join(map(str, t)) for t in np.ndindex(*shape)]
    axes = _axes_from_flags(args, w.ndim)
    C = lowering.build_matrix(w, axes)

    def show(v: float) -> str:
        return labels[int(v)] if labels is not None else _format_value(v)

    if args.format == "dense":
        grid = [["0"] * C.cols for _ in range(C.rows)]
        for r, c, v in C.entries:
            grid[r][c] = show(v)
        width = max(len(cell) for row in grid for cell in row)
        return "".join(" ".join(cell.rjust(width) for cell in row) + "\n" for row in grid)
    lines = [f"{C.rows} {C.cols} {C.nnz}"]
    lines += [f"{r} {c} {show(v)}" for r, c, v in C.entries]
    return "\n".join(lines) + "\n"


def run_diagram(args) -> str:
    n = max(len(args.input_size or []), len(args.kernel_size or []), args.ndim)
    axes = _axes_from_flags(args, n)
    frames = diagram.frames(axes)
    if args.step is not None:
        if not 0 <= args.step < len(frames):
            raise InvalidGeometry(f"step {args.step} out of range 0..{len(frames) - 1}")
        selected = [frames[args.step]]
    else:
        selected = frames

    if args.out_dir:
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        for f in selected:
            ext = "svg" if args.format == "svg" else "txt"
            body = (
                diagram.render_svg(axes, [f])
                if args.format == "svg"
                else diagram.render_ascii(axes, f)
            )
            (out_dir / f"frame_{f.index:03d}.{ext}").write_text(body)
        return f"wrote {len(selected)} frames to {out_dir}\n"

    if args.format == "svg":
        return diagram.render_svg(axes, selected)
    return "".join(
        f"frame {f.index + 1}/{len(frames)}\n" + diagram.render_ascii(axes, f) + "\n"
        for f in selected
    )


# -- parser ----------------------------------------------------------------


def _geometry_flags(p: argparse.ArgumentParser, sizes: bool = True, dilation: bool = True):
    if sizes:
        p.add_argument("-i", "--input-size", type=int, action="append",
                       help="input size; repeat once per axis")
    p.add_argument("-k", "--kernel-size", type=int, action="append")
    p.add_argument("-s", "--stride", type=int, action="append")
    p.add_argument("-p", "--padding", type=int, action="append")
    if dilation:
        p.add_argument("-d", "--dilation", type=int, action="append")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="convarith", description="Convolution arithmetic toolkit.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("shape", help="output sizes for conv, pool or transposed layers")
    _geometry_flags(p)
    p.add_argument("--mode", choices=["conv", "pool", "transposed"], default="conv")
    p.add_argument("--i-prime", type=int, action="append", help="transposed input size")
    p.add_argument("--a", type=int, action="append", help="transposed residue")
    p.set_defaults(func=run_shape)

    p = sub.add_parser("conv", help="convolve a tensor file with a kernel file")
    p.add_argument("input")
    p.add_argument("kernel")
    _geometry_flags(p, sizes=False)
    p.add_argument("--out")
    p.set_defaults(func=run_conv)

    p = sub.add_parser("pool", help="pool a tensor file")
    p.add_argument("input")
    p.add_argument("--kind", choices=[k.value for k in engine.PoolKind], default="max")
    p.add_argument("-k", "--kernel-size", type=int, action="append")
    p.add_argument("-s", "--stride", type=int, action="append")
    p.add_argument("--out")
    p.set_defaults(func=run_pool)

    p = sub.add_parser("transpose", help="transposed convolution of a tensor file")
    p.add_argument("input")
    p.add_argument("kernel")
    _geometry_flags(p, sizes=False, dilation=False)
    p.add_argument("--a", type=int, action="append")
    p.add_argument("--out")
    p.set_defaults(func=run_transpose)

    p = sub.add_parser("matrix", help="print the sparse matrix of a convolution")
    p.add_argument("kernel", nargs="?", help="kernel tensor file; omit for symbolic taps")
    _geometry_flags(p)
    p.add_argument("--format", choices=["coo", "dense"], default="coo")
    p.add_argument("--out")
    p.set_defaults(func=run_matrix)

    p = sub.add_parser("diagram", help="draw kernel placements")
    _geometry_flags(p)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--step", type=int)
    group.add_argument("--all", action="store_true")
    p.add_argument("--ndim", type=int, choices=[1, 2], default=2,
                   help="axes to draw when every flag is given once")
    p.add_argument("--format", choices=["ascii", "svg"], default="ascii")
    p.add_argument("--out")
    p.add_argument("--out-dir", help="write one file per frame")
    p.set_defaults(func=run_diagram)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        text = args.func(args)
        _emit(text, getattr(args, "out", None))
    except UsageError as exc:
        print(f"convarith: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InvalidGeometry, ShapeMismatch) as exc:
        print(f"convarith: invalid geometry: {exc}", file=sys.stderr)
        return EXIT_GEOMETRY
    except tensor_io.TensorFormatError as exc:
        print(f"convarith: bad tensor file: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"convarith: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
