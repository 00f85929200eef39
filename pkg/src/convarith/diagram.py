"""Static grid diagrams of kernel placements.

One frame per kernel placement: the zero-padded input with the kernel
footprint shaded, next to the output grid with the cell being computed marked.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

from convarith.errors import InvalidGeometry
from convarith.geometry import AxisSpec, conv_output_size

# fills for input, kernel footprint and output cells
INPUT_FILL = "#268bd2"
KERNEL_FILL = "#073642"
OUTPUT_FILL = "#2aa198"
PADDING_FILL = "#ffffff"

CELL = 20
GAP = 2 * CELL


@dataclass(frozen=True)
class Frame:
    index: int
    output_cell: tuple[int, int]
    footprint: frozenset[tuple[int, int]]


@dataclass(frozen=True)
class Layout:
    """2-D view of a 1-D or 2-D convolution; 1-D is drawn as a single row."""

    rows: AxisSpec
    cols: AxisSpec

    @property
    def padded(self) -> tuple[int, int]:
        return self.rows.padded_size, self.cols.padded_size

    @property
    def output(self) -> tuple[int, int]:
        return conv_output_size(self.rows), conv_output_size(self.cols)

    def is_padding(self, r: int, c: int) -> bool:
        return not (
            self.rows.padding <= r < self.rows.padding + self.rows.input_size
            and self.cols.padding <= c < self.cols.padding + self.cols.input_size
        )


def layout(axes: Sequence[AxisSpec]) -> Layout:
    axes = tuple(axes)
    if len(axes) == 1:
        return Layout(AxisSpec(1, 1), axes[0])
    if len(axes) == 2:
        return Layout(*axes)
    raise InvalidGeometry(f"diagrams cover 1-D and 2-D convolutions, got {len(axes)} axes")


def frames(axes: Sequence[AxisSpec]) -> list[Frame]:
    """Every kernel placement in row-major output order."""
    lay = layout(axes)
    out_r, out_c = lay.output
    result = []
    for n, (orow, ocol) in enumerate(itertools.product(range(out_r), range(out_c))):
        top, left = orow * lay.rows.stride, ocol * lay.cols.stride
        cells = frozenset(
            (top + tr * lay.rows.dilation, left + tc * lay.cols.dilation)
            for tr in range(lay.rows.kernel_size)
            for tc in range(lay.cols.kernel_size)
        )
        result.append(Frame(n, (orow, ocol), cells))
    return result


def render_ascii(axes: Sequence[AxisSpec], frame: Frame) -> str:
    """Text frame: ``.`` padding, ``#`` kernel footprint, digits for input cells.

    Input cells show their column index modulo 10. In the output grid ``o``
    is a plain cell and ``*`` the one produced by this placement.
    """
    lay = layout(axes)
    pr, pc = lay.padded
    out_r, out_c = lay.output
    left_lines = []
    for r in range(pr):
        row = []
        for c in range(pc):
            if (r, c) in frame.footprint:
                row.append("#")
            elif lay.is_padding(r, c):
                row.append(".")
            else:
                row.append(str((c - lay.cols.padding) % 10))
        left_lines.append(" ".join(row))
    right_lines = [
        " ".join("*" if (r, c) == frame.output_cell else "o" for c in range(out_c))
        for r in range(out_r)
    ]
    width = len(left_lines[0])
    lines = []
    for n in range(max(len(left_lines), len(right_lines))):
        left = left_lines[n] if n < len(left_lines) else ""
        right = right_lines[n] if n < len(right_lines) else ""
        lines.append(f"{left:<{width}}    {right}".rstrip())
    return "\n".join(lines) + "\n"


def _svg_panel(lay: Layout, frame: Frame, x0: int, y0: int) -> list[str]:
    pr, pc = lay.padded
    out_r, out_c = lay.output
    parts = []
    for r in range(pr):
        for c in range(pc):
            fill = PADDING_FILL if lay.is_padding(r, c) else INPUT_FILL
            parts.append(
                f'<rect x="{x0 + c * CELL}" y="{y0 + r * CELL}" width="{CELL}" height="{CELL}" '
                f'fill="{fill}" stroke="#002b36"/>'
            )
    for r, c in sorted(frame.footprint):
        parts.append(
            f'<rect x="{x0 + c * CELL}" y="{y0 + r * CELL}" width="{CELL}" height="{CELL}" '
            f'fill="{KERNEL_FILL}" fill-opacity="0.4"/>'
        )
    ox = x0 + pc * CELL + GAP
    for r in range(out_r):
        for c in range(out_c):
            parts.append(
                f'<rect x="{ox + c * CELL}" y="{y0 + r * CELL}" width="{CELL}" height="{CELL}" '
                f'fill="{OUTPUT_FILL}" stroke="#002b36"/>'
            )
    r, c = frame.output_cell
    parts.append(
        f'<rect x="{ox + c * CELL}" y="{y0 + r * CELL}" width="{CELL}" height="{CELL}" '
        f'fill="{KERNEL_FILL}" fill-opacity="0.4"/>'
    )
    return parts


def _panel_size(lay: Layout) -> tuple[int, int]:
    pr, pc = lay.padded
    out_r, out_c = lay.output
    return (pc + out_c) * CELL + GAP, max(pr, out_r) * CELL


def render_svg(axes: Sequence[AxisSpec], selected: Sequence[Frame], columns: int = 4) -> str:
    """SVG document with the selected frames laid out in a grid of panels."""
    lay = layout(axes)
    pw, ph = _panel_size(lay)
    columns = max(1, min(columns, len(selected)))
    nrows = -(-len(selected) // columns)
    width = columns * pw + (columns + 1) * CELL
    height = nrows * ph + (nrows + 1) * CELL
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">'
    ]
    for n, frame in enumerate(selected):
        x0 = CELL + (n % columns) * (pw + CELL)
        y0 = CELL + (n // columns) * (ph + CELL)
        parts.append(f'<g id="frame-{frame.index}">')
        parts.extend("  " + p for p in _svg_panel(lay, frame, x0, y0))
        parts.append("</g>")
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
