"""Lossless symbol rendering with the mandatory 4-module quiet zone."""

from __future__ import annotations

import numpy as np

from ..errors import FormatError
from .encode import QrSymbol

QUIET_ZONE = 4


def _with_quiet_zone(symbol: QrSymbol) -> np.ndarray:
    side = symbol.side
    full = np.zeros((side + 2 * QUIET_ZONE, side + 2 * QUIET_ZONE), dtype=bool)
    full[QUIET_ZONE : QUIET_ZONE + side, QUIET_ZONE : QUIET_ZONE + side] = symbol.modules
    return full


def render_qr(symbol: QrSymbol, fmt: str, scale: int = 1) -> bytes:
    """Render to svg, pgm (binary P5), or ascii (two chars per module)."""
    if fmt == "svg":
        return _render_svg(symbol, scale)
    if fmt == "pgm":
        return _render_pgm(symbol, scale)
    if fmt == "ascii":
        return _render_ascii(symbol)
    raise FormatError("unsupported_format", f"unsupported render format {fmt!r}")


def _render_svg(symbol: QrSymbol, scale: int) -> bytes:
    grid = _with_quiet_zone(symbol)
    n = grid.shape[0]
    px = n * max(scale, 1)
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{px}" height="{px}" '
        f'viewBox="0 0 {n} {n}" shape-rendering="crispEdges">',
        f'<rect width="{n}" height="{n}" fill="#ffffff"/>',
    ]
    path = []
    for r, c in zip(*np.nonzero(grid)):
        path.append(f"M{c} {r}h1v1h-1z")
    parts.append(f'<path d="{"".join(path)}" fill="#000000"/>')
    parts.append("</svg>")
    return "\n".join(parts).encode("utf-8")


def _render_pgm(symbol: QrSymbol, scale: int) -> bytes:
    grid = _with_quiet_zone(symbol)
    scale = max(scale, 1)
    img = np.where(grid, 0, 255).astype(np.uint8)
    img = np.kron(img, np.ones((scale, scale), dtype=np.uint8))
    header = f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode("ascii")
    return header + img.tobytes()


def _render_ascii(symbol: QrSymbol) -> bytes:
    grid = _with_quiet_zone(symbol)
    lines = ["".join("██" if v else "  " for v in row) for row in grid]
    return ("\n".join(lines) + "\n").encode("utf-8")
