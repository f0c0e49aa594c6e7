"""Piecewise-polynomial helpers built on scipy.interpolate.PPoly.

Pieces are polynomials in the local variable (x - left_break).  Global
coefficient lists (ascending powers of x) are converted on ingestion.
All constructions here are exact polynomial algebra, no fitting.
"""

from __future__ import annotations

from functools import reduce

import numpy as np
from scipy.interpolate import PPoly

from .errors import InvalidProfileError

_BREAK_TOL = 1e-12


def poly_shift(coeffs, x0: float) -> list[float]:
    """Coefficients of p(u + x0) given ascending coefficients of p(x)."""
    b = [float(c) for c in coeffs]
    n = len(b)
    for i in range(n):
        for j in range(n - 2, i - 1, -1):
            b[j] += x0 * b[j + 1]
    return b


def ppoly_from_local_pieces(breaks, pieces) -> PPoly:
    """Build a PPoly from ascending local-variable coefficient lists."""
    breaks = np.asarray(breaks, dtype=float)
    if len(pieces) != len(breaks) - 1:
        raise InvalidProfileError("piece count does not match break count")
    if np.any(np.diff(breaks) <= 0):
        raise InvalidProfileError("breaks must be strictly increasing")
    k = max(1, max(len(p) for p in pieces))
    c = np.zeros((k, len(pieces)))
    for j, p in enumerate(pieces):
        asc = np.zeros(k)
        asc[: len(p)] = p
        c[:, j] = asc[::-1]
    return PPoly(c, breaks)


def ppoly_from_global_pieces(pieces) -> PPoly:
    """Build a PPoly from [lo, hi, c0, c1, ...] rows with global-x coefficients.

    Rows must be contiguous: each hi equals the next lo.
    """
    if not pieces:
        raise InvalidProfileError("empty piece list")
    rows = [list(map(float, row)) for row in pieces]
    for row in rows:
        if len(row) < 3:
            raise InvalidProfileError("piece needs [lo, hi, c0, ...]")
        if not row[1] > row[0]:
            raise InvalidProfileError("piece has hi <= lo")
    for a, b in zip(rows, rows[1:]):
        if abs(a[1] - b[0]) > _BREAK_TOL:
            raise InvalidProfileError(
                f"pieces not contiguous at x={a[1]!r} vs {b[0]!r}"
            )
    breaks = [rows[0][0]] + [row[1] for row in rows]
    local = [poly_shift(row[2:], row[0]) for row in rows]
    return ppoly_from_local_pieces(breaks, local)


def ppoly_constant(value: float, lo: float = 0.0, hi: float = 1.0) -> PPoly:
    return ppoly_from_local_pieces([lo, hi], [[float(value)]])


def _local_asc(p: PPoly, j: int) -> np.ndarray:
    return p.c[::-1, j].copy()


def _piece_covering(p: PPoly, x: float) -> int:
    j = int(np.searchsorted(p.x, x, side="right") - 1)
    return min(max(j, 0), p.c.shape[1] - 1)


def _merged_breaks(p: PPoly, q: PPoly) -> np.ndarray:
    if abs(p.x[0] - q.x[0]) > _BREAK_TOL or abs(p.x[-1] - q.x[-1]) > _BREAK_TOL:
        raise InvalidProfileError("piecewise domains do not match")
    merged = np.union1d(p.x, q.x)
    keep = [merged[0]]
    for x in merged[1:]:
        if x - keep[-1] > _BREAK_TOL:
            keep.append(x)
    keep[0], keep[-1] = p.x[0], p.x[-1]
    return np.asarray(keep)


def _combine(p: PPoly, q: PPoly, op) -> PPoly:
    breaks = _merged_breaks(p, q)
    pieces = []
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        mid = 0.5 * (lo + hi)
        cp = poly_shift(_local_asc(p, _piece_covering(p, mid)), lo - p.x[_piece_covering(p, mid)])
        cq = poly_shift(_local_asc(q, _piece_covering(q, mid)), lo - q.x[_piece_covering(q, mid)])
        pieces.append(op(cp, cq))
    return ppoly_from_local_pieces(breaks, pieces)


def _add_coeffs(a, b):
    n = max(len(a), len(b))
    out = [0.0] * n
    for i, v in enumerate(a):
        out[i] += v
    for i, v in enumerate(b):
        out[i] += v
    return out


def ppoly_add(p: PPoly, q: PPoly) -> PPoly:
    return _combine(p, q, _add_coeffs)


def ppoly_sum(polys) -> PPoly:
    return reduce(ppoly_add, polys)


def ppoly_mul(p: PPoly, q: PPoly) -> PPoly:
    return _combine(p, q, lambda a, b: list(np.convolve(a, b)))


def ppoly_mul_global(p: PPoly, coeffs) -> PPoly:
    """Multiply by a single polynomial with global-x ascending coefficients."""
    q = ppoly_from_local_pieces(
        [p.x[0], p.x[-1]], [poly_shift(coeffs, p.x[0])]
    )
    return ppoly_mul(p, q)


def ppoly_offset(p: PPoly, c0: float) -> PPoly:
    c = p.c.copy()
    c[-1, :] += c0
    return PPoly(c, p.x.copy())


def ppoly_scale(p: PPoly, s: float) -> PPoly:
    return PPoly(p.c * s, p.x.copy())


def ppoly_restrict(p: PPoly, lo: float, hi: float) -> PPoly:
    """Restriction to [lo, hi] (must lie inside the domain)."""
    if lo < p.x[0] - _BREAK_TOL or hi > p.x[-1] + _BREAK_TOL or hi <= lo:
        raise InvalidProfileError("restriction interval outside domain")
    inner = [x for x in p.x if lo + _BREAK_TOL < x < hi - _BREAK_TOL]
    breaks = np.asarray([lo] + inner + [hi])
    pieces = []
    for a, b in zip(breaks[:-1], breaks[1:]):
        j = _piece_covering(p, 0.5 * (a + b))
        pieces.append(poly_shift(_local_asc(p, j), a - p.x[j]))
    return ppoly_from_local_pieces(breaks, pieces)


def ppoly_extrema(p: PPoly, lo: float | None = None, hi: float | None = None):
    """Exact (min, max) of p over [lo, hi] via critical points of each piece."""
    lo = p.x[0] if lo is None else lo
    hi = p.x[-1] if hi is None else hi
    xs = [lo, hi] + [x for x in p.x if lo < x < hi]
    dp = p.derivative()
    for j in range(p.c.shape[1]):
        a, b = p.x[j], p.x[j + 1]
        if b < lo or a > hi:
            continue
        dc = dp.c[:, j]
        if np.allclose(dc, 0.0):
            continue
        roots = np.roots(dc)
        for r in roots:
            if abs(r.imag) < 1e-12:
                x = a + r.real
                if max(a, lo) - 1e-15 <= x <= min(b, hi) + 1e-15:
                    xs.append(min(max(x, lo), hi))
    vals = p(np.asarray(xs))
    return float(vals.min()), float(vals.max())


SMOOTHSTEP = (0.0, 0.0, 0.0, 10.0, -15.0, 6.0)  # quintic, C^2 flat at both ends


def smoothstep_local(width: float, y0: float, y1: float) -> list[float]:
    """Local ascending coefficients of y0 + (y1-y0)*Q(u/width) on [0, width]."""
    dy = y1 - y0
    out = [y0, 0.0, 0.0]
    for k in range(3, 6):
        out.append(dy * SMOOTHSTEP[k] / width**k)
    return out


def smooth_transition_ppoly(
    y0: float, y1: float, lo: float, hi: float, x0: float = 0.0, x1: float = 1.0
) -> PPoly:
    """Constant y0 on [x0, lo], quintic ramp on [lo, hi], constant y1 on [hi, x1]."""
    if not (x0 <= lo < hi <= x1):
        raise InvalidProfileError("transition interval must sit inside the domain")
    breaks, pieces = [], []
    if lo > x0 + _BREAK_TOL:
        breaks.append(x0)
        pieces.append([y0])
    breaks.append(lo)
    pieces.append(smoothstep_local(hi - lo, y0, y1))
    breaks.append(hi)
    if x1 > hi + _BREAK_TOL:
        pieces.append([y1])
        breaks.append(x1)
    return ppoly_from_local_pieces(breaks, pieces)


def check_c1(p: PPoly, tol: float = 1e-9, name: str = "profile") -> None:
    """Raise unless the piecewise polynomial is C^1 across interior breaks."""
    dp = p.derivative()
    scale = 1.0 + float(np.max(np.abs(p.c)))
    for x in p.x[1:-1]:
        below = x - 1e-14 * max(1.0, abs(x))
        if abs(float(p(below)) - float(p(x))) > tol * scale:
            raise InvalidProfileError(f"{name} is discontinuous at x={x}")
        if abs(float(dp(below)) - float(dp(x))) > tol * scale:
            raise InvalidProfileError(f"{name} has a derivative jump at x={x}")
