"""Batched quadrature engines and low-discrepancy sampling.

Path integrals refine by doubling the number of Gauss panels until the
change between levels drops below the tolerance; the same scheme drives
the tensor-product rule on [0,1] x [0,2pi) used for disk integrals.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.stats import qmc

from .errors import NumericError

TWO_PI = 2.0 * np.pi


@lru_cache(maxsize=None)
def gauss_rule(n: int):
    nodes, weights = np.polynomial.legendre.leggauss(n)
    return nodes, weights


def composite_gauss(edges: np.ndarray, n: int):
    """Nodes and weights of n-point Gauss on each interval of `edges`."""
    x, w = gauss_rule(n)
    lo = edges[:-1][:, None]
    hi = edges[1:][:, None]
    half = 0.5 * (hi - lo)
    nodes = (0.5 * (hi + lo) + half * x[None, :]).ravel()
    weights = (half * w[None, :]).ravel()
    return nodes, weights


def refine_edges(base: np.ndarray, level: int) -> np.ndarray:
    """Split every base interval into 2**level equal parts."""
    if level == 0:
        return base
    m = 2**level
    parts = [base[:1]]
    for lo, hi in zip(base[:-1], base[1:]):
        parts.append(np.linspace(lo, hi, m + 1)[1:])
    return np.concatenate(parts)


def path_integral_batch(
    values_fn,
    tol: float,
    base_edges=(0.0, 1.0),
    n_gauss: int = 10,
    max_level: int = 9,
    what: str = "path integral",
):
    """Integrate a family of paths sharing the parameter interval.

    values_fn(s_nodes) must return an array of shape (n_paths, len(s_nodes)).
    Returns (integrals, error_estimates); raises NumericError with the
    partial result if the doubling refinement does not settle.
    """
    base = np.asarray(base_edges, dtype=float)
    prev = None
    err = None
    for level in range(max_level + 1):
        s, w = composite_gauss(refine_edges(base, level), n_gauss)
        vals = values_fn(s)
        cur = vals @ w
        if prev is not None:
            err = np.abs(cur - prev)
            if err.max() <= tol:
                return cur, err
        prev = cur
    raise NumericError(
        f"{what} did not converge to {tol:g} within {max_level} refinements",
        estimate=prev,
        error_estimate=err,
    )


def rect_integral(
    values_fn,
    tol: float,
    r_edges=(0.0, 1.0),
    n_theta: int = 32,
    n_gauss: int = 10,
    max_level: int = 7,
    what: str = "disk integral",
):
    """Integral over [r0, r1] x [0, 2pi) of values_fn(R, Theta).

    Gauss panels in r (refined by doubling, aligned to the given edges)
    tensored with a periodic midpoint rule in theta.
    """
    base = np.asarray(r_edges, dtype=float)
    prev = None
    err = None
    for level in range(max_level + 1):
        r, wr = composite_gauss(refine_edges(base, level), n_gauss)
        m = n_theta * 2**level
        theta = (np.arange(m) + 0.5) * (TWO_PI / m)
        wt = TWO_PI / m
        R = np.repeat(r, m)
        T = np.tile(theta, len(r))
        vals = values_fn(R, T).reshape(len(r), m)
        cur = float(wr @ vals.sum(axis=1) * wt)
        if prev is not None:
            err = abs(cur - prev)
            if err <= tol:
                return cur, err
        prev = cur
    raise NumericError(
        f"{what} did not converge to {tol:g} within {max_level} refinements",
        estimate=prev,
        error_estimate=err,
    )


def halton_disk(n: int, include_center: bool = True) -> np.ndarray:
    """Deterministic low-discrepancy sample of the closed unit disk."""
    u = qmc.Halton(d=2, scramble=False).random(n)
    r = np.sqrt(u[:, 0])
    theta = TWO_PI * u[:, 1]
    pts = np.stack([r * np.cos(theta), r * np.sin(theta)], axis=1)
    if include_center:
        pts = np.vstack([[0.0, 0.0], pts[:-1]])
    return pts


def halton_cube(n: int, d: int) -> np.ndarray:
    return qmc.Halton(d=d, scramble=False).random(n)
