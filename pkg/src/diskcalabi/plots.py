"""Figure rendering for the CLI report paths.

Figures are written to files (SVG by default) next to the delimited
output; nothing here opens a display.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "diskcalabi"

import matplotlib.pyplot as plt
import numpy as np

from .diskmap import ActionProfile


def save_radial_action(action: ActionProfile, calabi_value: float, path) -> None:
    """Action profile f(r) for a radially symmetric map, with markers for
    the boundary angle and the Calabi invariant."""
    r = np.linspace(0.0, 1.0, 512)
    pts = np.stack([r, np.zeros_like(r)], axis=1)
    f = action(pts)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(r, f, lw=2, label="action f(r)")
    ax.axhline(action.theta0, color="tab:red", ls="--", lw=1,
               label=f"boundary angle {action.theta0:.6g}")
    ax.axhline(calabi_value, color="tab:green", ls=":", lw=1.5,
               label=f"Calabi {calabi_value:.6g}")
    ax.set_xlabel("radius r")
    ax.set_ylabel("action (turns)")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def save_orbits(orbits, path) -> None:
    """Orbit points on the disk, colored by mean action."""
    fig, ax = plt.subplots(figsize=(5, 5))
    circle = plt.Circle((0, 0), 1.0, fill=False, color="k", lw=1)
    ax.add_patch(circle)
    if orbits:
        pts = np.vstack([o.points for o in orbits])
        colors = np.concatenate([[o.mean_action] * o.period for o in orbits])
        sc = ax.scatter(pts[:, 0], pts[:, 1], c=colors, s=14, cmap="viridis")
        fig.colorbar(sc, ax=ax, label="mean action (turns)")
    ax.set_xlim(-1.05, 1.05)
    ax.set_ylim(-1.05, 1.05)
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def save_suspension_heat(susp, path, n_t: int = 64, n_r: int = 128) -> None:
    """Heat map of F(t, r) for a radially symmetric map."""
    t = np.linspace(0.0, 1.0, n_t)
    r = np.linspace(0.0, 1.0, n_r)
    pts = np.stack([r, np.zeros_like(r)], axis=1)
    grid = np.empty((n_t, n_r))
    for i, ti in enumerate(t):
        grid[i] = susp.F(float(ti), pts)
    fig, ax = plt.subplots(figsize=(6, 4))
    im = ax.imshow(grid, origin="lower", aspect="auto",
                   extent=(0.0, 1.0, 0.0, 1.0), cmap="magma")
    fig.colorbar(im, ax=ax, label="F(t, r)")
    ax.set_xlabel("radius r")
    ax.set_ylabel("page time t")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def save_spectrum(ks, ratios, volume: float, path) -> None:
    """c_k^2/(2k) against k with the contact-volume asymptote."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogx(ks, ratios, lw=1.5, label="$c_k^2/2k$")
    ax.axhline(volume, color="tab:red", ls="--", lw=1, label=f"volume {volume:.6g}")
    ax.set_xlabel("k")
    ax.set_ylabel("spectral ratio")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def save_bounds(ks, bounds, limit: float, path) -> None:
    """Mean-action bound against k with its closed-form limit."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogx(ks, bounds, marker="o", ms=3, lw=1, label="bound(k)")
    ax.axhline(limit, color="tab:red", ls="--", lw=1, label=f"limit {limit:.9g}")
    ax.set_xlabel("k")
    ax.set_ylabel("mean-action bound")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
