"""Eigencurve figures rendered to files with the Agg backend.

The same sampled table feeds both the CSV export and the PNG: for each lambda
on a uniform grid the mu-slice eigenvalues are sorted by real part, real
entries keep their real part and complex or infinite entries become gaps.
"""

from __future__ import annotations

import numpy as np

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .pencil import BivariatePencil
from .points import KIND_B, KIND_C, KIND_D, KIND_ZGV

# an eigenvalue counts as real when |Im| <= REAL_TOL * (1 + |value|)
REAL_TOL = 1e-8

_MARKERS = {
    KIND_ZGV: ("o", "tab:red"),
    KIND_B: ("s", "tab:green"),
    KIND_C: ("D", "tab:purple"),
    KIND_D: ("^", "tab:orange"),
}


def curve_table(P: BivariatePencil, lmin: float, lmax: float,
                steps: int) -> tuple[np.ndarray, np.ndarray]:
    """Sampled eigencurves: lambda grid and a (steps, n) real table.

    Row i holds the mu-slice at lambda_i sorted by real part; cells whose
    eigenvalue is complex or infinite are NaN.
    """
    if steps < 2:
        raise ValueError("steps must be at least 2")
    if not lmax > lmin:
        raise ValueError("need lmax > lmin")
    lams = np.linspace(lmin, lmax, steps)
    table = np.full((steps, P.n), np.nan)
    for i, lam in enumerate(lams):
        es = P.mu_slice(lam)
        vals = np.sort_complex(es.values[es.finite_indices()])
        for j, v in enumerate(vals):
            if abs(v.imag) <= REAL_TOL * (1.0 + abs(v)):
                table[i, j] = v.real
    return lams, table


def window_from_points(points, default: tuple[float, float] = (-2.0, 2.0),
                       pad: float = 0.2) -> tuple[float, float]:
    """Lambda window covering the real points, widened by a margin."""
    lams = [p.lam.real for p in points
            if abs(p.lam.imag) <= REAL_TOL * (1.0 + abs(p.lam))]
    if not lams:
        return default
    lo, hi = min(lams), max(lams)
    span = max(hi - lo, 1.0)
    return lo - pad * span, hi + pad * span


def render_curves(P: BivariatePencil, path, lmin: float = -2.0,
                  lmax: float = 2.0, steps: int = 241, points=(),
                  title: str | None = None) -> str:
    """Plot the real eigencurve branches, overlay critical points, save PNG."""
    lams, table = curve_table(P, lmin, lmax, steps)
    fig, ax = plt.subplots(figsize=(7.2, 5.4), dpi=130)
    for j in range(table.shape[1]):
        ax.plot(lams, table[:, j], lw=1.0, color="tab:blue", alpha=0.75)

    seen = set()
    for p in points:
        if abs(p.lam.imag) > REAL_TOL * (1.0 + abs(p.lam)):
            continue
        if abs(p.mu.imag) > REAL_TOL * (1.0 + abs(p.mu)):
            continue
        marker, color = _MARKERS.get(p.kind, ("x", "black"))
        ax.plot([p.lam.real], [p.mu.real], marker, color=color, ms=7,
                mfc="none", mew=1.6,
                label=p.kind if p.kind not in seen else None)
        seen.add(p.kind)

    ax.set_xlim(lmin, lmax)
    ax.set_xlabel("lambda")
    ax.set_ylabel("mu")
    ax.grid(True, lw=0.3, alpha=0.5)
    if title:
        ax.set_title(title)
    if seen:
        ax.legend(loc="best", fontsize=9)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return str(path)


def render_report(P: BivariatePencil, points, path, lmin: float | None = None,
                  lmax: float | None = None, steps: int = 241,
                  title: str | None = None) -> str:
    """Curve plot windowed around the reported points."""
    if lmin is None or lmax is None:
        lo, hi = window_from_points(points)
        lmin = lo if lmin is None else lmin
        lmax = hi if lmax is None else lmax
    return render_curves(P, path, lmin, lmax, steps, points, title)
