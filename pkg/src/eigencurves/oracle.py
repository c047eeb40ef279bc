"""Characteristic-polynomial oracle: interpolation, resultants, critical points.

This is the independent cross-check path. It never touches the operator
determinant machinery: the characteristic polynomial is recovered by
interpolating det(A + lambda*B + mu*C) on a tensor grid of scaled roots of
unity, and critical point candidates come from a Sylvester resultant plus
companion-matrix root finding. Intended for small n (the grid has (n+1)^2
determinant evaluations and the resultant degree grows like 2n^2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pencil import BivariatePencil


class DegenerateResultant(Exception):
    """The resultant vanished identically (shared factor or degenerate pencil)."""


@dataclass
class BivariatePoly:
    """p(lambda, mu) = sum coeffs[i, j] * lambda^i * mu^j."""

    coeffs: np.ndarray

    def __call__(self, lam: complex, mu: complex) -> complex:
        d1, d2 = self.coeffs.shape
        lp = lam ** np.arange(d1)
        mp = mu ** np.arange(d2)
        return complex(lp @ self.coeffs @ mp)

    def magnitude_at(self, lam: complex, mu: complex) -> float:
        """Sum |c_ij| |lam|^i |mu|^j, the natural residual normalization."""
        d1, d2 = self.coeffs.shape
        lp = np.abs(lam) ** np.arange(d1)
        mp = np.abs(mu) ** np.arange(d2)
        return float(lp @ np.abs(self.coeffs) @ mp)

    def diff_lambda(self) -> "BivariatePoly":
        c = self.coeffs
        if c.shape[0] <= 1:
            return BivariatePoly(np.zeros((1, c.shape[1]), dtype=c.dtype))
        i = np.arange(1, c.shape[0])
        return BivariatePoly(c[1:, :] * i[:, None])

    def diff_mu(self) -> "BivariatePoly":
        c = self.coeffs
        if c.shape[1] <= 1:
            return BivariatePoly(np.zeros((c.shape[0], 1), dtype=c.dtype))
        j = np.arange(1, c.shape[1])
        return BivariatePoly(c[:, 1:] * j[None, :])

    def mu_coefficients(self, lam: complex) -> np.ndarray:
        """Coefficients of mu^j after substituting a fixed lambda."""
        d1 = self.coeffs.shape[0]
        lp = lam ** np.arange(d1)
        return lp @ self.coeffs

    def trimmed(self, rel_tol: float = 1e-9) -> "BivariatePoly":
        c = self.coeffs.copy()
        top = np.max(np.abs(c))
        if top == 0.0:
            return BivariatePoly(np.zeros((1, 1), dtype=c.dtype))
        c[np.abs(c) < rel_tol * top] = 0.0
        rows = np.flatnonzero(np.any(c != 0.0, axis=1))
        cols = np.flatnonzero(np.any(c != 0.0, axis=0))
        return BivariatePoly(c[: rows[-1] + 1, : cols[-1] + 1])


def char_poly(P: BivariatePencil, trim_tol: float = 1e-9) -> BivariatePoly:
    """Interpolate det(A + lambda*B + mu*C) to a coefficient array.

    Sampling nodes are roots of unity scaled by 1 + ||A|| / (||B|| + ||C||),
    which keeps the two 1-D Vandermonde systems perfectly conditioned (they are
    scaled DFT matrices). Coefficients with i + j > n are forced to zero; tiny
    interpolation noise below trim_tol (relative) is dropped.
    """
    n = P.n
    na, nb, nc = P.norms()
    R = 1.0 + na / max(nb + nc, 1e-300)
    m = n + 1
    nodes = R * np.exp(2j * np.pi * np.arange(m) / m)
    G = np.empty((m, m), dtype=np.complex128)
    for i, lam in enumerate(nodes):
        for j, mu in enumerate(nodes):
            G[i, j] = np.linalg.det(P.evaluate(lam, mu))
    V = np.vander(nodes, m, increasing=True)
    coeffs = np.linalg.solve(V, np.linalg.solve(V, G).T).T
    i_idx, j_idx = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
    coeffs[i_idx + j_idx > n] = 0.0
    return BivariatePoly(coeffs).trimmed(trim_tol)


def _resultant_in_mu(p: BivariatePoly, q: BivariatePoly, radius: float) -> np.ndarray:
    """Coefficients (ascending in lambda) of Res_mu(p, q) by sample/interpolate."""
    dp = p.coeffs.shape[1] - 1
    dq = q.coeffs.shape[1] - 1
    if dp < 1 or dq < 1:
        raise DegenerateResultant("one polynomial is constant in mu")
    # degree bound in lambda for the Sylvester determinant
    deg_bound = dq * (p.coeffs.shape[0] - 1) + dp * (q.coeffs.shape[0] - 1)
    m = max(deg_bound + 1, 2)
    nodes = radius * np.exp(2j * np.pi * np.arange(m) / m)
    dets = np.empty(m, dtype=np.complex128)
    size = dp + dq
    for k, lam in enumerate(nodes):
        a = p.mu_coefficients(lam)   # ascending mu powers
        b = q.mu_coefficients(lam)
        S = np.zeros((size, size), dtype=np.complex128)
        # Sylvester matrix with rows holding descending-power coefficients
        arev = a[::-1]
        brev = b[::-1]
        for r in range(dq):
            S[r, r : r + dp + 1] = arev
        for r in range(dp):
            S[dq + r, r : r + dq + 1] = brev
        dets[k] = np.linalg.det(S)
    V = np.vander(nodes, m, increasing=True)
    return np.linalg.solve(V, dets)


def common_roots(
    p: BivariatePoly,
    q: BivariatePoly,
    radius: float = 1.0,
    res_tol: float = 1e-8,
) -> list[tuple[complex, complex]]:
    """Common zeros of two bivariate polynomials via Res_mu and companion roots.

    For each root lambda* of the resultant, the mu-roots of p(lambda*, .) are
    screened by the normalized residual of q. Raises DegenerateResultant when
    the resultant is numerically the zero polynomial.
    """
    res = _resultant_in_mu(p.trimmed(), q.trimmed(), radius)
    top = np.max(np.abs(res))
    if top == 0.0 or top < 1e-12 * max(np.max(np.abs(p.coeffs)) * np.max(np.abs(q.coeffs)), 1e-300):
        raise DegenerateResultant("resultant vanishes identically")
    res = res.copy()
    res[np.abs(res) < 1e-10 * top] = 0.0
    nz = np.flatnonzero(res != 0.0)
    res = res[: nz[-1] + 1]
    if res.size < 2:
        return []
    lam_roots = np.roots(res[::-1])  # np.roots wants descending powers

    out: list[tuple[complex, complex]] = []
    for lam in lam_roots:
        a = p.mu_coefficients(complex(lam))
        atop = np.max(np.abs(a))
        if atop == 0.0:
            continue
        a = a.copy()
        a[np.abs(a) < 1e-12 * atop] = 0.0
        nz = np.flatnonzero(a != 0.0)
        if nz.size == 0 or nz[-1] == 0:
            continue
        a = a[: nz[-1] + 1]
        for mu in np.roots(a[::-1]):
            lamc, muc = complex(lam), complex(mu)
            rp = abs(p(lamc, muc)) / max(p.magnitude_at(lamc, muc), 1e-300)
            rq = abs(q(lamc, muc)) / max(q.magnitude_at(lamc, muc), 1e-300)
            if rp <= res_tol and rq <= res_tol:
                out.append((lamc, muc))
    return _dedup_pairs(out)


def _dedup_pairs(pairs: list[tuple[complex, complex]], tol: float = 1e-7) -> list[tuple[complex, complex]]:
    kept: list[tuple[complex, complex]] = []
    for lam, mu in sorted(pairs, key=lambda t: (t[0].real, t[0].imag, t[1].real, t[1].imag)):
        dup = False
        for lam2, mu2 in kept:
            if abs(lam - lam2) + abs(mu - mu2) <= tol * (1.0 + abs(lam) + abs(mu)):
                dup = True
                break
        if not dup:
            kept.append((lam, mu))
    return kept


def zgv_oracle(
    P: BivariatePencil,
    res_tol: float = 1e-8,
    pmu_tol: float = 1e-6,
) -> list[tuple[complex, complex]]:
    """All points with p = 0 and p_lambda = 0 but p_mu != 0 (the ZGV points).

    Independent of the operator-determinant pipelines: works on the interpolated
    characteristic polynomial with a Sylvester resultant. Practical up to n ~ 4.
    """
    p = char_poly(P)
    na, nb, nc = P.norms()
    radius = 1.0 + na / max(nb + nc, 1e-300)
    pl = p.diff_lambda()
    pm = p.diff_mu()
    pts = common_roots(p, pl, radius=radius, res_tol=res_tol)
    out = []
    for lam, mu in pts:
        if abs(pm(lam, mu)) > pmu_tol * max(pm.magnitude_at(lam, mu), 1e-300):
            out.append((lam, mu))
    return out
