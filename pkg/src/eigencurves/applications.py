"""Classic problems rephrased as critical-point searches on bivariate pencils.

Five constructions are covered: two-parameter eigenvalue problems with a
vanishing quadratic constraint, the distance of a stable matrix to the set of
unstable ones, parameter values at which a one-parameter pencil acquires a
multiple eigenvalue, zero-group-velocity points of parameter-dependent
quadratic eigenvalue problems, and critical points of two-parameter
Sturm-Liouville eigencurves. Each helper builds the appropriate pencil,
delegates to one of the global or local pipelines, and maps the critical
points back to the language of the source problem.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as sla
from scipy.optimize import minimize_scalar

from .linalg import numerical_rank, spectral_norm, svd
from .pencil import BivariatePencil
from .points import (
    CriticalPoint,
    NotBiregular,
    PipelineReport,
    critical_points_direct,
    critical_points_projected,
    dedup_points,
)
from .refine import gauss_newton_2d, mfrd_refine_all

log = logging.getLogger(__name__)

__all__ = [
    "InvalidWeight",
    "NotHermitian",
    "NotIndefinite",
    "NotStable",
    "SingularLeadingCoeff",
    "SturmLiouvilleDiscretization",
    "TwoDEigenvalue",
    "discretize_sturm_liouville",
    "distance_to_instability",
    "double_eigenvalue_points",
    "mathieu_discretization",
    "qep_zgv",
    "sturm_liouville_critical",
    "twod_eigenvalues",
]


class NotHermitian(Exception):
    """An input matrix required to be Hermitian is not."""


class NotIndefinite(Exception):
    """The constraint matrix does not have eigenvalues of both signs."""


class NotStable(Exception):
    """The matrix has an eigenvalue outside the open left half-plane."""


class SingularLeadingCoeff(Exception):
    """A coefficient that must be invertible is numerically singular."""


class InvalidWeight(Exception):
    """The leading Sturm-Liouville coefficient is not positive on the grid."""


def _as_square(M, name: str) -> np.ndarray:
    M = np.asarray(M, dtype=np.complex128)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {M.shape}")
    return M


def _critical_report(P: BivariatePencil, method: str, mode: str, seed: int,
                     **opts) -> PipelineReport:
    m = method.lower()
    if m == "direct":
        return critical_points_direct(P, mode=mode, seed=seed, **opts)
    if m == "projected":
        return critical_points_projected(P, mode=mode, seed=seed, **opts)
    if m == "mfrd":
        return mfrd_refine_all(P, mode=mode, seed=seed, **opts)
    raise ValueError(f"method must be direct, projected or mfrd, got {method!r}")


def _is_real_pair(lam: complex, mu: complex, tol: float = 1e-8) -> bool:
    return (abs(lam.imag) <= tol * (1.0 + abs(lam)) and
            abs(mu.imag) <= tol * (1.0 + abs(mu)))


# ---------------------------------------------------------------------------
# two-parameter eigenvalue pairs with a vanishing quadratic constraint

@dataclass
class TwoDEigenvalue:
    """Real pair (lam, mu) with a unit vector x solving the constrained problem.

    The three residuals report |(A - lam*B)x - mu*x|, |x^H B x| and
    | ||x|| - 1 | in that order.
    """

    lam: float
    mu: float
    x: np.ndarray
    residual_eq: float
    residual_constraint: float
    residual_norm: float
    kind: str = ""
    point: CriticalPoint | None = None

    @property
    def residuals(self) -> tuple[float, float, float]:
        return self.residual_eq, self.residual_constraint, self.residual_norm


def _constrained_vector(B: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Unit vector x in the kernel span minimizing |x^H B x|.

    For a one-dimensional kernel the basis vector itself is returned. With
    more room the Hermitian form restricted to the kernel is diagonalized and
    its extreme eigenvectors are blended so the form vanishes; this is exact
    whenever the form is indefinite or has a zero eigenvalue, which holds at
    every genuine constrained pair of a Hermitian problem.
    """
    if kernel.shape[1] == 1:
        return kernel[:, 0]
    M = kernel.conj().T @ B @ kernel
    M = 0.5 * (M + M.conj().T)
    theta, W = np.linalg.eigh(M)
    lo, hi = theta[0], theta[-1]
    u = max(-lo, 0.0)   # weight^2 on the top eigenvector
    v = max(hi, 0.0)    # weight^2 on the bottom eigenvector
    if u + v == 0.0:
        c = W[:, 0]
    else:
        c = np.sqrt(u / (u + v)) * W[:, -1] + np.sqrt(v / (u + v)) * W[:, 0]
    x = kernel @ c
    return x / np.linalg.norm(x)


def twod_eigenvalues(A, B, method: str = "direct", seed: int = 0,
                     **opts) -> list[TwoDEigenvalue]:
    """Real solutions of (A - lam*B)x = mu*x, x^H B x = 0, ||x|| = 1.

    A must be Hermitian and B Hermitian indefinite; the solutions live among
    the real critical points of the pencil A + lam*(-B) + mu*(-I). The left
    and right null vectors coincide there, so the vanishing of the bilinear
    term turns into the quadratic constraint. Every real critical point is
    reported with the kernel vector that minimizes |x^H B x|: the minimum is
    zero at simple points and at multiple points whose branch slopes differ in
    sign, while a crossing of two branches with same-sign slopes admits no
    constrained vector at all and keeps its honest nonzero residual. Complex
    critical points are computed along the way but never reported.
    """
    A = _as_square(A, "A")
    B = _as_square(B, "B")
    if A.shape != B.shape:
        raise ValueError("A and B must have matching shapes")
    for name, M in (("A", A), ("B", B)):
        dev = np.linalg.norm(M - M.conj().T)
        if dev > 1e-12 * max(np.linalg.norm(M), 1.0):
            raise NotHermitian(f"{name} deviates from its adjoint by {dev:.2e}")
    evB = np.linalg.eigvalsh(B)
    tolB = 1e-12 * max(float(np.abs(evB).max()), 1.0)
    if not (evB[0] < -tolB and evB[-1] > tolB):
        raise NotIndefinite("B needs eigenvalues of both signs")

    n = A.shape[0]
    P = BivariatePencil(A, -B, -np.eye(n))
    rep = _critical_report(P, method, "all2D", seed, **opts)
    out: list[TwoDEigenvalue] = []
    for p in rep.points:
        if not _is_real_pair(p.lam, p.mu):
            continue
        lam, mu = float(p.lam.real), float(p.mu.real)
        E = A - lam * B - mu * np.eye(n)
        S = svd(E)
        g = max(1, int(np.count_nonzero(S.s <= 1e-8 * P.scale_at(lam, mu))))
        x = _constrained_vector(B, S.V[:, n - g:])
        out.append(TwoDEigenvalue(
            lam=lam, mu=mu, x=x,
            residual_eq=float(np.linalg.norm(E @ x)),
            residual_constraint=float(abs(x.conj() @ B @ x)),
            residual_norm=float(abs(np.linalg.norm(x) - 1.0)),
            kind=p.kind, point=p))
    out.sort(key=lambda t: (t.lam, t.mu))
    return out


# ---------------------------------------------------------------------------
# distance to instability

def _smallest_sv_on_axis(A: np.ndarray, lam: float) -> float:
    return float(sla.svdvals(A - 1j * lam * np.eye(A.shape[0]))[-1])


def _beta_by_scan(A: np.ndarray) -> tuple[float, float]:
    """Grid plus local minimization of the smallest singular value on the axis.

    Used when the pencil route is unavailable, e.g. for matrices whose
    singular-value curves coincide (A = c*I): the determinant then has a
    repeated factor and the critical-point machinery rightly refuses.
    """
    radius = 2.0 * spectral_norm(A) + 1.0
    grid = np.linspace(-radius, radius, 2001)
    vals = np.array([_smallest_sv_on_axis(A, t) for t in grid])
    i = int(np.argmin(vals))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, grid.size - 1)]
    res = minimize_scalar(lambda t: _smallest_sv_on_axis(A, t),
                          bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-12})
    return float(res.fun), float(res.x)


def distance_to_instability(A, method: str = "direct", seed: int = 0,
                            **opts) -> tuple[float, float]:
    """Norm of the smallest perturbation making a stable matrix unstable.

    Returns (beta, lam_opt) where beta = min over real lam of the smallest
    singular value of A - i*lam*I and lam_opt attains it. The minimum is found
    as the real critical point with the smallest positive mu of the doubled
    Hermitian pencil built from A, then polished by Gauss-Newton. Complex
    critical points with small |mu| are discarded by the reality filter.
    """
    A = _as_square(A, "A")
    evs = np.linalg.eigvals(A)
    worst = float(evs.real.max())
    if worst >= 0.0:
        raise NotStable(f"eigenvalue with real part {worst:.3e} >= 0")

    n = A.shape[0]
    Z = np.zeros((n, n))
    At = np.block([[Z, A], [A.conj().T, Z]])
    Bt = np.block([[Z, 1j * np.eye(n)], [-1j * np.eye(n), Z]])
    P = BivariatePencil(At, -Bt, -np.eye(2 * n))
    try:
        rep = _critical_report(P, method, "all2D", seed, **opts)
    except NotBiregular:
        return _beta_by_scan(A)
    positive = [p for p in rep.points
                if _is_real_pair(p.lam, p.mu) and p.mu.real > 0.0]
    if not positive:
        # all real critical points sit on the negative branch; the symmetric
        # partner exists but was lost to filtering, so fall back to the scan
        return _beta_by_scan(A)
    best = min(positive, key=lambda p: p.mu.real)
    cp, _ = gauss_newton_2d(P, best.lam, best.mu, seed=seed)
    return float(cp.mu.real), float(cp.lam.real)


# ---------------------------------------------------------------------------
# parameter values producing multiple eigenvalues

def double_eigenvalue_points(A, B, method: str = "direct", seed: int = 0,
                             **opts) -> list[tuple[complex, complex]]:
    """Values mu for which A + mu*B has a multiple eigenvalue.

    These are exactly the critical points (lam, mu) of the pencil
    A + lam*I + mu*B; the multiple eigenvalue of A + mu*B is -lam. Returned
    as (mu, lam) pairs since mu is usually the quantity of interest, sorted
    by mu and including complex solutions.
    """
    A = _as_square(A, "A")
    B = _as_square(B, "B")
    if A.shape != B.shape:
        raise ValueError("A and B must have matching shapes")
    P = BivariatePencil(A, np.eye(A.shape[0]), B)
    rep = _critical_report(P, method, "all2D", seed, **opts)
    pairs = [(p.mu, p.lam) for p in rep.points]
    pairs.sort(key=lambda t: (t[0].real, t[0].imag, t[1].real, t[1].imag))
    return pairs


# ---------------------------------------------------------------------------
# zero-group-velocity points of quadratic eigenvalue problems

def qep_zgv(L0, L1, L2, M, method: str = "direct", seed: int = 0,
            **opts) -> list[tuple[float, float]]:
    """Real pairs (lam, omega), omega > 0, where the dispersion curve of
    (lam^2 L2 + lam L1 + L0 + omega^2 M) u = 0 has a horizontal tangent.

    The quadratic problem is linearized with the companion-style pencil

        [[L0, L1], [0, -I]] + lam [[0, L2], [I, 0]] + mu [[M, 0], [0, 0]]

    acting on (u, lam*u), with mu = omega^2. Since mu'(lam) = 2*omega*omega',
    every sought point appears among the pencil's stationary points; spurious
    ones with mu = 0 are dropped, and only the nonnegative root omega is kept.
    """
    L0 = _as_square(L0, "L0")
    L1 = _as_square(L1, "L1")
    L2 = _as_square(L2, "L2")
    M = _as_square(M, "M")
    n = L0.shape[0]
    if not (L1.shape == L2.shape == M.shape == (n, n)):
        raise ValueError("all four coefficients must share one shape")
    for name, C in (("L2", L2), ("M", M)):
        if numerical_rank(C, 1e-12) < n:
            raise SingularLeadingCoeff(f"{name} is numerically singular")

    Z = np.zeros((n, n))
    I = np.eye(n)
    Abar = np.block([[L0, L1], [Z, -I]])
    Bbar = np.block([[Z, L2], [I, Z]])
    Cbar = np.block([[M, Z], [Z, Z]])
    P = BivariatePencil(Abar, Bbar, Cbar)
    rep = _critical_report(P, method, "zgv", seed, **opts)

    mu_floor = 1e-8 * (1.0 + spectral_norm(L0) / max(spectral_norm(M), 1e-300))
    out: list[tuple[float, float]] = []
    for p in rep.points:
        if not _is_real_pair(p.lam, p.mu):
            continue
        mu = p.mu.real
        if mu <= mu_floor:
            continue
        out.append((float(p.lam.real), float(np.sqrt(mu))))
    out.sort()
    return out


# ---------------------------------------------------------------------------
# two-parameter Sturm-Liouville problems

def _chebyshev_grid(n: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    """Ascending Chebyshev extreme points on [a, b] and the derivative matrix."""
    N = n - 1
    j = np.arange(n)
    x = np.cos(np.pi * j / N)                      # 1 down to -1
    c = np.ones(n)
    c[0] = c[-1] = 2.0
    c *= (-1.0) ** j
    dX = x[:, None] - x[None, :] + np.eye(n)
    D = np.outer(c, 1.0 / c) / dX
    D -= np.diag(D.sum(axis=1))
    # map x in [-1, 1] descending to t in [a, b] ascending
    t = a + (b - a) * (x[::-1] + 1.0) / 2.0
    D = D[::-1, ::-1] * (2.0 / (b - a))
    return t, D


def _sample(f: Callable[[float], float], nodes: np.ndarray) -> np.ndarray:
    return np.array([float(np.real(f(float(t)))) for t in nodes])


@dataclass
class SturmLiouvilleDiscretization:
    """Collocated form of -(p y')' + q y = (lam r + mu) y with the boundary
    rows of the operator replaced by the boundary functionals.

    A carries the differential operator and the two boundary rows, B the
    weight -diag(r) and C = -I, the latter two with zeroed boundary rows so
    the boundary conditions stay parameter free. `interior_pencil` eliminates
    the boundary unknowns through the boundary rows, yielding an equivalent
    dense pencil of size n - 2 whose mu coefficient is invertible; the
    critical-point pipelines run on that form.
    """

    nodes: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    n: int
    p: Callable = field(repr=False, default=None)
    q: Callable = field(repr=False, default=None)
    r: Callable = field(repr=False, default=None)
    interval: tuple[float, float] = (0.0, 1.0)
    alpha: float = 0.0
    beta: float = 0.0

    def pencil(self) -> BivariatePencil:
        return BivariatePencil(self.A, self.B, self.C)

    def interior_pencil(self) -> BivariatePencil:
        inner = slice(1, self.n - 1)
        R = self.A[[0, self.n - 1], :]
        Rbb = R[:, [0, self.n - 1]]
        Rbi = R[:, inner]
        S = -np.linalg.solve(Rbb, Rbi)             # boundary values from interior
        Ai = self.A[inner, inner] + self.A[inner, [0, self.n - 1]] @ S
        return BivariatePencil(Ai, self.B[inner, inner], self.C[inner, inner])

    def mu_slice_values(self, lam: float, count: int | None = None) -> np.ndarray:
        """Ascending real parts of the mu spectrum at a fixed lam."""
        E = self.interior_pencil().mu_slice(lam)
        vals = np.sort(E.values[E.finite_indices()].real)
        return vals if count is None else vals[:count]


def discretize_sturm_liouville(p: Callable, q: Callable, r: Callable,
                               interval: tuple[float, float],
                               alpha: float, beta: float,
                               n: int) -> SturmLiouvilleDiscretization:
    """Chebyshev collocation of the two-parameter Sturm-Liouville problem.

    Builds A = -(diag(p) D^2 + diag(p') D) + diag(q) on n points, replaces the
    first and last rows by the functionals cos(alpha) y(a) - sin(alpha) p(a)
    y'(a) and its right-end counterpart, and sets B = -diag(r), C = -I with
    zero boundary rows. Eigencurves of A + lam*B + mu*C are then mu_k(lam).
    """
    if n < 8:
        raise ValueError(f"need at least 8 collocation points, got {n}")
    a, b = float(interval[0]), float(interval[1])
    if not b > a:
        raise ValueError("interval must satisfy a < b")
    t, D = _chebyshev_grid(n, a, b)
    pv = _sample(p, t)
    if pv.min() <= 0.0:
        raise InvalidWeight(f"p must be positive on [{a}, {b}], "
                            f"min sampled value {pv.min():.3e}")
    qv = _sample(q, t)
    rv = _sample(r, t)

    A = -(np.diag(pv) @ (D @ D) + np.diag(D @ pv) @ D) + np.diag(qv)
    A[0, :] = np.cos(alpha) * np.eye(n)[0] - np.sin(alpha) * pv[0] * D[0, :]
    A[-1, :] = np.cos(beta) * np.eye(n)[-1] - np.sin(beta) * pv[-1] * D[-1, :]
    B = -np.diag(rv)
    C = -np.eye(n)
    for Mrow in (B, C):
        Mrow[0, :] = 0.0
        Mrow[-1, :] = 0.0
    return SturmLiouvilleDiscretization(
        nodes=t, A=A, B=B, C=C, n=n, p=p, q=q, r=r,
        interval=(a, b), alpha=float(alpha), beta=float(beta))


def mathieu_discretization(n: int) -> SturmLiouvilleDiscretization:
    """Collocation of y'' - 2*lam*cos(2x)*y + mu*y = 0, y'(0) = y'(pi/2) = 0.

    The weight is taken as r(x) = 2*cos(2x); the eigencurves are even in lam,
    so this choice and its negative produce the same critical points.
    """
    return discretize_sturm_liouville(
        p=lambda x: 1.0, q=lambda x: 0.0, r=lambda x: 2.0 * np.cos(2.0 * x),
        interval=(0.0, np.pi / 2), alpha=np.pi / 2, beta=np.pi / 2, n=n)


def sturm_liouville_critical(D: SturmLiouvilleDiscretization,
                             n_refine_sequence: Sequence[int],
                             *, method: str = "projected",
                             seed: int = 0, **opts) -> list[CriticalPoint]:
    """Real stationary points of the eigencurves, sharpened on finer grids.

    A global search on the given discretization collects the real points with
    a horizontal tangent; each is then re-refined by Gauss-Newton on every
    discretization in n_refine_sequence, the previous level seeding the next.
    Refinement doubles as validation: a coarse point that fails to converge,
    lands far from its seed, or stops being a real critical point on a finer
    grid is a discretization artifact and is dropped with a logged warning.
    """
    P0 = D.interior_pencil()
    rep = _critical_report(P0, method, "zgv", seed, **opts)
    points = [p for p in rep.points if _is_real_pair(p.lam, p.mu)]

    for n_fine in n_refine_sequence:
        Df = discretize_sturm_liouville(D.p, D.q, D.r, D.interval,
                                        D.alpha, D.beta, n_fine)
        Pf = Df.interior_pencil()
        refined: list[CriticalPoint] = []
        for p in points:
            try:
                cp, _ = gauss_newton_2d(Pf, p.lam.real, p.mu.real,
                                        seed=seed, max_iter=30)
            except Exception as exc:  # NoConvergence, DivergedIterate, NotCritical
                log.warning("refinement at n=%d lost (%.6g, %.6g): %s",
                            n_fine, p.lam.real, p.mu.real, exc)
                continue
            moved = abs(cp.lam - p.lam) + abs(cp.mu - p.mu)
            if moved > 0.25 * (1.0 + abs(p.lam) + abs(p.mu)):
                log.warning("refinement at n=%d moved (%.6g, %.6g) too far, "
                            "dropping a grid artifact", n_fine,
                            p.lam.real, p.mu.real)
                continue
            if not _is_real_pair(cp.lam, cp.mu):
                continue
            refined.append(cp)
        points = refined
    # separate coarse seeds can converge to the same fine-grid point
    points = dedup_points(points)
    points.sort(key=lambda p: (p.lam.real, p.mu.real))
    return points
