"""Two-parameter eigenvalue problems and their operator determinants.

A two-parameter problem couples two bivariate pencils W1, W2 through shared
parameters (lambda, mu):

    (A1 + lambda B1 + mu C1) x1 = 0,
    (A2 + lambda B2 + mu C2) x2 = 0.

On the tensor product space the problem turns into a coupled pair of
generalized eigenproblems with the operator determinants

    Delta0 = B1 (x) C2 - C1 (x) B2,
    Delta1 = C1 (x) A2 - A1 (x) C2,
    Delta2 = A1 (x) B2 - B1 (x) A2,

where Delta1 z = lambda Delta0 z and Delta2 z = mu Delta0 z. When Delta0 is
nonsingular the two matrices Delta0^{-1} Delta1 and Delta0^{-1} Delta2 commute
and the problem has exactly n1*n2 eigenvalues.

Two constructions matter here: the critical-point problem, which couples a
pencil with a doubled block version of itself so that eigencurve points with
mu'(lambda) = 0 become eigenvalues, and the frequency-shifted pairing of a
pencil with a relative detuning of its lambda coefficient, whose eigenvalues
approximate all 2D points.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .linalg import SingularPencil, gep_solve, kron, spectral_norm, svd
from .pencil import BivariatePencil


class SingularDelta0(Exception):
    """Delta0 is numerically singular: the coupled problem is not regular."""


@dataclass
class TwoParamProblem:
    W1: BivariatePencil
    W2: BivariatePencil

    @property
    def sizes(self) -> tuple[int, int]:
        return self.W1.n, self.W2.n


@dataclass
class DeltaOperators:
    d0: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    d0_singular: bool
    d0_rcond: float


def build_deltas(T: TwoParamProblem, rcond_flag: float = 1e-10) -> DeltaOperators:
    """Operator determinants of a two-parameter problem, with a Delta0 health flag."""
    A1, B1, C1 = T.W1.A, T.W1.B, T.W1.C
    A2, B2, C2 = T.W2.A, T.W2.B, T.W2.C
    d0 = kron(B1, C2) - kron(C1, B2)
    d1 = kron(C1, A2) - kron(A1, C2)
    d2 = kron(A1, B2) - kron(B1, A2)
    s = sla.svdvals(d0)
    rcond = float(s[-1] / s[0]) if s[0] > 0 else 0.0
    return DeltaOperators(d0=d0, d1=d1, d2=d2, d0_singular=rcond <= rcond_flag, d0_rcond=rcond)


def build_zgv_problem(P: BivariatePencil) -> TwoParamProblem:
    """Couple P with its doubled block pencil so critical points become eigenvalues.

    The second pencil acts on [x; z] with blocks

        A2 = [[A, 0], [B, A]],  B2 = [[B, 0], [0, B]],  C2 = [[C, 0], [0, C]],

    whose second block row encodes the derivative condition along an eigencurve.
    The resulting Delta pencil (Delta1, Delta0) is singular by construction with
    normal rank 2n^2 - n for generic pencils.
    """
    n = P.n
    Z = np.zeros((n, n), dtype=np.complex128)
    A2 = np.block([[P.A, Z], [P.B, P.A]])
    B2 = np.block([[P.B, Z], [Z, P.B]])
    C2 = np.block([[P.C, Z], [Z, P.C]])
    return TwoParamProblem(W1=P, W2=BivariatePencil(A2, B2, C2))


def build_detuned_problem(P: BivariatePencil, delta: float) -> TwoParamProblem:
    """Pair P with a copy whose lambda coefficient is scaled by (1 + delta).

    For small delta > 0 the coupled problem is generically regular; its n^2
    eigenvalues split into n spurious solutions near lambda = 0 and n(n-1)
    approximations of the 2D points, with coordinate error O(delta).
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    W2 = BivariatePencil(P.A, (1.0 + delta) * P.B, P.C)
    return TwoParamProblem(W1=P, W2=W2)


@dataclass
class TwoParamEigenpair:
    lam: complex
    mu: complex
    x1: np.ndarray
    x2: np.ndarray
    y1: np.ndarray
    y2: np.ndarray
    mu_valid: bool = True            # False when the Rayleigh denominator collapsed
    cluster_ambiguous: bool = False  # lambda sat in a multiple cluster
    res1: float = 0.0                # ||W1(lam, mu) x1|| / scale1
    res2: float = 0.0


def _null_pair(M: np.ndarray) -> tuple[np.ndarray, np.ndarray, float, float]:
    """Smallest right/left singular vectors and the trailing gap info."""
    r = svd(M)
    x, y = r.null_vectors()
    tie = float(r.s[-2] / r.s[0]) if M.shape[0] >= 2 and r.s[0] > 0 else np.inf
    resid = float(r.s[-1] / r.s[0]) if r.s[0] > 0 else 0.0
    return x, y, resid, tie


def _cluster_indices(values: np.ndarray, tol: float) -> list[np.ndarray]:
    """Group eigenvalues into relative-tolerance clusters (union-find on a sort)."""
    order = np.lexsort((values.imag, values.real))
    groups: list[list[int]] = []
    for idx in order:
        placed = False
        for g in groups:
            ref = values[g[0]]
            if abs(values[idx] - ref) <= tol * (1.0 + abs(ref)):
                g.append(int(idx))
                placed = True
                break
        if not placed:
            groups.append([int(idx)])
    return [np.array(g) for g in groups]


def solve_regular_2ep(
    T: TwoParamProblem,
    cluster_tol: float = 1e-6,
    rcond_gate: float = 1e-12,
    deltas: DeltaOperators | None = None,
    ordqz_limit: int = 600,
    allow_singular_d0: bool = False,
) -> list[TwoParamEigenpair]:
    """All n1*n2 eigenvalues of a regular two-parameter problem.

    lambda comes from the QZ-backed solve of Delta1 z = lambda Delta0 z. For a
    simple lambda, mu is the Rayleigh quotient w^H Delta2 z / w^H Delta0 z with
    the matching left eigenvector w. Clustered lambdas are handled on the
    cluster's invariant subspace: the eigenvector basis when it has full rank
    (semisimple case), otherwise a reordered QZ deflation. Decomposable
    eigenvectors are recovered as the smallest singular vectors of the evaluated
    pencils W1(lam, mu) and W2(lam, mu).

    Raises SingularDelta0 when Delta0 fails the rcond gate. Problems that are
    regular as a pencil family despite a rank-deficient Delta0 (det(Delta1) is
    nonzero but Delta0 is not invertible) can opt in with allow_singular_d0;
    the rank-deficient directions then come back as pairs with infinite lambda
    and mu_valid=False instead of an error.
    """
    if deltas is None:
        deltas = build_deltas(T, rcond_flag=rcond_gate)
    if deltas.d0_rcond <= rcond_gate and not allow_singular_d0:
        raise SingularDelta0(f"Delta0 rcond {deltas.d0_rcond:.2e} below gate {rcond_gate:.2e}")
    d0, d1, d2 = deltas.d0, deltas.d1, deltas.d2
    n1, n2 = T.sizes
    N = n1 * n2

    try:
        E = gep_solve(d1, -d0)
    except SingularPencil as exc:
        raise SingularDelta0(f"coupled pencil is singular: {exc}") from exc
    if np.any(E.infinite) and not allow_singular_d0:
        # regular problems have no infinite lambda; treat as a gate failure
        raise SingularDelta0("coupled solve produced infinite lambda")

    lam_mu: list[tuple[complex, complex, bool, bool]] = []
    norm_d0 = spectral_norm(d0)
    norm_d2 = spectral_norm(d2)

    finite_idx = E.finite_indices()
    for _ in range(int(np.sum(E.infinite))):
        lam_mu.append((complex(np.inf), complex(np.inf), False, False))

    for positions in _cluster_indices(E.values[finite_idx], cluster_tol):
        group = finite_idx[positions]
        if group.size == 1:
            k = int(group[0])
            z = E.right[:, k]
            w = E.left[:, k]
            den = complex(w.conj() @ (d0 @ z))
            num = complex(w.conj() @ (d2 @ z))
            if abs(den) <= 1e-14 * max(norm_d0, 1.0):
                lam_mu.append((complex(E.values[k]), complex(np.inf), False, False))
            else:
                lam_mu.append((complex(E.values[k]), num / den, True, False))
            continue

        lam0 = complex(np.mean(E.values[group]))
        m = group.size
        Zg = E.right[:, group]
        Wg = E.left[:, group]
        sz = sla.svdvals(Zg)
        sw = sla.svdvals(Wg)
        semisimple = sz[-1] > 1e-6 * sz[0] and sw[-1] > 1e-6 * sw[0]
        if not semisimple and N <= ordqz_limit:
            # defective cluster: extract the deflating subspace by reordered QZ
            def want(alpha, beta):
                with np.errstate(divide="ignore", invalid="ignore"):
                    vals = alpha / beta
                ok = np.isfinite(vals)
                ok &= np.abs(vals - lam0) <= cluster_tol * (1.0 + abs(lam0)) + 1e-12
                return ok

            try:
                _, _, alpha, beta, Q, Z = sla.ordqz(d1, d0, sort=want, output="complex")
                Zg = Z[:, :m]
                Wg = Q[:, :m]
            except Exception:
                pass  # fall through to the eigenvector basis
        M2 = Wg.conj().T @ d2 @ Zg
        M0 = Wg.conj().T @ d0 @ Zg
        try:
            mus = sla.eigvals(M2, M0)
        except Exception:
            mus = np.full(m, np.inf + 0j)
        for mu in mus:
            valid = bool(np.isfinite(mu))
            lam_mu.append((lam0, complex(mu) if valid else complex(np.inf), valid, True))

    # recover decomposable vectors and residual diagnostics
    out: list[TwoParamEigenpair] = []
    for lam, mu, valid, ambiguous in lam_mu:
        if valid:
            M1 = T.W1.evaluate(lam, mu)
            M2m = T.W2.evaluate(lam, mu)
            x1, y1, r1, tie1 = _null_pair(M1)
            x2, y2, r2, tie2 = _null_pair(M2m)
            ambiguous = ambiguous or tie1 < 1e-8 or tie2 < 1e-8
        else:
            x1 = np.zeros(n1, dtype=np.complex128)
            y1 = np.zeros(n1, dtype=np.complex128)
            x2 = np.zeros(n2, dtype=np.complex128)
            y2 = np.zeros(n2, dtype=np.complex128)
            r1 = r2 = np.inf
        out.append(TwoParamEigenpair(
            lam=lam, mu=mu, x1=x1, x2=x2, y1=y1, y2=y2,
            mu_valid=valid, cluster_ambiguous=ambiguous, res1=r1, res2=r2,
        ))
    out.sort(key=lambda p: (p.lam.real, p.lam.imag, p.mu.real, p.mu.imag))
    return out
