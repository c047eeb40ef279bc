"""Dense linear algebra kernel: generalized eigenproblems, SVD, ranks, seeded unitaries.

Everything works on complex128 matrices at desk scale (n up to a few thousand).
Eigenvalue routines are QZ-backed and return left and right eigenvectors together
with explicit flags for infinite eigenvalues, so callers never have to interpret
inf/nan placeholders.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla


class SingularPencil(Exception):
    """The pencil P + xi*Q has identically zero determinant (or Q = 0)."""


def as_complex_matrix(M, name: str = "matrix") -> np.ndarray:
    """Validate and convert input to a square complex128 array."""
    A = np.asarray(M, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"{name} must be square, got shape {A.shape}")
    if not np.all(np.isfinite(A.view(np.float64))):
        raise ValueError(f"{name} contains non-finite entries")
    return A


def kron(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Kronecker product, ordered so that kron(A, B) acts on x1 (x) x2."""
    return np.kron(np.asarray(A, dtype=np.complex128), np.asarray(B, dtype=np.complex128))


def spectral_norm(M: np.ndarray, iters: int = 40) -> float:
    """2-norm estimate by power iteration on M^H M.

    Deterministic (fixed starting vector). Accurate to a few percent, which is
    all the acceptance thresholds need; exact for our small test matrices.
    """
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    n = M.shape[1]
    v = np.ones(n, dtype=np.complex128)
    v += 1e-3 * np.arange(n)  # break symmetry against adverse null spaces
    v /= np.linalg.norm(v)
    s = 0.0
    for _ in range(iters):
        w = M @ v
        s = np.linalg.norm(w)
        if s == 0.0:
            return 0.0
        v = M.conj().T @ w
        nv = np.linalg.norm(v)
        if nv == 0.0:
            return float(s)
        v /= nv
    return float(np.linalg.norm(M @ v))


@dataclass
class SvdResult:
    """Full SVD M = U @ diag(s) @ V^H with s descending."""

    U: np.ndarray
    s: np.ndarray
    V: np.ndarray

    def null_vectors(self) -> tuple[np.ndarray, np.ndarray]:
        """Right and left singular vectors for the smallest singular value."""
        return self.V[:, -1], self.U[:, -1]


def svd(M: np.ndarray) -> SvdResult:
    U, s, Vh = sla.svd(np.asarray(M, dtype=np.complex128))
    return SvdResult(U=U, s=s, V=Vh.conj().T)


def numerical_rank(M: np.ndarray, rel_tol: float = 1e-10) -> int:
    """Number of singular values above rel_tol times the largest one."""
    s = sla.svdvals(np.asarray(M, dtype=np.complex128))
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > rel_tol * s[0]))


def haar_unitary(size: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary drawn from an existing generator."""
    G = (rng.standard_normal((size, size)) + 1j * rng.standard_normal((size, size)))
    G /= np.sqrt(2.0)
    Q, R = np.linalg.qr(G)
    d = np.diag(R)
    # phase correction makes the QR-based draw exactly Haar
    Q = Q * (d / np.abs(d))
    return Q


def random_unitary(size: int, seed: int) -> np.ndarray:
    """Seeded Haar-distributed unitary; bitwise reproducible per (size, seed)."""
    if size < 1:
        raise ValueError("size must be positive")
    return haar_unitary(size, np.random.default_rng(seed))


@dataclass
class EigentripleSet:
    """Aligned eigenvalues and unit-norm right/left eigenvectors of P + xi*Q.

    values[k] is meaningful only when infinite[k] is False; infinite eigenvalues
    keep their (normalized) eigenvectors but values[k] holds inf.
    """

    values: np.ndarray      # complex, shape (m,)
    infinite: np.ndarray    # bool, shape (m,)
    right: np.ndarray       # (n, m), unit columns
    left: np.ndarray        # (n, m), unit columns, left[k]^H (P + values[k] Q) = 0

    @property
    def count(self) -> int:
        return self.values.shape[0]

    def finite_indices(self) -> np.ndarray:
        return np.flatnonzero(~self.infinite)


def _pencil_is_singular(P: np.ndarray, Q: np.ndarray, rel_tol: float = 1e-10) -> bool:
    """Sample det(P + xi*Q) at a few spread-out points via sigma_min."""
    rng = np.random.default_rng(1234)
    scale = max(spectral_norm(P), spectral_norm(Q), 1e-300)
    for _ in range(3):
        xi = (rng.standard_normal() + 1j * rng.standard_normal())
        M = P + xi * Q
        s = sla.svdvals(M)
        if s[0] > 0 and s[-1] > rel_tol * max(s[0], scale):
            return False
    return True


def gep_solve(P: np.ndarray, Q: np.ndarray) -> EigentripleSet:
    """All eigenvalues of the pencil P + xi*Q with right and left eigenvectors.

    Eigenvalues xi satisfy (P + xi Q) x = 0 and y^H (P + xi Q) = 0. Infinite
    eigenvalues (beta ~ 0 in the QZ sense) are flagged, not silently dropped.
    Raises SingularPencil when Q is the zero matrix or det(P + xi Q) vanishes
    identically.
    """
    P = as_complex_matrix(P, "P")
    Q = as_complex_matrix(Q, "Q")
    if P.shape != Q.shape:
        raise ValueError("P and Q must have equal shapes")
    normQ = spectral_norm(Q)
    normP = spectral_norm(P)
    if normQ == 0.0:
        raise SingularPencil("Q is the zero matrix; pencil has no finite eigenvalues")

    (alpha, beta), vl, vr = sla.eig(P, -Q, left=True, right=True, homogeneous_eigvals=True)

    eps = np.finfo(np.float64).eps
    infinite = np.abs(beta) <= eps * max(normQ, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        values = alpha / beta
    bad = ~np.isfinite(values)
    infinite |= bad
    values = np.where(infinite, np.complex128(np.inf), values)

    indeterminate = (np.abs(alpha) <= eps * max(normP, 1.0)) & (np.abs(beta) <= eps * max(normQ, 1.0))
    if np.any(indeterminate) and _pencil_is_singular(P, Q):
        raise SingularPencil("det(P + xi*Q) vanishes identically within tolerance")

    def unit_columns(V: np.ndarray) -> np.ndarray:
        norms = np.linalg.norm(V, axis=0)
        norms[norms == 0.0] = 1.0
        return V / norms

    return EigentripleSet(
        values=values,
        infinite=infinite,
        right=unit_columns(vr),
        left=unit_columns(vl),
    )
