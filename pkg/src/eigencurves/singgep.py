"""Finite eigenvalues of singular matrix pencils by randomized rank projection.

A singular pencil D1 - lambda*D0 (identically singular determinant) still has
well-defined finite eigenvalues: the points where the rank drops below the
normal rank k. Projecting with random unitary bases W, Z of k columns turns the
problem into a regular k x k pencil whose spectrum contains the true
eigenvalues plus arbitrary junk from the singular part. The junk is filtered by
three quantities per candidate:

    alpha = || W_perp^H (D1 - lambda D0) Z x ||   (right escape residual)
    beta  = || y^H W^H (D1 - lambda D0) Z_perp || (left escape residual)
    gamma = | y^H W^H D0 Z x | / sqrt(1 + |lambda|^2)

True eigenvalues have alpha, beta at roundoff level and gamma bounded away
from zero; for junk at least one condition fails with overwhelming
probability.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    SingularPencil,
    gep_solve,
    haar_unitary,
    numerical_rank,
    spectral_norm,
)


class ProjectedPencilSingular(Exception):
    """The projected pencil came out singular; wrong normal rank or bad draw."""


@dataclass
class FilteredEigenvalue:
    lam: complex
    alpha: float
    beta: float
    gamma: float
    accepted: bool
    infinite: bool = False

    def normalized(self, norm_d1: float, norm_d0: float) -> tuple[float, float, float]:
        """(alpha~, beta~, gamma~): residuals relative to the pencil scale."""
        if self.infinite:
            return np.inf, np.inf, 0.0
        s = norm_d1 + abs(self.lam) * norm_d0
        return self.alpha / s, self.beta / s, self.gamma


def normal_rank_estimate(
    d1: np.ndarray,
    d0: np.ndarray,
    trials: int = 3,
    seed: int = 0,
    rel_tol: float = 1e-10,
    expected: int | None = None,
) -> int:
    """max rank of D1 - xi*D0 over random xi samples.

    When `expected` is given and one sample already reaches it, further samples
    are skipped (the normal rank can never exceed the generic bound for these
    structured pencils, so hitting it certifies the estimate).
    """
    rng = np.random.default_rng(seed)
    scale = spectral_norm(d1) / max(spectral_norm(d0), 1e-300)
    best = 0
    for _ in range(max(trials, 1)):
        xi = scale * (rng.standard_normal() + 1j * rng.standard_normal())
        best = max(best, numerical_rank(d1 - xi * d0, rel_tol))
        if expected is not None and best >= expected:
            return best
    return best


def singular_gep_eigenvalues(
    d1: np.ndarray,
    d0: np.ndarray,
    nrank: int,
    delta1: float = 1e-8,
    delta2: float = 1e-10,
    seed: int = 0,
    max_retries: int = 2,
) -> list[FilteredEigenvalue]:
    """Candidate finite eigenvalues of the singular pencil (d1, d0), filtered.

    Returns every eigenvalue of one random projection together with its filter
    data, sorted by (Re, Im); callers read the `accepted` flag. A projected
    pencil that is itself singular triggers a redraw, then
    ProjectedPencilSingular.
    """
    N = d1.shape[0]
    if not (0 < nrank <= N):
        raise ValueError(f"nrank must be in 1..{N}")
    norm_d1 = spectral_norm(d1)
    norm_d0 = spectral_norm(d0)
    rng = np.random.default_rng(seed)

    last_exc: Exception | None = None
    for _ in range(max_retries + 1):
        WU = haar_unitary(N, rng)
        ZU = haar_unitary(N, rng)
        W, Wp = WU[:, :nrank], WU[:, nrank:]
        Z, Zp = ZU[:, :nrank], ZU[:, nrank:]
        P = W.conj().T @ d1 @ Z
        Q = W.conj().T @ d0 @ Z
        try:
            E = gep_solve(P, -Q)  # eigenvalues of P z = lam Q z
        except SingularPencil as exc:
            last_exc = exc
            continue

        out: list[FilteredEigenvalue] = []
        d1Z = d1 @ Z
        d0Z = d0 @ Z
        Wpd1 = Wp.conj().T @ d1Z if Wp.shape[1] else np.zeros((0, nrank))
        Wpd0 = Wp.conj().T @ d0Z if Wp.shape[1] else np.zeros((0, nrank))
        Wd1Zp = W.conj().T @ d1 @ Zp if Zp.shape[1] else np.zeros((nrank, 0))
        Wd0Zp = W.conj().T @ d0 @ Zp if Zp.shape[1] else np.zeros((nrank, 0))

        for k in range(E.count):
            if E.infinite[k]:
                out.append(FilteredEigenvalue(
                    lam=complex(np.inf), alpha=np.inf, beta=np.inf, gamma=0.0,
                    accepted=False, infinite=True,
                ))
                continue
            lam = complex(E.values[k])
            x = E.right[:, k]
            y = E.left[:, k]
            alpha = float(np.linalg.norm((Wpd1 - lam * Wpd0) @ x))
            beta = float(np.linalg.norm(y.conj() @ (Wd1Zp - lam * Wd0Zp)))
            gamma = float(abs(y.conj() @ Q @ x) / np.sqrt(1.0 + abs(lam) ** 2))
            thresh = delta1 * (norm_d1 + abs(lam) * norm_d0)
            accepted = max(alpha, beta) < thresh and gamma > delta2
            out.append(FilteredEigenvalue(
                lam=lam, alpha=alpha, beta=beta, gamma=gamma, accepted=accepted,
            ))
        out.sort(key=lambda f: (f.infinite, f.lam.real if not f.infinite else 0.0,
                                f.lam.imag if not f.infinite else 0.0))
        return out

    raise ProjectedPencilSingular(
        f"projection stayed singular after {max_retries + 1} draws: {last_exc}"
    )
