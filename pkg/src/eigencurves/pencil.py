"""Bivariate matrix pencils A + lambda*B + mu*C and their one-parameter slices.

The pencil is the central object: its eigencurves are the solution set of
det(A + lambda*B + mu*C) = 0, and everything downstream (critical point
searches, refinement, applications) works through the slice eigenproblems
defined here.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    EigentripleSet,
    SingularPencil,
    as_complex_matrix,
    gep_solve,
    numerical_rank,
    spectral_norm,
)


@dataclass
class BivariatePencil:
    """Square matrix triple (A, B, C) representing A + lambda*B + mu*C."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    _norms: tuple[float, float, float] | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.A = as_complex_matrix(self.A, "A")
        self.B = as_complex_matrix(self.B, "B")
        self.C = as_complex_matrix(self.C, "C")
        if not (self.A.shape == self.B.shape == self.C.shape):
            raise ValueError("A, B, C must share one square shape")

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def norms(self) -> tuple[float, float, float]:
        if self._norms is None:
            self._norms = (spectral_norm(self.A), spectral_norm(self.B), spectral_norm(self.C))
        return self._norms

    def scale_at(self, lam: complex, mu: complex) -> float:
        na, nb, nc = self.norms()
        return na + abs(lam) * nb + abs(mu) * nc

    def evaluate(self, lam: complex, mu: complex) -> np.ndarray:
        return self.A + lam * self.B + mu * self.C

    def mu_slice(self, lam0: complex) -> EigentripleSet:
        """Eigentriples of (A + lam0*B) + mu*C; eigenvalues are the mu values."""
        return gep_solve(self.A + lam0 * self.B, self.C)

    def lambda_slice(self, mu0: complex) -> EigentripleSet:
        """Eigentriples of (A + mu0*C) + lambda*B; eigenvalues are the lambda values."""
        return gep_solve(self.A + mu0 * self.C, self.B)


def is_biregular_probe(P: BivariatePencil, trials: int = 3, seed: int = 0) -> bool:
    """Probabilistic check that both slice families are regular pencils.

    Solves mu- and lambda-slices at random complex parameter values; a single
    SingularPencil hit or an all-infinite spectrum reports failure. Passing the
    probe does not certify biregularity, but a biregular pencil passes with
    probability one.
    """
    rng = np.random.default_rng(seed)
    na, nb, nc = P.norms()
    lam_scale = 1.0 + na / max(nb + nc, 1e-300)
    for _ in range(trials):
        lam0 = lam_scale * (rng.standard_normal() + 1j * rng.standard_normal())
        mu0 = lam_scale * (rng.standard_normal() + 1j * rng.standard_normal())
        try:
            E_mu = P.mu_slice(lam0)
            E_lam = P.lambda_slice(mu0)
        except SingularPencil:
            return False
        if not np.any(~E_mu.infinite) or not np.any(~E_lam.infinite):
            return False
    return True


def repeated_curve_probe(P: BivariatePencil, seed: int = 0, rel_tol: float = 1e-8) -> bool:
    """True when the finite eigencurves appear with multiplicity at a random slice.

    det(A + lambda*B + mu*C) having a square factor makes every curve point a
    multiple eigenvalue; the global pipelines cannot separate such coinciding
    curves. A random slice of an honest pencil has distinct finite eigenvalues,
    so a repeated value at a random parameter flags the degenerate case.
    """
    rng = np.random.default_rng(seed)
    na, nb, nc = P.norms()
    lam_scale = 1.0 + na / max(nb + nc, 1e-300)
    lam0 = lam_scale * (rng.standard_normal() + 1j * rng.standard_normal())
    E = P.mu_slice(lam0)
    vals = E.values[~E.infinite]
    if vals.size < 2:
        return False
    scale = 1.0 + np.max(np.abs(vals))
    vs = np.sort_complex(vals)
    gaps = np.abs(np.diff(vs))
    return bool(np.any(gaps <= rel_tol * scale))


@dataclass
class MultiplicityEstimate:
    algebraic: int
    geometric: int
    members: np.ndarray  # indices into the eigentriple set forming the cluster


def estimate_multiplicity(
    E: EigentripleSet,
    target_index: int,
    cluster_tol: float = 1e-6,
    rank_tol: float | None = None,
) -> MultiplicityEstimate:
    """Algebraic/geometric multiplicity of one finite eigenvalue in a triple set.

    Algebraic multiplicity is the size of the relative cluster around the target
    value; geometric multiplicity is the numerical rank of the clustered right
    eigenvectors. rank_tol defaults to 1e-8 but callers working with points known
    only to lower accuracy should widen it to the expected eigenvalue splitting
    (QZ splits a defective pair by about the square root of the backward error,
    and the eigenvectors of the split pair differ by the same order).
    """
    if E.infinite[target_index]:
        raise ValueError("target eigenvalue is infinite")
    t = E.values[target_index]
    finite = E.finite_indices()
    vals = E.values[finite]
    members = finite[np.abs(vals - t) <= cluster_tol * (1.0 + abs(t))]
    algebraic = int(members.size)
    X = E.right[:, members]
    if rank_tol is None:
        rank_tol = 1e-8
    geometric = max(1, numerical_rank(X, rank_tol)) if algebraic > 0 else 0
    return MultiplicityEstimate(algebraic=algebraic, geometric=geometric, members=members)


@dataclass
class EigencurveSamples:
    """Slice spectra tabulated over a real lambda grid, ready for CSV or plots."""

    lambdas: np.ndarray           # (m,) real grid
    real_mu: list[np.ndarray]     # per grid point, sorted finite real mu values
    all_mu: list[np.ndarray]      # per grid point, every finite mu (complex)
    n: int

    def real_table(self) -> list[list[float | None]]:
        """Rows [lambda, mu_1..mu_n]; None pads entries with no real mu."""
        rows = []
        for lam, mus in zip(self.lambdas, self.real_mu):
            row: list[float | None] = [float(lam)]
            row.extend(float(m) for m in mus)
            row.extend([None] * (self.n - len(mus)))
            rows.append(row)
        return rows


def sample_eigencurves(
    P: BivariatePencil,
    lambda_grid,
    real_tol: float = 1e-8,
) -> EigencurveSamples:
    """Evaluate all mu-slice eigenvalues along a real lambda grid.

    A mu value counts as real when |Im mu| <= real_tol * (1 + |Re mu|).
    """
    grid = np.asarray(lambda_grid, dtype=np.float64)
    real_mu: list[np.ndarray] = []
    all_mu: list[np.ndarray] = []
    for lam in grid:
        E = P.mu_slice(complex(lam))
        mus = E.values[~E.infinite]
        all_mu.append(np.sort_complex(mus))
        re = mus[np.abs(mus.imag) <= real_tol * (1.0 + np.abs(mus.real))].real
        real_mu.append(np.sort(re))
    return EigencurveSamples(lambdas=grid, real_mu=real_mu, all_mu=all_mu, n=P.n)
