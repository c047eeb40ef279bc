"""Local refinement of critical points.

The global pipelines locate critical points up to solver accuracy; this module
polishes individual points to full precision and provides an independent cheap
source of starting guesses. The stationarity conditions

    (A + lambda B + mu C) x = 0
    y^H (A + lambda B + mu C) = 0
    y^H B x = 0

together with two affine normalizations form a zero-residual overdetermined
system once y is replaced by w = conj(y), and a plain Gauss-Newton iteration
on it converges quadratically at simple critical points. Starting guesses come
either from the caller, from the singular vectors of the pencil value, or from
a detuned coupled problem: pairing the pencil with a copy whose lambda
coefficient is scaled by (1 + delta) turns the curve continuum into a finite
regular eigenvalue set whose points sit within O(delta) of the critical
points, at the cost of n spurious solutions near lambda = 0.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .linalg import svd
from .pencil import BivariatePencil
from .points import (
    KIND_ZGV,
    CriticalPoint,
    NotCritical,
    NotOnCurve,
    PipelineReport,
    RejectedCandidate,
    _canon_mode,
    _require_biregular,
    classify_point,
    dedup_points,
)
from .twopar import (
    SingularDelta0,
    TwoParamEigenpair,
    build_detuned_problem,
    solve_regular_2ep,
)


class NoConvergence(Exception):
    """Iteration budget exhausted; the partial state rides on the exception."""

    def __init__(self, message: str, state: "GaussNewtonState"):
        super().__init__(message)
        self.state = state


class DivergedIterate(Exception):
    def __init__(self, message: str, state: "GaussNewtonState"):
        super().__init__(message)
        self.state = state


@dataclass
class GaussNewtonState:
    """Iterate of the stationarity solve, with its convergence history.

    w holds the conjugated left eigenvector, so all residual rows are complex
    differentiable in the unknowns. trace records (residual_norm, step_norm)
    per iteration; jac_sigma_min/max are taken at the last assembled Jacobian.
    """

    lam: complex
    mu: complex
    x: np.ndarray
    w: np.ndarray
    a: np.ndarray
    b: np.ndarray
    iteration: int = 0
    residual_norm: float = np.inf
    step_norm: float = np.inf
    trace: list[tuple[float, float]] = field(default_factory=list)
    jac_sigma_min: float = 0.0
    jac_sigma_max: float = 0.0
    converged: bool = False
    # lowest-residual iterate seen; survives a later blow-up of the iteration
    best_lam: complex = 0j
    best_mu: complex = 0j
    best_residual: float = np.inf

    @property
    def residual_norms(self) -> list[float]:
        return [r for r, _ in self.trace]

    @property
    def step_norms(self) -> list[float]:
        return [s for _, s in self.trace]


@dataclass(frozen=True)
class MfrdCandidate:
    """One eigenvalue of the detuned coupled problem.

    suspected_spurious marks the near-zero-lambda family: at lambda = 0 the
    detuning has no effect and the two coupled equations coincide, so the n
    eigenvalues of (A + mu C) x = 0 always show up as solutions.
    """

    lam: complex
    mu: complex
    source_eigenpair: TwoParamEigenpair
    suspected_spurious: bool


def init_vectors_svd(
    P: BivariatePencil, lam0: complex, mu0: complex, seed: int = 0
) -> tuple[np.ndarray, np.ndarray]:
    """Starting eigenvectors from the SVD of the pencil value at (lam0, mu0).

    Generically the smallest singular pair is the right choice. When the two
    smallest singular values both drop away from the rest the kernel is
    (numerically) two-dimensional, which suggests a crossing of two curve
    branches; then a seeded random unit combination of the last two right
    singular vectors is used, and the left combination is chosen so that
    y0^H B x0 = 0 exactly, matching the stationarity conditions.
    """
    S = svd(P.evaluate(lam0, mu0))
    n = P.n
    s = S.s
    # take the two-dimensional branch when the kernel looks two-dimensional:
    # sigma_{n-1} far below sigma_{n-2}, or comparable to sigma_n while both
    # drop away from the rest. Candidates from the detuned problem sit exactly
    # on one curve (sigma_n ~ 0 there), displaced along it, so near an
    # intersection only sigma_{n-1} carries the distance to the second branch;
    # 2e-2 covers displacements of order delta while staying well below the
    # O(1) ratios seen at stationary-point candidates
    if n >= 3:
        two_dim = (s[n - 2] <= 2e-2 * s[n - 3]
                   or (s[n - 2] <= 10 * s[n - 1] and s[n - 2] <= 1e-1 * s[n - 3]))
    elif n == 2:
        two_dim = s[0] <= 10 * s[1] and s[0] <= 1e-1 * P.scale_at(lam0, mu0)
    else:
        two_dim = False
    if not two_dim:
        return S.V[:, -1].copy(), S.U[:, -1].copy()

    rng = np.random.default_rng(seed)
    c = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    c /= np.linalg.norm(c)
    x0 = S.V[:, -2:] @ c
    # y0 = U[:, -2:] @ d with d orthogonal to g makes y0^H B x0 vanish
    g = S.U[:, -2:].conj().T @ (P.B @ x0)
    if np.linalg.norm(g) <= 1e-14 * np.linalg.norm(P.B):
        d = np.array([1.0, 0.0], dtype=complex)
    else:
        d = np.array([-np.conj(g[1]), np.conj(g[0])])
        d /= np.linalg.norm(d)
    y0 = S.U[:, -2:] @ d
    return x0, y0


def _estimate_order(residuals: list[float], floor: float = 1e-13) -> float:
    """Convergence order from the last three residuals above the floor."""
    rs = [r for r in residuals if r > floor]
    if len(rs) < 3:
        return float("nan")
    r2, r1, r0 = rs[-3], rs[-2], rs[-1]
    den = np.log(r1 / r2)
    if den == 0:
        return float("nan")
    return float(np.log(r0 / r1) / den)


def gauss_newton_2d(
    P: BivariatePencil,
    lam0: complex,
    mu0: complex,
    x0: np.ndarray | None = None,
    y0: np.ndarray | None = None,
    a: np.ndarray | None = None,
    b: np.ndarray | None = None,
    *,
    max_iter: int = 50,
    res_tol: float = 1e-12,
    step_tol: float = 1e-14,
    seed: int = 0,
) -> tuple[CriticalPoint, GaussNewtonState]:
    """Polish one critical point by Gauss-Newton on the stationarity system.

    The unknowns are (x, w, lambda, mu) with w the conjugated left eigenvector;
    the residual stacks the right and transposed eigenvalue equations, the
    stationarity scalar w^T B x and the two normalizations a^H x = 1,
    b^H w = 1. Each step solves the (2n+3) x (2n+2) least squares problem by a
    truncated-SVD pseudoinverse (cut at 1e-12 of the largest singular value),
    which keeps steps finite when the Jacobian is rank deficient, as happens
    at points that are not simple stationary points of a single branch.

    Missing start vectors come from init_vectors_svd; missing normalization
    vectors default to the start vectors themselves, which guarantees nonzero
    overlap. Stops on residual below res_tol times the pencil scale, on step
    below step_tol, or with NoConvergence / DivergedIterate carrying the
    state. The converged point is reclassified from scratch, so a false
    convergence to a non-critical spot raises NotOnCurve or NotCritical.
    """
    if x0 is None or y0 is None:
        x0, y0 = init_vectors_svd(P, lam0, mu0, seed=seed)
    x = np.asarray(x0, dtype=complex).copy()
    w = np.asarray(y0, dtype=complex).conj()
    n = P.n
    if a is None:
        a = x / (np.linalg.norm(x) ** 2)  # makes a^H x = 1 at the start
    if b is None:
        b = w / (np.linalg.norm(w) ** 2)
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    sa = a.conj() @ x
    sb = b.conj() @ w
    if abs(sa) < 1e-14 or abs(sb) < 1e-14:
        raise ValueError("normalization vectors are orthogonal to the start vectors")
    x = x / sa
    w = w / sb

    lam = complex(lam0)
    mu = complex(mu0)
    Bt = P.B.T
    Ct = P.C.T
    st = GaussNewtonState(lam=lam, mu=mu, x=x, w=w, a=a, b=b)
    res0 = None
    for k in range(max_iter):
        W = P.evaluate(lam, mu)
        F = np.concatenate([
            W @ x,
            W.T @ w,
            [w @ (P.B @ x)],
            [a.conj() @ x - 1.0],
            [b.conj() @ w - 1.0],
        ])
        resnorm = float(np.linalg.norm(F))
        scale = P.scale_at(lam, mu)
        if res0 is None:
            res0 = max(resnorm, 1e-300)
        if resnorm < st.best_residual:
            st.best_lam, st.best_mu, st.best_residual = lam, mu, resnorm

        J = np.zeros((2 * n + 3, 2 * n + 2), dtype=complex)
        J[:n, :n] = W
        J[:n, 2 * n] = P.B @ x
        J[:n, 2 * n + 1] = P.C @ x
        J[n:2 * n, n:2 * n] = W.T
        J[n:2 * n, 2 * n] = Bt @ w
        J[n:2 * n, 2 * n + 1] = Ct @ w
        J[2 * n, :n] = w @ P.B
        J[2 * n, n:2 * n] = x @ Bt
        J[2 * n + 1, :n] = a.conj()
        J[2 * n + 2, n:2 * n] = b.conj()

        Ju, Js, Jvh = np.linalg.svd(J, full_matrices=False)
        st.jac_sigma_max = float(Js[0])
        st.jac_sigma_min = float(Js[-1])
        st.lam, st.mu, st.x, st.w = lam, mu, x, w
        st.iteration = k
        st.residual_norm = resnorm

        if resnorm > 1e6 * res0:
            st.trace.append((resnorm, np.inf))
            raise DivergedIterate(
                f"residual grew to {resnorm:.3e} from {res0:.3e}", st)

        keep = Js > 1e-12 * Js[0]
        ds = -(Jvh.conj().T[:, keep] @ ((Ju[:, keep].conj().T @ F) / Js[keep]))
        stepnorm = float(np.linalg.norm(ds))
        st.trace.append((resnorm, stepnorm))
        st.step_norm = stepnorm

        if resnorm <= res_tol * scale:
            # converged; apply the already-computed correction as a final
            # polish unless the rank-deficient directions made it wild
            if stepnorm <= 1e-3 * (1 + abs(lam) + abs(mu)):
                lam, mu = lam + ds[2 * n], mu + ds[2 * n + 1]
                x, w = x + ds[:n], w + ds[n:2 * n]
                st.lam, st.mu, st.x, st.w = lam, mu, x, w
            st.converged = True
            break

        x = x + ds[:n]
        w = w + ds[n:2 * n]
        lam = lam + ds[2 * n]
        mu = mu + ds[2 * n + 1]
        st.lam, st.mu, st.x, st.w = lam, mu, x, w

        if stepnorm <= step_tol:
            st.converged = True
            break
    if not st.converged:
        raise NoConvergence(
            f"no convergence in {max_iter} iterations "
            f"(last residual {st.residual_norm:.3e})", st)

    cp = classify_point(P, st.lam, st.mu, method="gauss-newton")
    return cp, st


def mfrd_candidates(
    P: BivariatePencil,
    delta: float = 1e-2,
    *,
    spurious_tol: float | None = None,
    cluster_tol: float = 1e-6,
) -> list[MfrdCandidate]:
    """Candidate critical points from the detuned coupled problem.

    Pairs the pencil with a copy whose lambda coefficient carries the factor
    (1 + delta) and solves the resulting regular coupled problem. Its n^2
    eigenvalues consist of n spurious pairs with lambda near zero plus
    approximations of the critical points with coordinate error of order
    delta. Too small a delta leaves the coupled operator nearly singular;
    delta = 0 makes the two equations identical and is rejected outright.
    """
    if delta <= 0:
        raise SingularDelta0(
            "the detuned problem needs delta > 0; at delta = 0 the coupled "
            "pencil is singular")
    if spurious_tol is None:
        spurious_tol = max(delta * 1e-2, 1e-8)
    pairs = solve_regular_2ep(build_detuned_problem(P, delta),
                              cluster_tol=cluster_tol)
    out = [MfrdCandidate(lam=p.lam, mu=p.mu, source_eigenpair=p,
                         suspected_spurious=abs(p.lam) <= spurious_tol)
           for p in pairs if p.mu_valid and np.isfinite(p.lam) and np.isfinite(p.mu)]
    out.sort(key=lambda c: (c.lam.real, c.lam.imag, c.mu.real, c.mu.imag))
    return out


def mfrd_refine_all(
    P: BivariatePencil,
    delta: float = 1e-2,
    mode: str = "all2D",
    seed: int = 0,
    *,
    max_iter: int = 50,
    res_tol: float = 1e-12,
    step_tol: float = 1e-14,
    dedup_tol: float = 1e-8,
) -> PipelineReport:
    """Global critical-point search by detuning plus Gauss-Newton polish.

    Every candidate from the detuned problem is refined, the suspected
    spurious ones included: a genuine critical point with lambda near zero
    (trivial families of symmetric problems live there) is indistinguishable
    from a spurious pair before refinement. Spurious candidates whose
    refinement fails are dropped silently; failures of regular candidates are
    recorded. Refinements run concurrently; assembly order is deterministic.
    """
    mode = _canon_mode(mode)
    _require_biregular(P, seed)
    cands = mfrd_candidates(P, delta)

    def polish(item: tuple[int, MfrdCandidate]):
        i, c = item
        try:
            cp, st = gauss_newton_2d(P, c.lam, c.mu, seed=seed + i,
                                     max_iter=max_iter, res_tol=res_tol,
                                     step_tol=step_tol)
            return replace(cp, method="mfrd"), None
        except (NotOnCurve, NotCritical) as exc:
            return None, str(exc)
        except (NoConvergence, DivergedIterate) as exc:
            st = exc.state
            # an iteration that passed close to a solution before failing
            # (typical at curve intersections, where the Jacobian is singular
            # in the limit) still pins the coordinates down; accept the best
            # iterate if it classifies as a critical point on its own
            if st.best_residual <= 1e-6 * P.scale_at(st.best_lam, st.best_mu):
                try:
                    cp = classify_point(P, st.best_lam, st.best_mu, method="mfrd")
                    return cp, None
                except (NotOnCurve, NotCritical):
                    pass
            return None, str(exc)

    workers = min(8, max(1, len(cands)))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(polish, enumerate(cands)))

    points: list[CriticalPoint] = []
    rejected: list[RejectedCandidate] = []
    notes: list[str] = []
    dropped_spurious = 0
    for c, (cp, err) in zip(cands, results):
        if cp is None:
            if c.suspected_spurious:
                dropped_spurious += 1
            else:
                rejected.append(RejectedCandidate(c.lam, c.mu, err))
            continue
        if mode == "ZGV" and cp.kind != KIND_ZGV:
            rejected.append(RejectedCandidate(
                cp.lam, cp.mu, f"kind {cp.kind} excluded in ZGV mode"))
            continue
        points.append(cp)
    if dropped_spurious:
        notes.append(f"{dropped_spurious} spurious candidates did not refine "
                     "to critical points")
    points = dedup_points(points, tol=dedup_tol)
    return PipelineReport(
        method="mfrd", mode=mode, seed=seed,
        thresholds={"delta": delta, "res_tol": res_tol, "step_tol": step_tol,
                    "dedup_tol": dedup_tol},
        points=points, rejected=rejected, nrank=None,
        candidates=list(cands), notes=notes)
