"""Critical points of eigencurves: classification and the two global pipelines.

A critical point of the eigencurves of A + lambda*B + mu*C is a pair
(lambda0, mu0) where the evaluated pencil W = A + lambda0*B + mu0*C is singular
with left/right null vectors y, x satisfying y^H B x = 0. Kinds:

    ZGV     stationary point of a single analytic branch mu(lambda)
            (lambda0 defective in the mu0-slice, y^H C x != 0, mu0 simple)
    TwoD_a  same algebraic pattern when the mu0-simplicity test is inconclusive
    TwoD_b  as ZGV but y^H C x = 0 (stationary in both directions)
    TwoD_c  kernel dimension >= 2 with extra algebraic multiplicity
    TwoD_d  semisimple multiple point: transversal curve intersection

Two search pipelines: `critical_points_direct` extracts the lambda coordinates
from a singular pencil built on a doubled problem, then scans mu-slices;
`critical_points_projected` compresses the doubled problem with random unitary
projections into a regular coupled problem and filters its eigenvalues.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import EigentripleSet, haar_unitary, numerical_rank, svd
from .pencil import (
    BivariatePencil,
    MultiplicityEstimate,
    estimate_multiplicity,
    is_biregular_probe,
    repeated_curve_probe,
)
from .singgep import (
    ProjectedPencilSingular,
    normal_rank_estimate,
    singular_gep_eigenvalues,
)
from .twopar import (
    SingularDelta0,
    TwoParamProblem,
    _cluster_indices,
    build_deltas,
    build_zgv_problem,
    solve_regular_2ep,
)

KIND_ZGV = "ZGV"
KIND_A = "TwoD_a"
KIND_B = "TwoD_b"
KIND_C = "TwoD_c"
KIND_D = "TwoD_d"
ALL_KINDS = (KIND_ZGV, KIND_A, KIND_B, KIND_C, KIND_D)


class NotBiregular(Exception):
    """The pencil fails a regularity probe; critical points are ill-posed."""


class NotOnCurve(Exception):
    """The queried pair is too far from every eigencurve."""


class NotCritical(Exception):
    """The pair lies on a curve but no null pair annihilates B."""


@dataclass
class CriticalPoint:
    lam: complex
    mu: complex
    kind: str
    x: np.ndarray                      # unit right null vector, y^H B x ~ 0
    y: np.ndarray                      # unit left null vector
    res_right: float                   # ||W x|| / scale
    res_left: float                    # ||y^H W|| / scale
    yBx: float
    yCx: float
    mult_lambda: MultiplicityEstimate  # lambda0 within the slice at mu = mu0
    mult_mu: MultiplicityEstimate      # mu0 within the slice at lambda = lambda0
    method: str = ""

    @property
    def coordinates(self) -> tuple[complex, complex]:
        return self.lam, self.mu


@dataclass
class RejectedCandidate:
    lam: complex
    mu: complex | None
    reason: str


@dataclass
class ProjectedCandidate:
    """One eigenvalue of the projected coupled problem with its filter values.

    alpha and beta are pre-normalized by the pencil scale at (lam, mu); gamma
    is |gamma| / sqrt(1 + |lam|^2). Acceptance: max(alpha, beta) < delta1 and
    gamma > delta2.
    """

    lam: complex
    mu: complex
    alpha: float
    beta: float
    gamma: float
    accepted: bool
    reason: str = ""


@dataclass
class PipelineReport:
    method: str
    mode: str
    seed: int
    thresholds: dict
    points: list[CriticalPoint]
    rejected: list[RejectedCandidate]
    nrank: int | None = None
    candidates: list = field(default_factory=list)
    notes: list[str] = field(default_factory=list)


_MODES = {"zgv": "ZGV", "ZGV": "ZGV", "2d": "all2D", "all2d": "all2D", "all2D": "all2D"}


def _canon_mode(mode: str) -> str:
    try:
        return _MODES[mode]
    except KeyError:
        raise ValueError(f"mode must be one of {sorted(set(_MODES.values()))}, got {mode!r}")


def _require_biregular(P: BivariatePencil, seed: int = 0) -> None:
    if not is_biregular_probe(P, seed=seed):
        raise NotBiregular("a random slice of the pencil is singular")
    if repeated_curve_probe(P, seed=seed):
        raise NotBiregular(
            "the characteristic polynomial appears to have a repeated factor; "
            "critical points along coincident curves are not isolated"
        )


def _slice_multiplicity(
    E: EigentripleSet,
    target: complex,
    tol: float,
    wide_tol: float,
    min_algebraic: int = 1,
    rank_tol: float = 1e-4,
) -> MultiplicityEstimate:
    """Multiplicity of the slice eigenvalue nearest to target, widening once.

    The first pass clusters at `tol`. Widening to `wide_tol` is accepted when
    the tight count falls below `min_algebraic` (the caller knows a lower bound
    from the null-space structure), or when the wide cluster is provably
    defective (eigenvector rank below its size), which rules out merging a
    genuinely distinct neighbor.
    """
    finite = E.finite_indices()
    if finite.size == 0:
        return MultiplicityEstimate(algebraic=0, geometric=0, members=np.array([], dtype=int))
    idx = int(finite[np.argmin(np.abs(E.values[finite] - target))])
    est = estimate_multiplicity(E, idx, cluster_tol=tol, rank_tol=rank_tol)
    if wide_tol > tol:
        wide = estimate_multiplicity(E, idx, cluster_tol=wide_tol, rank_tol=rank_tol)
        if est.algebraic < min_algebraic and wide.algebraic > est.algebraic:
            est = wide
        elif wide.algebraic > est.algebraic and wide.geometric < wide.algebraic:
            est = wide
    return est


def classify_point(
    P: BivariatePencil,
    lam: complex,
    mu: complex,
    *,
    on_curve_tol: float = 1e-3,
    kernel_tol: float = 1e-6,
    cluster_tol: float = 1e-6,
    wide_cluster_tol: float = 1e-4,
    tol_b: float = 1e-8,
    tol_c: float = 1e-6,
    method: str = "",
) -> CriticalPoint:
    """Classify (lam, mu) as a critical point, or raise.

    Gates adapt to the accuracy of the input pair: when the evaluated pencil is
    singular only to within `res` (relative), the null-vector products and the
    slice clusters inherit perturbations of that order, so the thresholds are
    floored at small multiples of `res`. Raises NotOnCurve when no eigencurve
    passes nearby and NotCritical when the (unique) null pair does not
    annihilate B.
    """
    lam = complex(lam)
    mu = complex(mu)
    scale = P.scale_at(lam, mu)
    r = svd(P.evaluate(lam, mu))
    res = float(r.s[-1] / scale)
    if res > on_curve_tol:
        raise NotOnCurve(
            f"relative distance {res:.2e} from the nearest eigencurve exceeds {on_curve_tol:.1e}"
        )
    _, nB, nC = P.norms()
    kern_gate = max(kernel_tol, 20.0 * res) * scale
    g = max(1, int(np.sum(r.s <= kern_gate)))

    if g == 1:
        x = r.V[:, -1]
        y = r.U[:, -1]
        ybx = float(abs(y.conj() @ (P.B @ x)))
        ycx = float(abs(y.conj() @ (P.C @ x)))
        if ybx > max(tol_b, 50.0 * res) * max(nB, 1e-300):
            raise NotCritical(
                f"|y^H B x| = {ybx:.2e} for the unique null pair; the curve is not stationary here"
            )
    else:
        X0 = r.V[:, -g:]
        Y0 = r.U[:, -g:]
        # pick the null pair annihilating B exactly: with M = Y0^H B X0 = U S V^H,
        # x along the top right singular vector and y along the bottom left one
        # give y^H B x = sigma_1 * (u_g^H u_1) = 0
        rm = svd(Y0.conj().T @ (P.B @ X0))
        x = X0 @ rm.V[:, 0]
        y = Y0 @ rm.U[:, -1]
        x = x / np.linalg.norm(x)
        y = y / np.linalg.norm(y)
        ybx = float(abs(y.conj() @ (P.B @ x)))
        ycx = float(abs(y.conj() @ (P.C @ x)))

    W = P.evaluate(lam, mu)
    res_right = float(np.linalg.norm(W @ x) / scale)
    res_left = float(np.linalg.norm(y.conj() @ W) / scale)

    tol1 = max(cluster_tol, 10.0 * res)
    wide = max(wide_cluster_tol, 100.0 * res)
    min_needed = g if g >= 2 else 2
    mult_lam = _slice_multiplicity(P.lambda_slice(mu), lam, tol1, wide, min_algebraic=min_needed)
    mult_mu = _slice_multiplicity(P.mu_slice(lam), mu, tol1, tol1, min_algebraic=1)

    if g == 1:
        if ycx > tol_c * max(nC, 1e-300):
            mu_simple = mult_mu.algebraic == 1 and mult_mu.geometric == 1
            kind = KIND_ZGV if mu_simple else KIND_A
        else:
            kind = KIND_B
    else:
        kind = KIND_C if mult_lam.algebraic > g else KIND_D

    return CriticalPoint(
        lam=lam, mu=mu, kind=kind, x=x, y=y,
        res_right=res_right, res_left=res_left, yBx=ybx, yCx=ycx,
        mult_lambda=mult_lam, mult_mu=mult_mu, method=method,
    )


def dedup_points(points: list[CriticalPoint], tol: float = 1e-8) -> list[CriticalPoint]:
    """Cluster representatives under |d lam| + |d mu| <= tol*(1+|lam|+|mu|).

    Keeps the member with the smallest residual from each cluster; output is
    sorted by (Re lam, Im lam, Re mu, Im mu).
    """
    order = sorted(range(len(points)),
                   key=lambda i: max(points[i].res_right, points[i].res_left))
    kept: list[CriticalPoint] = []
    for i in order:
        p = points[i]
        if not any(abs(p.lam - q.lam) + abs(p.mu - q.mu)
                   <= tol * (1.0 + abs(q.lam) + abs(q.mu)) for q in kept):
            kept.append(p)
    kept.sort(key=lambda p: (p.lam.real, p.lam.imag, p.mu.real, p.mu.imag))
    return kept


def _merge_values(values: list[complex], rel_tol: float = 1e-6) -> list[complex]:
    """Greedy merge of nearby complex values into running means."""
    reps: list[tuple[complex, int]] = []
    for v in values:
        for i, (rep, cnt) in enumerate(reps):
            if abs(v - rep) <= rel_tol * (1.0 + abs(rep)):
                reps[i] = ((rep * cnt + v) / (cnt + 1), cnt + 1)
                break
        else:
            reps.append((v, 1))
    return [rep for rep, _ in reps]


def critical_points_direct(
    P: BivariatePencil,
    mode: str = "all2D",
    delta: float = 1e-8,
    seed: int = 0,
    *,
    delta1: float = 1e-8,
    delta2: float = 1e-10,
    nrank: int | None = None,
    dedup_tol: float = 1e-8,
    cluster_tol: float = 1e-6,
) -> PipelineReport:
    """Global critical-point search through the singular doubled problem.

    The lambda coordinates are the finite eigenvalues of the singular pencil of
    the doubled problem, extracted by rank projection and filtered. For each
    accepted lambda the mu-slice is scanned: algebraically simple mu values
    qualify when |y^H B x| <= delta*||B||, multiple ones (curve intersections
    and higher-order contacts) qualify as such in all2D mode. Survivors are
    classified and deduplicated.
    """
    mode = _canon_mode(mode)
    _require_biregular(P, seed)
    n = P.n
    D = build_deltas(build_zgv_problem(P))
    expected = 2 * n * n - n
    k = nrank if nrank is not None else normal_rank_estimate(
        D.d1, D.d0, seed=seed, expected=expected)
    notes: list[str] = []
    if k < expected:
        notes.append(f"normal rank estimate {k} below the generic count {expected}")
    try:
        filtered = singular_gep_eigenvalues(D.d1, D.d0, k, delta1=delta1,
                                            delta2=delta2, seed=seed)
    except ProjectedPencilSingular as exc:
        # happens when the B and C directions are (nearly) collinear, which
        # collapses the two-parameter coupling; the search is ill posed then
        raise NotBiregular(f"degenerate operator determinants: {exc}") from exc
    _, nB, _ = P.norms()

    lam_reps = _merge_values([f.lam for f in filtered if f.accepted])
    points: list[CriticalPoint] = []
    rejected: list[RejectedCandidate] = []
    for lam in lam_reps:
        E = P.mu_slice(lam)
        finite = E.finite_indices()
        if finite.size == 0:
            rejected.append(RejectedCandidate(lam, None, "mu-slice has no finite eigenvalues"))
            continue
        for members in _cluster_indices(E.values[finite], cluster_tol):
            idxs = finite[members]
            muj = complex(np.mean(E.values[idxs]))
            size = idxs.size
            geom = numerical_rank(E.right[:, idxs], 1e-4) if size > 1 else 1
            if size == 1 and geom == 1:
                x = E.right[:, idxs[0]]
                y = E.left[:, idxs[0]]
                ybx = abs(y.conj() @ (P.B @ x))
                if ybx > delta * max(nB, 1e-300):
                    continue  # ordinary curve point
            elif mode == "ZGV":
                continue  # stationary points of a single branch need a simple mu
            try:
                cp = classify_point(P, lam, muj, on_curve_tol=1e-6,
                                    cluster_tol=cluster_tol, tol_b=max(delta, 1e-8),
                                    method="direct")
            except (NotOnCurve, NotCritical) as exc:
                rejected.append(RejectedCandidate(lam, muj, str(exc)))
                continue
            if mode == "ZGV" and cp.kind != KIND_ZGV:
                rejected.append(RejectedCandidate(lam, muj, f"kind {cp.kind} excluded in ZGV mode"))
                continue
            points.append(cp)

    return PipelineReport(
        method="direct", mode=mode, seed=seed,
        thresholds={"delta": delta, "delta1": delta1, "delta2": delta2,
                    "dedup_tol": dedup_tol},
        points=dedup_points(points, dedup_tol), rejected=rejected,
        nrank=k, candidates=filtered, notes=notes,
    )


def critical_points_projected(
    P: BivariatePencil,
    mode: str = "all2D",
    delta1: float = 1e-8,
    delta2: float = 1e-10,
    seed: int = 0,
    subset: tuple[complex, complex, int] | None = None,
    *,
    dedup_tol: float = 1e-8,
    cluster_tol: float = 1e-6,
    max_redraws: int = 1,
    ordqz_limit: int = 600,
) -> PipelineReport:
    """Critical points through the unitarily projected regular coupled problem.

    The doubled problem is compressed with the leading 2n-1 columns U, V of
    seeded random unitaries, giving a regular coupled problem with n(2n-1)
    eigenvalues. Genuine critical points are recognized by small escape
    residuals (alpha, beta) and a non-vanishing regularity indicator gamma.
    `subset` = (target_lam, target_mu, count) keeps only the eigenvalues
    nearest the target before filtering, standing in for iterative solvers
    that compute a few eigenvalues near a shift.
    """
    mode = _canon_mode(mode)
    _require_biregular(P, seed)
    n = P.n
    T0 = build_zgv_problem(P)
    A2, B2, C2 = T0.W2.A, T0.W2.B, T0.W2.C
    rng = np.random.default_rng(seed)

    pairs = None
    last: Exception | None = None
    for _ in range(max_redraws + 1):
        UU = haar_unitary(2 * n, rng)
        VV = haar_unitary(2 * n, rng)
        U, Up = UU[:, :2 * n - 1], UU[:, 2 * n - 1:]
        V, Vp = VV[:, :2 * n - 1], VV[:, 2 * n - 1:]
        W2p = BivariatePencil(U.conj().T @ A2 @ V, U.conj().T @ B2 @ V, U.conj().T @ C2 @ V)
        try:
            # the projected coupled operator for mu is rank-deficient by
            # construction; the surviving directions appear as infinite lambda
            pairs = solve_regular_2ep(TwoParamProblem(W1=P, W2=W2p),
                                      cluster_tol=cluster_tol, ordqz_limit=ordqz_limit,
                                      allow_singular_d0=True)
            break
        except SingularDelta0 as exc:
            last = exc
    if pairs is None:
        raise NotBiregular(f"projected coupled problem stayed singular: {last}")

    nA, nB, nC = P.norms()
    notes: list[str] = []
    if subset is not None:
        t_lam, t_mu, count = subset
        pairs = sorted(pairs, key=lambda pr: abs(pr.lam - t_lam) + abs(pr.mu - t_mu))[:count]
        notes.append(f"subset mode: kept {len(pairs)} eigenvalues nearest "
                     f"({t_lam:.6g}, {t_mu:.6g})")

    candidates: list[ProjectedCandidate] = []
    rejected: list[RejectedCandidate] = []
    accepted_pairs: list[tuple[complex, complex]] = []
    for pr in pairs:
        if not pr.mu_valid:
            reason = ("infinite lambda (rank-deficient coupled operator)"
                      if not np.isfinite(pr.lam) else "indeterminate mu coordinate")
            candidates.append(ProjectedCandidate(pr.lam, pr.mu, np.inf, np.inf, 0.0,
                                                 accepted=False, reason=reason))
            rejected.append(RejectedCandidate(pr.lam, None, reason))
            continue
        M2 = A2 + pr.lam * B2 + pr.mu * C2
        alpha = float(np.linalg.norm(Up.conj().T @ (M2 @ (V @ pr.x2))))
        beta = float(np.linalg.norm((pr.y2.conj() @ (U.conj().T @ M2 @ Vp))))
        g1 = pr.y1.conj() @ (P.B @ pr.x1)
        h1 = pr.y1.conj() @ (P.C @ pr.x1)
        g2 = pr.y2.conj() @ (W2p.C @ pr.x2)
        h2 = pr.y2.conj() @ (W2p.B @ pr.x2)
        gamma = g1 * g2 - h1 * h2
        scale = nA + abs(pr.lam) * nB + abs(pr.mu) * nC
        at = alpha / scale
        bt = beta / scale
        gt = float(abs(gamma) / np.sqrt(1.0 + abs(pr.lam) ** 2))
        ok = max(at, bt) < delta1 and gt > delta2
        candidates.append(ProjectedCandidate(pr.lam, pr.mu, at, bt, gt, accepted=ok))
        if ok:
            accepted_pairs.append((pr.lam, pr.mu))

    # merge multiple copies of one point (multiplicity in the coupled problem)
    merged: list[tuple[complex, complex, int]] = []
    for lam, mu in accepted_pairs:
        for j, (rl, rm, cnt) in enumerate(merged):
            if abs(lam - rl) + abs(mu - rm) <= 1e-6 * (1.0 + abs(rl) + abs(rm)):
                merged[j] = ((rl * cnt + lam) / (cnt + 1), (rm * cnt + mu) / (cnt + 1), cnt + 1)
                break
        else:
            merged.append((lam, mu, 1))

    points: list[CriticalPoint] = []
    for lam, mu, _ in merged:
        try:
            cp = classify_point(P, lam, mu, on_curve_tol=1e-6, cluster_tol=cluster_tol,
                                method="projected")
        except (NotOnCurve, NotCritical) as exc:
            rejected.append(RejectedCandidate(lam, mu, str(exc)))
            continue
        if mode == "ZGV" and cp.kind != KIND_ZGV:
            rejected.append(RejectedCandidate(lam, mu, f"kind {cp.kind} excluded in ZGV mode"))
            continue
        points.append(cp)

    return PipelineReport(
        method="projected", mode=mode, seed=seed,
        thresholds={"delta1": delta1, "delta2": delta2, "dedup_tol": dedup_tol},
        points=dedup_points(points, dedup_tol), rejected=rejected,
        nrank=None, candidates=candidates, notes=notes,
    )
