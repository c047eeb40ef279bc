import numpy as np
import pytest

from eigencurves.oracle import zgv_oracle
from eigencurves.pencil import BivariatePencil
from eigencurves.points import (
    KIND_B,
    KIND_D,
    KIND_ZGV,
    NotBiregular,
    NotCritical,
    NotOnCurve,
    classify_point,
    critical_points_direct,
    critical_points_projected,
    dedup_points,
)

from conftest import hermitian_pair_3x3, random_pencil


def _match(points, lam, mu, tol):
    hits = [p for p in points
            if abs(p.lam - lam) + abs(p.mu - mu) <= tol * (1 + abs(lam) + abs(mu))]
    assert hits, f"no point near ({lam}, {mu})"
    return hits[0]


# ---------------------------------------------------------------- classify

def test_classify_zgv_at_rounded_coordinates(ex4x4):
    cp = classify_point(ex4x4, 0.28896, 0.28248)
    assert cp.kind == KIND_ZGV
    assert cp.mult_mu.algebraic == 1
    assert cp.yCx > 1e-3


def test_classify_intersection_exact(ex4x4):
    cp = classify_point(ex4x4, -1.0, 0.0)
    assert cp.kind == KIND_D
    assert cp.mult_lambda.algebraic == 2
    assert cp.mult_lambda.geometric == 2
    assert cp.yBx <= 1e-12


def test_classify_intersection_rounded(ex4x4):
    cp = classify_point(ex4x4, -1.5330, -1.5991)
    assert cp.kind == KIND_D


def test_classify_type_b(typeb):
    cp = classify_point(typeb, 0.0, 0.0)
    assert cp.kind == KIND_B
    assert cp.yBx <= 1e-12 and cp.yCx <= 1e-12
    assert cp.mult_lambda.algebraic >= 2 and cp.mult_lambda.geometric == 1


def test_classify_off_curve_raises(ex2x2):
    with pytest.raises(NotOnCurve):
        classify_point(ex2x2, 10.0, 10.0)


def test_classify_plain_curve_point_raises(ex2x2):
    # pick a curve point away from the stationary ones: solve the mu slice at
    # lambda = 0 (the ZGV points sit at lambda = 1 and 3)
    E = ex2x2.mu_slice(0.0)
    mu0 = E.values[E.finite_indices()[0]]
    with pytest.raises(NotCritical):
        classify_point(ex2x2, 0.0, mu0)


# ---------------------------------------------------------------- direct

def test_direct_2x2_zgv_exact(ex2x2):
    rep = critical_points_direct(ex2x2, mode="ZGV", seed=0)
    assert [p.kind for p in rep.points] == [KIND_ZGV, KIND_ZGV]
    got = [(p.lam, p.mu) for p in rep.points]  # sorted by real part already
    for (gl, gm), (wl, wm) in zip(got, [(1.0, -0.5), (3.0, 1.5)]):
        assert abs(gl - wl) <= 1e-10 and abs(gm - wm) <= 1e-10


def test_direct_4x4_all_points(ex4x4):
    rep = critical_points_direct(ex4x4, mode="all2D", seed=0)
    assert len(rep.points) == 9
    zgv = [
        (-2.2645, -1.3475), (-1.8172, -0.17299),
        (0.28896, 0.28248), (0.38688, 1.7975),
        (-10.4081 + 3.8258j, 7.7647 - 2.9511j),
        (-10.4081 - 3.8258j, 7.7647 + 2.9511j),
    ]
    dd = [(-1.5330, -1.5991), (-1.0, 0.0), (-0.3565, 1.9305)]
    for lam, mu in zgv:
        assert _match(rep.points, lam, mu, 1e-3).kind == KIND_ZGV
    for lam, mu in dd:
        assert _match(rep.points, lam, mu, 1e-3).kind == KIND_D


def test_direct_type_b(typeb):
    rep = critical_points_direct(typeb, mode="all2D", seed=0)
    assert len(rep.points) == 1
    p = rep.points[0]
    assert p.kind == KIND_B and abs(p.lam) < 1e-10 and abs(p.mu) < 1e-10
    assert critical_points_direct(typeb, mode="ZGV", seed=0).points == []


def test_direct_constrained_pair(ex2x2):
    A, B = hermitian_pair_3x3()
    P = BivariatePencil(A, -B, -np.eye(3))
    rep = critical_points_direct(P, mode="all2D", seed=0)
    assert len(rep.points) == 5
    for lam, mu in [(1.3527, 0.8121), (0.6473, -0.8121),
                    (1 + 1.6371j, -2.1327j), (1 - 1.6371j, 2.1327j), (1.0, 0.0)]:
        _match(rep.points, lam, mu, 1e-3)
    triple = _match(rep.points, 1.0, 0.0, 1e-6)
    assert triple.mult_lambda.algebraic == 3
    # the lambda = 1 coordinate carries multiplicity 2 in the extraction stage
    # and collapses to a single reported point
    near_one = [f for f in rep.candidates
                if f.accepted and abs(f.lam - 1.0) < 1e-6]
    assert len(near_one) == 2


def test_direct_not_biregular():
    A = np.array([[0.0, 0.0], [1.0, 0.0]])
    P = BivariatePencil(A, np.diag([1.0, 0.0]), np.diag([1.0, 0.0]))
    with pytest.raises(NotBiregular):
        critical_points_direct(P)


def test_direct_repeated_curves_rejected():
    # det = (lambda + mu)^2: coincident curves, not a well-posed search
    P = BivariatePencil(np.zeros((2, 2)), np.eye(2), np.eye(2))
    with pytest.raises(NotBiregular):
        critical_points_direct(P)


# ---------------------------------------------------------------- projected

def test_projected_2x2_table_pattern(ex2x2):
    rep = critical_points_projected(ex2x2, mode="ZGV", seed=0)
    assert len(rep.candidates) == 6
    acc = [c for c in rep.candidates if c.accepted]
    assert len(acc) == 2
    for c in acc:
        assert max(c.alpha, c.beta) <= 1e-10 and c.gamma >= 1e-3
    for c in rep.candidates:
        if not c.accepted:
            assert max(c.alpha, c.beta) >= 1e-6 or c.gamma <= 1e-12
    got = sorted((p.lam.real, p.mu.real) for p in rep.points)
    assert np.allclose(got, [(1.0, -0.5), (3.0, 1.5)], atol=1e-10)


def test_projected_4x4_matches_direct(ex4x4):
    rd = critical_points_direct(ex4x4, mode="all2D", seed=0)
    rp = critical_points_projected(ex4x4, mode="all2D", seed=0)
    assert len(rp.points) == len(rd.points) == 9
    for p in rd.points:
        q = _match(rp.points, p.lam, p.mu, 1e-8)
        assert q.kind == p.kind


def test_collinear_slopes_rejected_by_both_methods():
    # B == C collapses the two-parameter coupling (all curves share one slope,
    # so no finite critical points exist); both methods refuse the input
    P = BivariatePencil(np.diag([1.0, 2.0]), np.eye(2), np.eye(2))
    with pytest.raises(NotBiregular):
        critical_points_projected(P, mode="all2D", seed=0)
    with pytest.raises(NotBiregular):
        critical_points_direct(P, mode="all2D", seed=0)


def test_projected_subset_mode(ex2x2):
    rep = critical_points_projected(ex2x2, mode="ZGV", seed=0,
                                    subset=(3.0, 1.5, 1))
    assert len(rep.candidates) == 1
    assert len(rep.points) == 1
    assert abs(rep.points[0].lam - 3.0) < 1e-10


def test_projected_rejections_tagged(ex2x2):
    rep = critical_points_projected(ex2x2, mode="all2D", seed=0)
    reasons = [r.reason for r in rep.rejected]
    assert any("rank-deficient" in s or "indeterminate" in s for s in reasons)


# ---------------------------------------------------------------- properties

def test_random_pencil_counts_and_agreement():
    for n in (3, 4):
        P = random_pencil(n, seed=500 + n)
        rd = critical_points_direct(P, mode="all2D", seed=1)
        rp = critical_points_projected(P, mode="all2D", seed=1)
        assert len(rd.points) == n * (n - 1)
        assert len(rp.points) == n * (n - 1)
        for p in rd.points:
            _match(rp.points, p.lam, p.mu, 1e-6)
        scale = sum(P.norms())
        for p in rd.points:
            assert max(p.res_right, p.res_left) <= 1e-8
            assert p.yBx <= 1e-8 * scale


def test_zgv_mode_matches_oracle(ex2x2, ex4x4):
    for P in (ex2x2, ex4x4):
        rep = critical_points_direct(P, mode="ZGV", seed=0)
        want = zgv_oracle(P)
        assert len(rep.points) == len(want)
        for lam, mu in want:
            _match(rep.points, lam, mu, 1e-6)


def test_report_metadata(ex2x2):
    rep = critical_points_direct(ex2x2, mode="ZGV", seed=7)
    assert rep.method == "direct" and rep.mode == "ZGV" and rep.seed == 7
    assert rep.nrank == 6
    assert "delta" in rep.thresholds
    rep2 = critical_points_projected(ex2x2, mode="2d", seed=7)
    assert rep2.mode == "all2D" and rep2.method == "projected"


# ---------------------------------------------------------------- dedup

def _mk_point(lam, mu, res=1e-12):
    from eigencurves.points import CriticalPoint
    from eigencurves.pencil import MultiplicityEstimate
    m = MultiplicityEstimate(1, 1, np.array([0]))
    return CriticalPoint(lam=lam, mu=mu, kind=KIND_ZGV,
                         x=np.array([1.0 + 0j]), y=np.array([1.0 + 0j]),
                         res_right=res, res_left=res, yBx=0.0, yCx=1.0,
                         mult_lambda=m, mult_mu=m)


def test_dedup_merges_copies():
    a = _mk_point(1.0, 0.0, res=1e-12)
    b = _mk_point(1.0 + 1e-12, 1e-12, res=1e-9)
    out = dedup_points([a, b], tol=1e-8)
    assert len(out) == 1 and out[0].res_right == 1e-12  # keeps the better one


def test_dedup_keeps_distinct():
    pts = [_mk_point(1.0, 0.0), _mk_point(1.0 + 1e-3, 0.0), _mk_point(2.0, 5.0)]
    out = dedup_points(pts, tol=1e-8)
    assert len(out) == 3
    assert [p.lam for p in out] == sorted(p.lam for p in pts)
