"""Acceptance gate: twelve end-to-end criteria at their stated tolerances.

Each test prints one [PASS]/[FAIL] line; run with `pytest -v -s
tests/test_acceptance.py` to see them all in order.
"""

import functools
import json
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import scipy.linalg as sla
from scipy.optimize import minimize_scalar

from conftest import (
    stable_tridiag_4x4,
    hermitian_pair_3x3,
    pencil_2x2,
    pencil_4x4,
    pencil_type_b,
    qep_matrices,
    random_pencil,
)
from eigencurves import (
    BivariatePencil,
    critical_points_direct,
    critical_points_projected,
    distance_to_instability,
    gauss_newton_2d,
    mathieu_discretization,
    mfrd_candidates,
    mfrd_refine_all,
    qep_zgv,
    sturm_liouville_critical,
    zgv_oracle,
)

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def criterion(num: int, desc: str):
    def deco(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            try:
                fn(*args, **kwargs)
            except BaseException:
                print(f"[FAIL] criterion {num:2d}: {desc}")
                raise
            print(f"[PASS] criterion {num:2d}: {desc}")
        return wrapper
    return deco


def _match(got, expected, tol):
    """Each expected (lam, mu) appears in got within absolute tolerance."""
    for le, me in expected:
        if not any(abs(l - le) <= tol and abs(m - me) <= tol for l, m in got):
            raise AssertionError(f"missing ({le}, {me}) at tol {tol}: {got}")


def _sorted_pairs(pairs):
    return sorted(pairs, key=lambda t: (t[0].real, t[0].imag,
                                        t[1].real, t[1].imag))


TWO_ZGV = [(1.0, -0.5), (3.0, 1.5)]


@criterion(1, "2x2 pencil: three methods, both stationary points to 1e-10, < 1 s")
def test_criterion_01():
    P = pencil_2x2()
    t0 = time.perf_counter()
    reports = [
        critical_points_direct(P, mode="ZGV"),
        critical_points_projected(P, mode="ZGV"),
        mfrd_refine_all(P, mode="ZGV"),
    ]
    elapsed = time.perf_counter() - t0
    for rep in reports:
        assert len(rep.points) == 2, rep.method
        got = [(p.lam, p.mu) for p in rep.points]
        _match(got, TWO_ZGV, 1e-10)
    assert elapsed < 1.0, f"took {elapsed:.2f} s"


@criterion(2, "projection filter: 6 candidates, exactly 2 accepted, margins hold")
def test_criterion_02():
    rep = critical_points_projected(pencil_2x2(), mode="ZGV")
    cands = rep.candidates
    assert len(cands) == 6
    accepted = [c for c in cands if c.accepted]
    assert len(accepted) == 2
    for c in accepted:
        assert max(c.alpha, c.beta) <= 1e-10
        assert c.gamma >= 1e-3
    for c in cands:
        if not c.accepted:
            assert max(c.alpha, c.beta) >= 1e-6 or c.gamma <= 1e-12


FOUR_REAL_ZGV = [(-2.2645, -1.3475), (-1.8172, -0.17299),
                 (0.28896, 0.28248), (0.38688, 1.7975)]
FOUR_COMPLEX_ZGV = [(-10.4081 + 3.8258j, 7.7647 - 2.9511j),
                    (-10.4081 - 3.8258j, 7.7647 + 2.9511j)]
FOUR_TYPE_D = [(-1.5330, -1.5991), (-1.0, 0.0), (-0.3565, 1.9305)]


@criterion(3, "4x4 pencil: 9 critical points with kinds to 1e-3, < 5 s")
def test_criterion_03():
    P = pencil_4x4()
    t0 = time.perf_counter()
    rep = critical_points_direct(P, mode="all2D")
    elapsed = time.perf_counter() - t0
    assert len(rep.points) == 9
    zgv = [(p.lam, p.mu) for p in rep.points if p.kind == "ZGV"]
    typed = [(p.lam, p.mu) for p in rep.points if p.kind == "TwoD_d"]
    assert len(zgv) == 6 and len(typed) == 3
    _match(zgv, FOUR_REAL_ZGV, 1e-3)
    _match(zgv, FOUR_COMPLEX_ZGV, 1e-3)
    _match(typed, FOUR_TYPE_D, 1e-3)
    assert elapsed < 5.0, f"took {elapsed:.2f} s"


@criterion(4, "tangential pencil: single TwoD_b at the origin, no stationary points")
def test_criterion_04():
    P = pencil_type_b()
    rep = critical_points_direct(P, mode="all2D")
    assert len(rep.points) == 1
    p = rep.points[0]
    assert abs(p.lam) <= 1e-8 and abs(p.mu) <= 1e-8
    assert p.kind == "TwoD_b"
    assert critical_points_direct(P, mode="ZGV").points == []


CONSTRAINED_ALL = [(0.6473, -0.8121), (1.0, 0.0), (1.3527, 0.8121),
               (1.0 + 1.6371j, -2.1327j), (1.0 - 1.6371j, 2.1327j)]


@criterion(5, "constrained 3x3 pair: six recovered, touch point deduplicated, "
              "slice multiplicity 3")
def test_criterion_05():
    A, B = hermitian_pair_3x3()
    P = BivariatePencil(A, -B, -np.eye(3))
    rep = critical_points_direct(P, mode="all2D")
    assert sum(1 for c in rep.candidates if c.accepted) == 6
    assert len(rep.points) == 5
    _match([(p.lam, p.mu) for p in rep.points], CONSTRAINED_ALL, 1e-3)
    touch = [p for p in rep.points if abs(p.lam - 1.0) + abs(p.mu) <= 1e-6]
    assert len(touch) == 1
    assert touch[0].mult_lambda.algebraic == 3


@criterion(6, "distance to instability: 1e-10 relative, grid oracle agrees, < 10 s")
def test_criterion_06():
    A = stable_tridiag_4x4()
    t0 = time.perf_counter()
    beta, lam_opt = distance_to_instability(A)
    elapsed = time.perf_counter() - t0
    ref = 3.188701430320041e-2
    assert abs(beta - ref) <= 1e-10 * ref
    assert elapsed < 10.0, f"took {elapsed:.2f} s"

    f = lambda t: sla.svdvals(A - 1j * t * np.eye(4))[-1]
    grid = np.linspace(-2 * np.linalg.norm(A, 2) - 1,
                       2 * np.linalg.norm(A, 2) + 1, 4001)
    i = int(np.argmin([f(t) for t in grid]))
    res = minimize_scalar(f, bounds=(grid[i - 1], grid[i + 1]),
                          method="bounded", options={"xatol": 1e-12})
    assert abs(beta - res.fun) <= 1e-6 * res.fun
    assert abs(lam_opt - res.x) <= 1e-6


QEP_POINTS = [(-0.2312197373, 0.79089022421), (0.1200999663, 1.10785496051),
              (0.1584790129, 0.82797266404), (0.3684223373, 0.82195756940),
              (0.6315720581, 0.54233673936)]


@criterion(7, "quadratic problem: all five dispersion extrema to 1e-8")
def test_criterion_07():
    pts = qep_zgv(*qep_matrices())
    assert len(pts) == 5
    _match(pts, QEP_POINTS, 1e-8)


MATHIEU_NONTRIVIAL = [(7.65844630, 8.12501884), (23.06815377, 27.91083283),
                      (46.57047373, 58.92584487)]


@criterion(8, "periodic potential: cascade 25/50/100 reproduces stationary "
              "points, < 60 s")
def test_criterion_08():
    t0 = time.perf_counter()
    pts = sturm_liouville_critical(mathieu_discretization(25), [50, 100])
    elapsed = time.perf_counter() - t0
    got = [(p.lam.real, p.mu.real) for p in pts]
    for k in range(5):
        mu = 4.0 * k * k
        assert any(abs(l) <= 1e-6 * (1 + mu) and abs(m - mu) <= 1e-6 * (1 + mu)
                   for l, m in got), f"missing trivial point (0, {mu})"
    for le, me in MATHIEU_NONTRIVIAL:
        for sgn in (-1.0, 1.0):
            scale = abs(le) + abs(me)
            assert any(abs(l - sgn * le) + abs(m - me) <= 1e-4 * scale
                       for l, m in got), f"missing ({sgn * le}, {me})"
    assert elapsed < 60.0, f"took {elapsed:.1f} s"


@criterion(9, "random pencils n=2..5, 10 seeds: rank, count, residuals, "
              "method agreement")
def test_criterion_09():
    for n in (2, 3, 4, 5):
        for seed in range(10):
            P = random_pencil(n, seed=1000 * n + seed)
            rep = critical_points_direct(P, mode="all2D", seed=seed)
            assert rep.nrank == 2 * n * n - n, (n, seed)
            assert len(rep.points) == n * (n - 1), (n, seed)
            for p in rep.points:
                assert max(p.res_right, p.res_left) <= 1e-8, (n, seed)
            proj = critical_points_projected(P, mode="all2D", seed=seed)
            mfrd = mfrd_refine_all(P, mode="all2D", seed=seed)
            base = _sorted_pairs((p.lam, p.mu) for p in rep.points)
            for other in (proj, mfrd):
                got = _sorted_pairs((p.lam, p.mu) for p in other.points)
                assert len(got) == len(base), (n, seed, other.method)
                for (l1, m1), (l2, m2) in zip(base, got):
                    assert abs(l1 - l2) + abs(m1 - m2) \
                        <= 1e-6 * (1 + abs(l1) + abs(m1)), (n, seed, other.method)


@criterion(10, "stationary points equal the resultant oracle for n <= 4")
def test_criterion_10():
    for n in (2, 3, 4):
        for seed in range(3):
            P = random_pencil(n, seed=77 * n + seed)
            rep = critical_points_direct(P, mode="ZGV", seed=seed)
            ref = _sorted_pairs(zgv_oracle(P))
            got = _sorted_pairs((p.lam, p.mu) for p in rep.points)
            assert len(got) == len(ref), (n, seed)
            for (l1, m1), (l2, m2) in zip(got, ref):
                assert abs(l1 - l2) + abs(m1 - m2) \
                    <= 1e-6 * (1 + abs(l2) + abs(m2)), (n, seed)


@criterion(11, "local refinement: empirical order >= 1.8, Jacobian "
               "conditioning >= 1e-8")
def test_criterion_11():
    P = pencil_2x2()
    starts = [c for c in mfrd_candidates(P, delta=1e-2)
              if not c.suspected_spurious]
    assert len(starts) == 2
    for c in starts:
        cp, state = gauss_newton_2d(P, c.lam, c.mu)
        assert state.converged
        rs = [r for r in state.residual_norms if 1e-13 < r < 1e-1]
        orders = []
        for r0, r1, r2 in zip(rs, rs[1:], rs[2:]):
            if r1 < r0 and r2 < r1:
                orders.append(np.log(r2 / r1) / np.log(r1 / r0))
        assert orders, f"trace too short: {state.residual_norms}"
        assert max(orders) >= 1.8, orders
        assert state.jac_sigma_min / state.jac_sigma_max >= 1e-8
        assert any(abs(cp.lam - le) <= 1e-10 and abs(cp.mu - me) <= 1e-10
                   for le, me in TWO_ZGV), (cp.lam, cp.mu)


@criterion(12, "identical seeds give byte-identical command-line reports")
def test_criterion_12(tmp_path):
    argv = [sys.executable, "-m", "eigencurves.cli", "zgv",
            str(FIXTURES / "ex4x4.json"), "--method", "projected",
            "--mode", "2d", "--seed", "5"]
    r1 = subprocess.run(argv, capture_output=True)
    r2 = subprocess.run(argv, capture_output=True)
    assert r1.returncode == r2.returncode == 0
    assert r1.stdout and r1.stdout == r2.stdout

    outs = []
    for name in ("a.json", "b.json"):
        out = tmp_path / name
        r = subprocess.run(
            [sys.executable, "-m", "eigencurves.cli", "zgv",
             str(FIXTURES / "ex2x2.json"), "--method", "mfrd",
             "--seed", "3", "--out", str(out), "--no-plot"],
            capture_output=True)
        assert r.returncode == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    json.loads(outs[0])
