import numpy as np
import pytest

from eigencurves.linalg import numerical_rank, spectral_norm
from eigencurves.pencil import BivariatePencil
from eigencurves.singgep import (
    ProjectedPencilSingular,
    normal_rank_estimate,
    singular_gep_eigenvalues,
)
from eigencurves.twopar import build_deltas, build_zgv_problem

from conftest import random_pencil


def zgv_deltas(P):
    return build_deltas(build_zgv_problem(P))


def test_normal_rank_random_pencils():
    # generic bivariate pencils: rank of the critical-point pencil is 2n^2 - n
    for n in (2, 3, 4):
        P = random_pencil(n, seed=100 + n)
        D = zgv_deltas(P)
        k = normal_rank_estimate(D.d1, D.d0, expected=2 * n * n - n)
        assert k == 2 * n * n - n


def test_normal_rank_regular_pencil_is_full():
    rng = np.random.default_rng(5)
    d1 = rng.standard_normal((4, 4))
    d0 = rng.standard_normal((4, 4))
    assert normal_rank_estimate(d1, d0) == 4


def test_regular_pencil_recovered_exactly():
    # projection of an already-regular pencil must accept every eigenvalue
    d0 = np.eye(3)
    d1 = np.diag([1.0, -2.0, 0.5])
    out = singular_gep_eigenvalues(d1, d0, nrank=3, seed=7)
    accepted = sorted(f.lam.real for f in out if f.accepted)
    assert len(out) == 3 and len(accepted) == 3
    assert np.allclose(accepted, [-2.0, 0.5, 1.0], atol=1e-10)


def test_2x2_accepted_lambdas(ex2x2):
    D = zgv_deltas(ex2x2)
    nrank = normal_rank_estimate(D.d1, D.d0, expected=6)
    out = singular_gep_eigenvalues(D.d1, D.d0, nrank, seed=3)
    assert len(out) == nrank
    acc = sorted(f.lam.real for f in out if f.accepted)
    assert len(acc) == 2
    assert np.allclose(acc, [1.0, 3.0], atol=1e-8)
    assert all(abs(f.lam.imag) < 1e-8 for f in out if f.accepted)


def test_2x2_rejected_have_bad_filters(ex2x2):
    D = zgv_deltas(ex2x2)
    out = singular_gep_eigenvalues(D.d1, D.d0, nrank=6, seed=3)
    n1 = spectral_norm(D.d1)
    n0 = spectral_norm(D.d0)
    for f in out:
        if f.accepted or f.infinite:
            continue
        a, b, g = f.normalized(n1, n0)
        # at least one filter fails decisively for the random junk
        assert max(a, b) > 1e-6 or g < 1e-12


def test_accepted_lambda_drops_rank(ex2x2):
    D = zgv_deltas(ex2x2)
    out = singular_gep_eigenvalues(D.d1, D.d0, nrank=6, seed=11)
    for f in out:
        if not f.accepted:
            continue
        r = numerical_rank(D.d1 - f.lam * D.d0, rel_tol=1e-8)
        assert r < 6


def test_4x4_accepted_set(ex4x4):
    # nine critical lambdas: six simple ones plus three curve intersections
    # that show up with multiplicity four in the doubled-problem spectrum
    D = zgv_deltas(ex4x4)
    nrank = normal_rank_estimate(D.d1, D.d0, expected=28)
    assert nrank == 28
    out = singular_gep_eigenvalues(D.d1, D.d0, nrank, seed=1)
    acc = sorted((f.lam for f in out if f.accepted),
                 key=lambda z: (z.real, z.imag))
    assert len(acc) == 18

    distinct: list[complex] = []
    for z in acc:
        if not any(abs(z - w) < 1e-6 * (1 + abs(w)) for w in distinct):
            distinct.append(z)
    assert len(distinct) == 9

    from eigencurves.oracle import zgv_oracle
    simple = sorted((lam for lam, _ in zgv_oracle(ex4x4)),
                    key=lambda z: (z.real, z.imag))
    assert len(simple) == 6
    for lam in simple:
        assert min(abs(lam - z) for z in distinct) < 1e-6
    for lam in (-1.5330, -1.0, -0.3565):
        assert min(abs(lam - z) for z in distinct) < 1e-3
    # the intersection at lambda = -1 is exact
    assert min(abs(-1.0 - z) for z in distinct) < 1e-6


def test_seed_stability(ex2x2):
    D = zgv_deltas(ex2x2)
    key = lambda z: (z.real, z.imag)
    a = singular_gep_eigenvalues(D.d1, D.d0, nrank=6, seed=2)
    b = singular_gep_eigenvalues(D.d1, D.d0, nrank=6, seed=42)
    sa = sorted((f.lam for f in a if f.accepted), key=key)
    sb = sorted((f.lam for f in b if f.accepted), key=key)
    assert len(sa) == len(sb) == 2
    for u, v in zip(sa, sb):
        assert abs(u - v) < 1e-6


def test_bad_nrank_raises():
    d0 = np.eye(3)
    d1 = np.diag([1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        singular_gep_eigenvalues(d1, d0, nrank=0)
    with pytest.raises(ValueError):
        singular_gep_eigenvalues(d1, d0, nrank=4)


def test_overestimated_nrank_rejected_or_raises(ex2x2):
    # claim full rank for a singular pencil: the projection is near-singular,
    # so either it raises or the junk eigenvalues all fail the filters
    D = zgv_deltas(ex2x2)
    try:
        out = singular_gep_eigenvalues(D.d1, D.d0, nrank=8, seed=0)
    except ProjectedPencilSingular:
        return
    acc = [f for f in out if f.accepted]
    real_parts = sorted(f.lam.real for f in acc)
    for r in real_parts:
        assert min(abs(r - 1.0), abs(r - 3.0)) < 1e-6
