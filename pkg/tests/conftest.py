"""Shared example matrices used across the test modules.

The small pencils here have hand-checkable characteristic polynomials; the
larger ones carry well-studied critical point sets whose coordinates are
frozen in the tests that use them.
"""

from __future__ import annotations

import numpy as np
import pytest

from eigencurves.pencil import BivariatePencil


def pencil_2x2() -> BivariatePencil:
    # det(A + lam B + mu C) = lam^2 - 2 lam mu + 4 mu^2 - 3 lam
    A = np.array([[3.0, 0.0], [0.0, 0.0]])
    B = np.array([[0.0, 1.0], [-1.0, -1.0]])
    C = np.array([[-2.0, -2.0], [2.0, 0.0]])
    return BivariatePencil(A, B, C)


def pencil_4x4() -> BivariatePencil:
    A = np.array([
        [1.0, 2.0, 3.0, 0.0],
        [2.0, 0.0, 1.0, 0.0],
        [3.0, 1.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, -3.0],
    ])
    B = np.array([
        [1.0, 0.0, 1.0, 0.0],
        [0.0, 1.0, 1.0, 0.0],
        [1.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, -3.0],
    ])
    C = np.array([
        [2.0, 1.0, 0.0, 0.0],
        [1.0, 3.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ])
    return BivariatePencil(A, B, C)


def pencil_type_b() -> BivariatePencil:
    # det = (lam + mu)(lam + 2 mu); only critical point is (0, 0), of kind 2d-b
    A = np.array([[0.0, 1.0], [0.0, 0.0]])
    B = np.eye(2)
    C = np.diag([1.0, 2.0])
    return BivariatePencil(A, B, C)


def hermitian_pair_3x3() -> tuple[np.ndarray, np.ndarray]:
    A = np.array([[2.0, 0.0, 1.0], [0.0, 0.0, 1.0], [1.0, 1.0, 0.0]])
    B = np.array([[1.0, 0.0, 1.0], [0.0, 1.0, 1.0], [1.0, 1.0, 0.0]])
    return A, B


def stable_tridiag_4x4() -> np.ndarray:
    return np.array([
        [-0.4 + 6.0j, 1.0, 0.0, 0.0],
        [1.0, -0.1 + 1.0j, 1.0, 0.0],
        [0.0, 1.0, -1.0 - 3.0j, 1.0],
        [0.0, 0.0, 1.0, -5.0 + 1.0j],
    ])


def qep_matrices() -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    L2 = np.array([[-1.0, 0.5, 0.0], [0.5, -2.0, 0.5], [0.0, 0.5, -3.0]])
    L1 = np.array([[1.0, -0.25, 0.0], [-0.25, 2.0, -0.25], [0.0, -0.25, -3.0]])
    L0 = np.diag([-1.0, -2.0, -3.0])
    M = np.array([[2.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 4.0]])
    return L0, L1, L2, M


def pentadiag_matrices(n: int = 10) -> tuple[np.ndarray, np.ndarray]:
    A = 5.0 * np.eye(n) + np.eye(n, k=2) + np.eye(n, k=-2)
    B = 0.5 * np.eye(n) + np.eye(n, k=1) + np.eye(n, k=-1)
    return A, B


def random_pencil(n: int, seed: int, complex_entries: bool = True) -> BivariatePencil:
    rng = np.random.default_rng(seed)

    def draw():
        M = rng.standard_normal((n, n))
        if complex_entries:
            M = M + 1j * rng.standard_normal((n, n))
        return M

    return BivariatePencil(draw(), draw(), draw())


@pytest.fixture
def ex2x2():
    return pencil_2x2()


@pytest.fixture
def ex4x4():
    return pencil_4x4()


@pytest.fixture
def typeb():
    return pencil_type_b()
