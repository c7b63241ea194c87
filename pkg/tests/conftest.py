"""Shared fixtures: the 4-vertex worked example and seeded random models."""

import numpy as np
import pytest

from netred import validate

# 4-vertex mass-damper-spring network used as a worked example throughout.
EX1_M = np.array([1.0, 2.0, 1.0, 2.0])
EX1_D = np.array(
    [
        [4.0, -2.0, 0.0, -1.0],
        [-2.0, 2.0, 0.0, 0.0],
        [0.0, 0.0, 3.5, -3.0],
        [-1.0, 0.0, -3.0, 4.0],
    ]
)
EX1_L = np.array(
    [
        [4.0, -1.0, -2.0, -1.0],
        [-1.0, 3.0, -1.0, -1.0],
        [-2.0, -1.0, 5.0, -2.0],
        [-1.0, -1.0, -2.0, 4.0],
    ]
)
EX1_F = np.array([[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 1.0]])

# Its reduction under the clustering {{1}, {2}, {3, 4}}.
EX1_PARTITION = ((1,), (2,), (3, 4))
EX1_M_HAT = np.array([1.0, 2.0, 3.0])
EX1_D_HAT = np.array([[4.0, -2.0, -1.0], [-2.0, 2.0, 0.0], [-1.0, 0.0, 1.5]])
EX1_L_HAT = np.array([[4.0, -1.0, -3.0], [-1.0, 3.0, -2.0], [-3.0, -2.0, 5.0]])
EX1_F_HAT = np.array([[1.0, 0.0], [0.0, 0.0], [0.0, 1.0]])


@pytest.fixture
def ex1():
    return validate(EX1_M, EX1_D, EX1_L, EX1_F)


def random_network(n, m=2, seed=0, alpha=0.8):
    """Small dense random network satisfying all structural conditions.

    Builds a complete weighted graph Laplacian for the stiffness, a second
    one plus vertex dampers for the damping, and a uniform input matrix.
    """
    rng = np.random.default_rng(seed)
    m_diag = rng.uniform(0.5, 3.0, n)

    def rand_laplacian():
        w = rng.uniform(0.2, 1.5, (n, n))
        w = np.triu(w, 1)
        w = w + w.T
        return np.diag(w.sum(axis=1)) - w

    l = rand_laplacian()
    d = rand_laplacian() + np.diag(alpha * m_diag)
    f = rng.uniform(-1.0, 1.0, (n, m))
    return validate(m_diag, d, l, f)


def swap_symmetric_pair():
    """2-vertex network invariant under exchanging the vertices."""
    m = np.array([2.0, 2.0])
    d = np.array([[3.0, -1.0], [-1.0, 3.0]])
    l = np.array([[1.5, -1.5], [-1.5, 1.5]])
    f = np.array([[0.7], [0.7]])
    return validate(m, d, l, f)


def kron_sylvester_matrix(a, b):
    """Matrix of X -> a X + X b under column-stacking vectorization."""
    n1, n2 = a.shape[0], b.shape[0]
    return np.kron(np.eye(n2), a) + np.kron(b.T, np.eye(n1))


def vec(x):
    return np.asarray(x).reshape(-1, order="F")


def unvec(v, shape):
    return np.asarray(v).reshape(shape, order="F")


def kron_solve(a, b, c):
    """Dense Kronecker solve of a X + X b + c = 0 (unique-solution case)."""
    k = kron_sylvester_matrix(a, b)
    return unvec(np.linalg.solve(k, -vec(c)), c.shape)


def kron_lstsq(a, b, c):
    """Minimum-norm least-squares particular solution of a X + X b + c = 0."""
    k = kron_sylvester_matrix(a, b)
    x, *_ = np.linalg.lstsq(k, -vec(c), rcond=None)
    return unvec(x, c.shape)
