import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mves import linalg
from mves.errors import DimensionError, SingularMatrixError, ValidationError

from oracles import cofactor_determinant


def test_determinant_identity():
    assert linalg.determinant(np.eye(3)) == 1.0


def test_determinant_2x2():
    assert linalg.determinant([[2.0, 1.0], [1.0, 2.0]]) == pytest.approx(3.0, abs=1e-14)


def test_determinant_vs_cofactor_oracle():
    rng = np.random.default_rng(0)
    for _ in range(30):
        a = rng.standard_normal((5, 5))
        want = cofactor_determinant(a)
        got = linalg.determinant(a)
        assert got == pytest.approx(want, rel=1e-10)


def test_determinant_singular_is_zero():
    a = np.ones((3, 3))
    assert linalg.determinant(a) == 0.0


def test_determinant_rejects_nonsquare():
    with pytest.raises(DimensionError):
        linalg.determinant(np.ones((2, 3)))


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 8), st.integers(0, 10_000))
def test_determinant_product_rule(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n))
    b = rng.standard_normal((n, n))
    lhs = linalg.determinant(a @ b)
    rhs = linalg.determinant(a) * linalg.determinant(b)
    assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-12)


def test_solve_identity():
    b = np.array([1.0, -2.0, 3.0])
    assert np.allclose(linalg.solve_linear(np.eye(3), b), b)


def test_solve_diagonal():
    x = linalg.solve_linear([[2.0, 0.0], [0.0, 4.0]], [2.0, 8.0])
    assert np.allclose(x, [1.0, 2.0])


def test_solve_residual_bound_many_instances():
    rng = np.random.default_rng(1)
    for _ in range(1000):
        a = rng.standard_normal((6, 6)) + 3.0 * np.eye(6)
        b = rng.standard_normal(6)
        x = linalg.solve_linear(a, b)
        norm_a = np.linalg.norm(a)
        resid = np.linalg.norm(a @ x - b)
        assert resid <= 1e-9 * (norm_a * np.linalg.norm(x) + np.linalg.norm(b))


def test_solve_singular_reports_pivot():
    a = np.array([[1.0, 2.0], [2.0, 4.0]])
    with pytest.raises(SingularMatrixError) as err:
        linalg.solve_linear(a, [1.0, 1.0])
    assert err.value.pivot_index == 1


def test_solve_rejects_nan():
    with pytest.raises(ValidationError):
        linalg.solve_linear([[np.nan, 0.0], [0.0, 1.0]], [1.0, 1.0])


def test_inverse_roundtrip():
    rng = np.random.default_rng(2)
    a = rng.standard_normal((5, 5)) + 2.0 * np.eye(5)
    assert np.max(np.abs(linalg.inverse(a) @ a - np.eye(5))) < 1e-10


def test_thin_svd_diagonal():
    _, s, _ = linalg.thin_svd(np.diag([3.0, 1.0]))
    assert np.allclose(s, [3.0, 1.0])


def test_thin_svd_rank_one():
    u = np.array([1.0, 2.0, -1.0])
    v = np.array([0.5, 1.5])
    _, s, _ = linalg.thin_svd(np.outer(u, v))
    assert s[1] <= 1e-12 * s[0]


def test_thin_svd_orthonormal_and_reconstructs():
    rng = np.random.default_rng(3)
    m = rng.standard_normal((10, 4))
    u, s, v = linalg.thin_svd(m)
    assert np.max(np.abs(u.T @ u - np.eye(4))) < 1e-10
    assert np.max(np.abs(v.T @ v - np.eye(4))) < 1e-10
    assert np.all(np.diff(s) <= 1e-12)
    recon = u @ np.diag(s) @ v.T
    assert np.max(np.abs(recon - m)) <= 1e-9 * np.linalg.norm(m)


def test_random_orthogonal_is_orthogonal():
    rng = np.random.default_rng(4)
    for n in (1, 2, 3, 5):
        q = linalg.random_orthogonal(n, rng)
        assert np.max(np.abs(q.T @ q - np.eye(n))) < 1e-12
