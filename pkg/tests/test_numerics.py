import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from musweep import numerics
from musweep.errors import DimensionError, InputError, SingularMatrixError

from modelgen import random_complex


def _match_multiset(a, b, tol):
    a = list(a)
    for z in b:
        k = int(np.argmin([abs(z - w) for w in a]))
        assert abs(z - a[k]) <= tol
        a.pop(k)


def test_eigenvalues_of_diagonal():
    ev = numerics.eigenvalues(np.diag([2.0, -3.0]))
    assert sorted(ev.real) == [-3.0, 2.0]
    assert np.all(ev.imag == 0)


def test_eigenvalues_of_rotation_generator():
    ev = numerics.eigenvalues([[0, 1], [-1, 0]])
    _match_multiset(ev, [1j, -1j], 1e-14)


@pytest.mark.parametrize("seed", range(5))
def test_eigenvalues_match_characteristic_polynomial_roots(seed):
    rng = np.random.default_rng(seed)
    m = random_complex(rng, (4, 4))
    # coefficients from the Faddeev-LeVerrier recursion, independent of eig
    n = 4
    coef = [1.0 + 0j]
    mk = np.zeros_like(m)
    for k in range(1, n + 1):
        mk = m @ mk + coef[-1] * np.eye(n)
        coef.append(-np.trace(m @ mk) / k)
    roots = np.roots(coef)
    _match_multiset(numerics.eigenvalues(m), roots, 1e-8 * (1 + np.linalg.norm(m)))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2 ** 32 - 1))
def test_eigenvalue_sum_is_trace(n, seed):
    m = random_complex(np.random.default_rng(seed), (n, n))
    total = numerics.eigenvalues(m).sum()
    assert abs(total - np.trace(m)) <= 1e-8 * (1 + np.linalg.norm(m, 2))


def test_eigenvalues_rejects_rectangular():
    with pytest.raises(DimensionError):
        numerics.eigenvalues(np.ones((2, 3)))


def test_max_singular_value_basic():
    assert numerics.max_singular_value(np.zeros((3, 3))) == 0.0
    assert numerics.max_singular_value(np.diag([1.0, -5.0])) == pytest.approx(5.0, rel=1e-15)
    assert numerics.max_singular_value(np.zeros((0, 0))) == 0.0


@pytest.mark.parametrize("seed", range(5))
def test_max_singular_value_rectangular_oracle(seed):
    m = random_complex(np.random.default_rng(seed), (3, 2))
    ref = np.sqrt(np.max(np.linalg.eigvalsh(m.conj().T @ m)))
    assert numerics.max_singular_value(m) == pytest.approx(ref, rel=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.complex_numbers(min_magnitude=1e-3, max_magnitude=1e3))
def test_max_singular_value_scales(seed, c):
    m = random_complex(np.random.default_rng(seed), (3, 3))
    s = numerics.max_singular_value(m)
    assert numerics.max_singular_value(c * m) == pytest.approx(abs(c) * s, rel=1e-12)


def test_solve_identity_and_scaling():
    b = np.array([[1 + 2j, 3], [4, 5j]])
    np.testing.assert_array_equal(numerics.solve(np.eye(2), b), b)
    np.testing.assert_allclose(numerics.solve(2 * np.eye(3), np.eye(3)), 0.5 * np.eye(3))


def test_solve_vector_rhs():
    x = numerics.solve([[2.0, 0.0], [0.0, 4.0]], [2.0, 2.0])
    assert x.shape == (2,)
    np.testing.assert_allclose(x, [1.0, 0.5])


@pytest.mark.parametrize("seed", range(10))
def test_solve_residual(seed):
    rng = np.random.default_rng(seed)
    a = random_complex(rng, (4, 4)) + 4 * np.eye(4)
    b = random_complex(rng, (4, 3))
    x = numerics.solve(a, b)
    resid = np.linalg.norm(a @ x - b, 2)
    assert resid <= 1e-10 * np.linalg.norm(a, 2) * np.linalg.norm(x, 2)


def test_solve_singular_raises_with_condition():
    with pytest.raises(SingularMatrixError) as info:
        numerics.solve([[1.0, 0.0], [0.0, 0.0]], [1.0, 1.0])
    assert info.value.condition == np.inf


def test_solve_shape_mismatch():
    with pytest.raises(DimensionError):
        numerics.solve(np.eye(2), np.ones((3, 1)))


def test_condition_numbers():
    assert numerics.condition_2(np.eye(3)) == 1.0
    assert numerics.condition_2(np.diag([1.0, 1e-3])) == pytest.approx(1e3, rel=1e-12)
    assert numerics.condition_2([[1.0, 0.0], [0.0, 0.0]]) == np.inf
    assert numerics.condition_2(np.zeros((2, 2))) == np.inf


def test_as_complex_matrix_validation():
    assert numerics.as_complex_matrix([5.0]).shape == (1, 1)
    with pytest.raises(DimensionError):
        numerics.as_complex_matrix(np.ones((2, 2, 2)))
    with pytest.raises(InputError):
        numerics.as_complex_matrix([[1.0, np.nan]])
