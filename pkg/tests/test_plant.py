import numpy as np
import pytest

from musweep.errors import DimensionError, InputError, SingularFrequencyError
from musweep.plant import StateSpaceModel, freq_response

from modelgen import random_stable_model

# recorded M(j 9.1661) for the worked example; cross-checked below against a
# direct dense solve and against the resolvent entries
EXAMPLE_OMEGA = 9.1661
EXAMPLE_M = np.array([
    [-0.20582472835006496 + 0.03642999493131649j, 0.0022310745747819113 + 0.19547938758521555j],
    [0.05378005889864438 - 0.6584296369435888j, -0.6398765861907532 + 0.0026150854167474582j],
])


def _direct(model, omega):
    nx = model.n_states
    x = np.column_stack([
        np.linalg.lstsq(1j * omega * np.eye(nx) - model.A, model.B[:, k], rcond=None)[0]
        for k in range(model.n_uncertain)
    ])
    return model.C @ x + model.D


def test_scalar_dc_gain():
    m = StateSpaceModel([[-1.0]], [[1.0]], [[1.0]])
    assert freq_response(m, 0.0) == pytest.approx(np.array([[1.0 + 0j]]))


def test_strictly_proper_rolloff():
    m = StateSpaceModel([[-1.0]], [[1.0]], [[1.0]])
    assert abs(freq_response(m, 1e9)[0, 0]) <= 1e-8


def test_feedthrough_is_added():
    m = StateSpaceModel([[-1.0]], [[1.0]], [[1.0]], [[2.0]])
    assert freq_response(m, 0.0)[0, 0] == pytest.approx(3.0)


def test_example_against_direct_solve(example):
    m = freq_response(example, EXAMPLE_OMEGA)
    assert m.shape == (2, 2)
    np.testing.assert_allclose(m, EXAMPLE_M, rtol=1e-13)
    np.testing.assert_allclose(m, _direct(example, EXAMPLE_OMEGA), rtol=1e-12, atol=1e-14)


def test_example_regression_values(example):
    m = freq_response(example, EXAMPLE_OMEGA)
    # B and C pick states 1 and 4, so M is a scaled 2x2 block of the resolvent
    res = np.linalg.inv(1j * EXAMPLE_OMEGA * np.eye(4) - example.A)
    expected = np.array([[-0.5 * res[0, 0], -0.5 * res[0, 3]],
                         [-1.5 * res[3, 0], -1.5 * res[3, 3]]])
    np.testing.assert_allclose(m, expected, rtol=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_conjugate_symmetry(seed):
    model = random_stable_model(seed)
    for w in (0.3, 2.0, 17.0):
        np.testing.assert_allclose(freq_response(model, -w), np.conj(freq_response(model, w)),
                                   rtol=0, atol=1e-12)


def test_linear_in_c():
    model = random_stable_model(3)
    doubled = StateSpaceModel(model.A, model.B, 2 * model.C)
    np.testing.assert_array_equal(freq_response(doubled, 1.3), 2 * freq_response(model, 1.3))


@pytest.mark.parametrize("seed", range(10))
def test_two_state_cofactor_oracle(seed):
    # (sI - A)^-1 = adj(sI - A) / det(sI - A) for 2x2 A
    model = random_stable_model(seed, n_states=2, n=1)
    (a, b), (c, d) = model.A
    for w in (0.0, 0.7, 5.0):
        s = 1j * w
        det = (s - a) * (s - d) - b * c
        adj = np.array([[s - d, b], [c, s - a]])
        ref = model.C @ (adj / det) @ model.B + model.D
        np.testing.assert_allclose(freq_response(model, w), ref, rtol=1e-9, atol=1e-12)


def test_pole_on_axis_raises_with_frequency():
    model = StateSpaceModel([[0.0, 2.0], [-2.0, 0.0]], [[1.0], [0.0]], [[1.0, 0.0]])
    with pytest.raises(SingularFrequencyError) as info:
        freq_response(model, 2.0)
    assert info.value.omega == 2.0
    assert "2.0" in str(info.value)


def test_nonfinite_frequency():
    with pytest.raises(InputError):
        freq_response(random_stable_model(0), float("nan"))


def test_dimension_checks():
    with pytest.raises(DimensionError, match="square"):
        StateSpaceModel(np.eye(4), np.ones((4, 2)), np.ones((3, 4)))
    with pytest.raises(DimensionError):
        StateSpaceModel(np.ones((3, 4)), np.ones((3, 1)), np.ones((1, 3)))
    with pytest.raises(DimensionError):
        StateSpaceModel(np.eye(2), np.ones((3, 1)), np.ones((1, 2)))
    with pytest.raises(DimensionError):
        StateSpaceModel(np.eye(2), np.ones((2, 1)), np.ones((1, 2)), np.ones((2, 2)))


def test_nonfinite_entry_named():
    a = np.eye(2)
    a[1, 0] = np.inf
    with pytest.raises(InputError, match=r"A\[1\]\[0\]"):
        StateSpaceModel(a, np.ones((2, 1)), np.ones((1, 2)))


def test_default_d_and_read_only():
    model = random_stable_model(1)
    np.testing.assert_array_equal(model.D, np.zeros((2, 2)))
    assert model.n_states == 4 and model.n_uncertain == 2
    with pytest.raises(ValueError):
        model.A[0, 0] = 1.0
