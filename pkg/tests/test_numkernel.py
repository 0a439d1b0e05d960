import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from marxgen.numkernel import (
    KernelError,
    as_dense,
    eig,
    eigenvalue_condition_numbers,
    expm,
    smallest_singular_value,
)


def test_eig_values_of_triangular_matrix():
    A = np.array([[1.0, 5.0, 0.0], [0.0, -2.0, 3.0], [0.0, 0.0, 4.0]])
    got = eig(A).sorted_values()
    assert np.allclose(got, [-2, 1, 4])


def test_eig_left_and_right_vectors():
    rng = np.random.default_rng(3)
    A = rng.normal(size=(6, 6))
    s = eig(A, vectors=True)
    assert np.allclose(A @ s.right, s.right * s.values, atol=1e-12)
    assert np.allclose(s.left.conj().T @ A, s.values[:, None] * s.left.conj().T, atol=1e-12)
    assert np.allclose(np.linalg.norm(s.right, axis=0), 1)
    assert np.allclose(np.linalg.norm(s.left, axis=0), 1)


def test_eig_of_rotation_is_imaginary():
    A = np.array([[0.0, -2.0], [2.0, 0.0]])
    assert np.allclose(sorted(eig(A).values, key=lambda z: z.imag), [-2j, 2j])


@pytest.mark.parametrize("bad", [np.ones((2, 3)), np.ones(3), np.array([[np.nan]])])
def test_input_validation(bad):
    with pytest.raises(ValueError):
        eig(bad)


def test_as_dense_converts_objects():
    from fractions import Fraction
    A = np.array([[Fraction(1, 2)]], dtype=object)
    assert as_dense(A).dtype == float


def test_condition_numbers_normal_matrix_are_one():
    A = np.diag([1.0, 2.0, 3.0])
    _, cond = eigenvalue_condition_numbers(A)
    assert np.allclose(cond, 1.0)


def test_condition_numbers_of_2x2_against_closed_form():
    # [[1, a], [0, 2]]: both eigenvalues have condition sqrt(1 + a^2)
    a = 3.0
    _, cond = eigenvalue_condition_numbers(np.array([[1.0, a], [0.0, 2.0]]))
    assert np.allclose(cond, np.sqrt(1 + a * a))


def test_condition_numbers_invariant_under_scaling():
    rng = np.random.default_rng(1)
    A = rng.normal(size=(5, 5))
    s1, c1 = eigenvalue_condition_numbers(A)
    s2, c2 = eigenvalue_condition_numbers(7.5 * A)
    o1, o2 = np.argsort(s1.values.real), np.argsort(s2.values.real)
    assert np.allclose(c1[o1], c2[o2], rtol=1e-9)


def test_smallest_singular_value_batched():
    A = np.stack([np.diag([3.0, 1.0]), np.diag([0.5, 4.0])])
    assert np.allclose(smallest_singular_value(A), [1.0, 0.5])
    assert smallest_singular_value(np.eye(3) * 2) == pytest.approx(2.0)


def test_expm_rotation():
    A = np.array([[0.0, -1.0], [1.0, 0.0]])
    E = expm(A, np.pi / 2)
    assert np.allclose(E, [[0, -1], [1, 0]], atol=1e-14)


def test_expm_against_eigendecomposition():
    rng = np.random.default_rng(5)
    S = rng.normal(size=(4, 4))
    A = S + S.T
    w, V = np.linalg.eigh(A)
    assert np.allclose(expm(A, 0.3), V @ np.diag(np.exp(0.3 * w)) @ V.T, rtol=1e-12)


def test_expm_refuses_huge_arguments():
    with pytest.raises(KernelError):
        expm(np.eye(2) * 1e7)


@settings(max_examples=30, deadline=None)
@given(arrays(float, (4, 4), elements=st.floats(-5, 5)))
def test_expm_semigroup_property(A):
    assert np.allclose(expm(A, 0.7) @ expm(A, 0.3), expm(A, 1.0), rtol=1e-9, atol=1e-9)


@settings(max_examples=30, deadline=None)
@given(arrays(float, (5, 5), elements=st.floats(-10, 10)))
def test_smallest_singular_value_lower_bounds_eigenvalues(A):
    smin = smallest_singular_value(A)
    assert smin >= 0
    assert smin <= np.min(np.abs(np.linalg.eigvals(A))) + 1e-9
