import itertools
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pairloss.fock import (
    DensityMatrix,
    InvalidDimensionError,
    TruncatedSpace,
    basis_projector,
    coherent_state,
    embed,
    ladder_lower,
    momentum_squared,
    number_operator,
    product_density,
    quadrature_power,
    tensor_product,
)


def test_ladder_m2():
    assert np.array_equal(ladder_lower(2), np.array([[0, 1], [0, 0]]))


def test_ladder_entry():
    assert ladder_lower(3)[1, 2] == pytest.approx(math.sqrt(2))


def test_number_from_ladder():
    a = ladder_lower(4)
    assert np.allclose(a.conj().T @ a, np.diag([0, 1, 2, 3]))
    assert np.array_equal(number_operator(4), np.diag([0, 1, 2, 3]))


@pytest.mark.parametrize("M", [2, 5, 10])
def test_commutator_truncation_pattern(M):
    a = ladder_lower(M)
    expected = np.eye(M)
    expected[M - 1, M - 1] -= M
    # sqrt(n)**2 is not always exactly n in floating point
    assert np.allclose(a @ a.conj().T - a.conj().T @ a, expected, atol=1e-14, rtol=0)


def test_small_dimension_rejected():
    with pytest.raises(InvalidDimensionError):
        ladder_lower(1)
    with pytest.raises(InvalidDimensionError):
        coherent_state(0.5, 1)
    with pytest.raises(InvalidDimensionError):
        TruncatedSpace(1)


def test_space_dims():
    assert TruncatedSpace(10).total_dim == 100
    assert TruncatedSpace(3, 1).total_dim == 3
    assert TruncatedSpace(4).index(2, 3) == 11


def test_tensor_identity_and_slow_index():
    assert np.array_equal(tensor_product(np.eye(2), np.eye(2)), np.eye(4))
    assert np.array_equal(tensor_product(np.diag([0, 1]), np.eye(2)), np.diag([0, 0, 1, 1]))


def test_tensor_requires_square():
    with pytest.raises(InvalidDimensionError):
        tensor_product(np.ones((2, 3)), np.eye(2))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_mixed_product(n, m, seed):
    rng = np.random.default_rng(seed)
    A, C = (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)) for _ in range(2))
    B, D = (rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m)) for _ in range(2))
    lhs = tensor_product(A, B) @ tensor_product(C, D)
    assert np.allclose(lhs, tensor_product(A @ C, B @ D), atol=1e-12, rtol=0)


def test_basis_indexing_exhaustive():
    rng = np.random.default_rng(0)
    A, B = rng.normal(size=(3, 3)), rng.normal(size=(3, 3))
    AB = tensor_product(A, B)
    space = TruncatedSpace(3)
    for n, i, n2, i2 in itertools.product(range(3), repeat=4):
        assert AB[space.index(n, i), space.index(n2, i2)] == A[n, n2] * B[i, i2]


def test_embed_modes():
    space = TruncatedSpace(3)
    n = number_operator(3)
    assert np.array_equal(np.diag(embed(n, 1, space)).real, [0, 0, 0, 1, 1, 1, 2, 2, 2])
    assert np.array_equal(np.diag(embed(n, 2, space)).real, [0, 1, 2] * 3)


def test_vacuum_coherent():
    psi = coherent_state(0, 5)
    assert np.array_equal(psi.amplitudes, [1, 0, 0, 0, 0])


def test_coherent_weights_and_deficit():
    psi = coherent_state(1, 10)
    tail = 1 - sum(math.exp(-1) / math.factorial(n) for n in range(10))
    assert abs(psi.amplitudes[0]) ** 2 == pytest.approx(math.exp(-1) / (1 - tail), rel=1e-12)
    assert abs(abs(psi.amplitudes[0]) ** 2 - math.exp(-1)) < 1e-7
    # the Poisson tail beyond n = 9 is e^-1 (1/10! + 1/11! + ...) = 1.1143e-7
    assert psi.norm_deficit == pytest.approx(tail, rel=1e-6)
    assert psi.norm_deficit == pytest.approx(1.1143e-7, rel=1e-4)


@given(st.complex_numbers(max_magnitude=1.5, allow_nan=False, allow_infinity=False))
def test_coherent_normalised(alpha):
    psi = coherent_state(alpha, 10)
    assert abs(np.linalg.norm(psi.amplitudes) - 1) < 1e-14


def test_coherent_warns_when_large():
    with pytest.warns(UserWarning):
        coherent_state(2, 10)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        coherent_state(1, 10)


def test_product_density():
    rho = product_density(coherent_state(0, 4), coherent_state(0, 4)).matrix
    expected = np.zeros((16, 16))
    expected[0, 0] = 1
    assert np.array_equal(rho, expected)
    rho = product_density(coherent_state(1, 10), coherent_state(0, 10))
    k = rho.space.index(1, 0)
    assert rho.matrix[k, k].real == pytest.approx(math.exp(-1), abs=1e-7)
    assert rho.trace == pytest.approx(1, abs=1e-15)
    assert rho.hermiticity_error() == 0


def test_product_density_cutoff_mismatch():
    with pytest.raises(InvalidDimensionError):
        product_density(coherent_state(1, 4), coherent_state(1, 5))


def test_density_rejects_bad_matrix():
    with pytest.raises(InvalidDimensionError):
        DensityMatrix(TruncatedSpace(2), np.eye(3))
    with pytest.raises(FloatingPointError):
        DensityMatrix(TruncatedSpace(2), np.full((4, 4), np.nan))


def test_basis_projector():
    rho = basis_projector(TruncatedSpace(3), 2, 1)
    assert rho.matrix[7, 7] == 1 and rho.trace == 1


def test_exact_projection_of_powers():
    # top-level diagonal of x^2 is 2n + 1 with no hard-wall defect
    M = 6
    assert np.allclose(np.diag(quadrature_power(M, 2)), 2 * np.arange(M) + 1)
    assert np.allclose(np.diag(quadrature_power(M, 4)), 6 * np.arange(M) ** 2 + 6 * np.arange(M) + 3)
    assert np.allclose(np.diag(momentum_squared(M)), -(2 * np.arange(M) + 1))
