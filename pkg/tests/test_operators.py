import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from infospec.operators import (
    SubsystemShape,
    bell_state,
    binary_entropy,
    diag_state,
    eig,
    embed_with_identity,
    partial_trace,
    permute_subsystems,
    positive_part_trace,
    random_density_matrix,
    random_hermitian,
    relative_projection,
    spectral_projection,
    tensor,
    tensor_power,
    von_neumann_entropy,
)
from infospec.validation import check_density_matrix, check_hermitian, check_random_state

seeds = st.integers(0, 2**32 - 1)


def test_eig_ascending_and_unitary():
    h = random_hermitian(5, 3)
    w, v = eig(h)
    assert np.all(np.diff(w) >= 0)
    assert np.abs(v.conj().T @ v - np.eye(5)).max() < 1e-12
    assert np.abs((v * w) @ v.conj().T - h).max() < 1e-12


def test_spectral_projection_ties():
    a = np.diag([1.0, 0.0, -1.0])
    assert np.abs(spectral_projection(a, ">=") - np.diag([1, 1, 0])).max() < 1e-15
    assert np.abs(spectral_projection(a, ">") - np.diag([1, 0, 0])).max() < 1e-15
    assert np.abs(spectral_projection(a, "<=") - np.diag([0, 1, 1])).max() < 1e-15
    assert np.abs(spectral_projection(a, "<") - np.diag([0, 0, 1])).max() < 1e-15
    with pytest.raises(ValueError):
        spectral_projection(a, "=>")


def test_relative_projection_example():
    a = np.array([[1.0, 0], [0, 0.2]])
    b = 0.5 * np.eye(2)
    assert np.abs(relative_projection(a, b) - np.diag([1, 0])).max() < 1e-15
    with pytest.raises(ValueError):
        relative_projection(a, np.eye(3))


def test_positive_part_trace_example():
    assert abs(positive_part_trace(np.diag([0.7, -0.2, 0.1])) - 0.8) < 1e-15


def test_partial_trace_bell():
    rho = bell_state(0)
    assert np.abs(partial_trace(rho, (2, 2), [0]) - np.eye(2) / 2).max() < 1e-15
    assert np.abs(partial_trace(rho, (2, 2), [0, 1]) - rho).max() < 1e-15
    assert abs(partial_trace(rho, (2, 2), []).item() - 1) < 1e-15


def test_partial_trace_product_keeps_order():
    rng = check_random_state(1)
    a, b, c = (random_density_matrix(d, rng) for d in (2, 3, 2))
    full = tensor(a, b, c)
    assert np.abs(partial_trace(full, (2, 3, 2), [0, 2]) - np.kron(a, c)).max() < 1e-12
    assert np.abs(partial_trace(full, (2, 3, 2), [1]) - b).max() < 1e-12
    with pytest.raises(ValueError):
        partial_trace(full, (2, 2, 2), [0])


def test_permute_and_embed():
    rng = check_random_state(2)
    a, b = random_density_matrix(2, rng), random_density_matrix(3, rng)
    swapped = permute_subsystems(np.kron(a, b), (2, 3), [1, 0])
    assert np.abs(swapped - np.kron(b, a)).max() < 1e-12
    emb = embed_with_identity(b, SubsystemShape((2, 3)), [1])
    assert np.abs(emb - np.kron(np.eye(2), b)).max() < 1e-12


def test_tensor_power_and_shape():
    x = np.diag([1.0, 2.0])
    assert np.abs(tensor_power(x, 3) - tensor(x, x, x)).max() < 1e-15
    assert SubsystemShape((2, 3)).repeat(2).factor_dims == (2, 3, 2, 3)
    with pytest.raises(ValueError):
        SubsystemShape((2, 0))
    with pytest.raises(ValueError):
        tensor_power(x, 0)


def test_entropies():
    assert abs(von_neumann_entropy(np.eye(4) / 4) - np.log(4)) < 1e-14
    assert abs(von_neumann_entropy(bell_state(1))) < 1e-12
    assert abs(von_neumann_entropy(diag_state([0.25, 0.75])) - binary_entropy(0.25)) < 1e-14
    assert abs(von_neumann_entropy(np.eye(2) / 2, base=2) - 1) < 1e-14


def test_validation_rejects():
    with pytest.raises(ValueError):
        check_hermitian(np.array([[0, 1], [0, 0]]))
    with pytest.raises(ValueError):
        check_density_matrix(np.diag([0.6, 0.6]))
    with pytest.raises(ValueError):
        check_density_matrix(np.diag([1.2, -0.2]))


def test_random_state_is_reproducible():
    a = random_density_matrix(3, 7)
    b = random_density_matrix(3, 7)
    assert np.abs(a - b).max() == 0
    assert np.abs(random_density_matrix(3, 8) - a).max() > 1e-3


@settings(max_examples=60, deadline=None)
@given(seed=seeds, d=st.integers(1, 6))
def test_spectral_projection_is_projector(seed, d):
    h = random_hermitian(d, seed)
    p = spectral_projection(h, ">=")
    q = spectral_projection(h, "<")
    assert np.abs(p @ p - p).max() < 1e-10
    assert np.abs(p + q - np.eye(d)).max() < 1e-10
    assert np.abs(p @ h - h @ p).max() < 1e-10


@settings(max_examples=60, deadline=None)
@given(seed=seeds)
def test_positive_part_matches_svd_oracle(seed):
    h = random_hermitian(5, seed)
    oracle = 0.5 * (np.trace(h).real + np.linalg.svd(h, compute_uv=False).sum())
    assert abs(positive_part_trace(h) - oracle) < 1e-10


@settings(max_examples=60, deadline=None)
@given(seed=seeds, a=st.floats(-3, 3), b=st.floats(-3, 3))
def test_partial_trace_linear_and_trace_preserving(seed, a, b):
    rng = check_random_state(seed)
    x, y = random_hermitian(12, rng), random_hermitian(12, rng)
    for keep in ([0], [1], [0, 2], [2]):
        lhs = partial_trace(a * x + b * y, (2, 3, 2), keep)
        rhs = a * partial_trace(x, (2, 3, 2), keep) + b * partial_trace(y, (2, 3, 2), keep)
        assert np.abs(lhs - rhs).max() < 1e-10
        assert abs(np.trace(partial_trace(x, (2, 3, 2), keep)) - np.trace(x)) < 1e-10
