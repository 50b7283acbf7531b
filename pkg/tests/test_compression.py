import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from infospec.compression import (
    EmptyProjectorError,
    achievability_bound,
    best_case_fidelity,
    best_case_scheme,
    build_scheme,
    converse_fidelity_bound,
    mixed_chain,
    mixed_projector,
    mixed_rate_estimate,
    rate_budget,
    scheme_fidelity,
    strong_converse_probe,
    threshold_fidelity,
    tightest_converse_bound,
)
from infospec.operators import (
    binary_entropy,
    diag_state,
    projector_onto,
    random_density_matrix,
    tensor_power,
)
from infospec.spectrum import SourceSequence

EPS = 0.01
BISECT_TOL = 8 / 63 / 2**10 + 1e-9
H25 = binary_entropy(0.25)


def test_pure_state_compresses_perfectly():
    rho = projector_onto(np.array([0.6, 0.8]))
    scheme = build_scheme(rho, 1, 0.1)
    assert scheme.rank == 1
    assert abs(scheme_fidelity(rho, scheme) - 1) < 1e-12


def test_maximally_mixed_keeps_everything_above_log_d():
    rho = tensor_power(np.eye(2) / 2, 3)
    scheme = build_scheme(rho, 3, np.log(2) + 0.01)
    assert scheme.rank == 8
    assert abs(scheme_fidelity(rho, scheme) - 1) < 1e-12
    with pytest.raises(EmptyProjectorError):
        build_scheme(rho, 3, np.log(2) - 0.01)


def test_single_qubit_fidelity_closed_form():
    # keep |0> only: F = 0.9^2 + <0|rho (I-P) rho|0> = 0.81
    rho = diag_state([0.9, 0.1])
    scheme = build_scheme(rho, 1, -np.log(0.5))
    assert scheme.rank == 1
    assert abs(scheme_fidelity(rho, scheme) - 0.81) < 1e-14


def test_kraus_and_closed_form_agree():
    rho = tensor_power(random_density_matrix(2, 4), 3)
    scheme = best_case_scheme(rho, 3, np.log(3) / 3)
    a = scheme_fidelity(rho, scheme, "kraus")
    b = scheme_fidelity(rho, scheme, "closed")
    assert abs(a - b) < 1e-12
    with pytest.raises(ValueError):
        scheme_fidelity(rho, scheme, "bogus")


def test_compress_map_is_trace_preserving():
    rho = random_density_matrix(4, 2)
    scheme = best_case_scheme(rho, 2, np.log(2) / 2)
    sigma = random_density_matrix(4, 3)
    assert abs(np.trace(scheme.compress(sigma)) - 1) < 1e-12
    out = sum(k @ sigma @ k.conj().T for k in scheme.encoder.kraus_ops)
    assert np.abs(out - scheme.compress(sigma)).max() < 1e-12


def test_rate_budget():
    assert rate_budget(4, np.log(3) / 4, 16) == 3
    assert rate_budget(4, -1.0, 16) == 1
    assert rate_budget(4, 5.0, 16) == 16


def test_threshold_scheme_obeys_achievability_bound():
    rng = np.random.default_rng(6)
    for _ in range(20):
        rho = tensor_power(random_density_matrix(2, rng), 3)
        gamma = float(rng.uniform(0.1, 0.8))
        try:
            scheme = build_scheme(rho, 3, gamma)
        except EmptyProjectorError:
            continue
        assert scheme_fidelity(rho, scheme) >= achievability_bound(rho, 3, gamma) - 1e-12
        # rank bound from the threshold
        assert scheme.rank <= np.exp(3 * gamma) + 1e-9


def test_any_small_scheme_obeys_converse():
    rho = tensor_power(diag_state([0.25, 0.75]), 6)
    rate = H25 - 0.15
    for g in np.linspace(rate, rate + 0.8, 9):
        bound = converse_fidelity_bound(rho, 6, rate, g)
        assert scheme_fidelity(rho, best_case_scheme(rho, 6, rate)) <= bound + 1e-12
    best, _ = tightest_converse_bound(rho, 6, rate, np.linspace(rate, rate + 0.8, 9))
    assert scheme_fidelity(rho, best_case_scheme(rho, 6, rate)) <= best + 1e-12


def test_source_fidelities_match_dense():
    src = SourceSequence.iid(diag_state([0.25, 0.75]))
    dense = SourceSequence.general(src.generator)
    for n in (3, 6):
        f1, m1 = best_case_fidelity(src, n, H25 + 0.1)
        f2, m2 = best_case_fidelity(dense, n, H25 + 0.1)
        assert m1 == m2 and abs(f1 - f2) < 1e-12
        t1, r1 = threshold_fidelity(src, n, H25 + 0.1)
        t2, r2 = threshold_fidelity(dense, n, H25 + 0.1)
        assert r1 == r2 and abs(t1 - t2) < 1e-12


def test_strong_converse_frozen_values():
    # squared top-mass of diag(.25,.75)^{⊗n} with floor(e^{n(h-0.2)}) kept eigenvalues
    src = SourceSequence.iid(diag_state([0.25, 0.75]))
    rows = strong_converse_probe(src, H25 - 0.2, [4, 8, 12])
    fids = np.array([r["fidelity"] for r in rows])
    assert [r["rank"] for r in rows] == [4, 18, 77]
    expected = []
    for n, m in zip((4, 8, 12), (4, 18, 77)):
        lam = np.sort(np.prod(np.array(np.meshgrid(*[[0.25, 0.75]] * n)).reshape(n, -1), axis=0))[::-1]
        expected.append(lam[:m].sum() ** 2)
    assert np.abs(fids - expected).max() < 1e-12
    assert np.all(np.diff(fids) < 0)


def test_mixed_projector_orthogonal_supports():
    sigma = diag_state([1, 0, 0, 0])
    omega = diag_state([0, 0, 0.5, 0.5])
    mp = mixed_projector(sigma, omega, 1, np.log(4))
    assert mp.ranks == (1, 2, 3)
    assert np.abs(mp.pk - diag_state([1, 0, 1, 1])).max() < 1e-12


def test_mixed_projector_identical_components():
    rho = random_density_matrix(4, 1)
    mp = mixed_projector(rho, rho, 1, 1.0)
    assert np.abs(mp.pk - mp.p0).max() < 1e-10
    assert mp.ranks[2] == mp.ranks[0]


def test_mixture_linearity_of_threshold_mass():
    # Tr[PK rho] splits into t Tr[PK sigma] + (1 - t) Tr[PK omega]
    rng = np.random.default_rng(3)
    sigma, omega = random_density_matrix(4, rng), random_density_matrix(4, rng)
    t = 0.3
    mp = mixed_projector(sigma, omega, 1, 1.0)
    lhs = np.trace(mp.pk @ (t * sigma + (1 - t) * omega)).real
    rhs = t * np.trace(mp.pk @ sigma).real + (1 - t) * np.trace(mp.pk @ omega).real
    assert abs(lhs - rhs) < 1e-12
    assert np.trace(mp.pk @ sigma).real >= np.trace(mp.p0 @ sigma).real - 1e-12


def test_mixed_rate_estimate_closed_form():
    # pure component and the maximally mixed qubit
    first = SourceSequence.iid(diag_state([1.0, 0.0]))
    second = SourceSequence.iid(np.eye(2) / 2)
    (row,) = mixed_rate_estimate(first, second, 0.5, [12], epsilon=EPS)
    assert abs(row.optimal_rate - (np.log(2) - np.log(EPS) / 12)) < BISECT_TOL
    assert abs(row.strong_converse_rate - (-np.log(1 - EPS) / 12)) < BISECT_TOL
    with pytest.raises(ValueError):
        mixed_rate_estimate(first, second, 1.0, [2])


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), t=st.floats(0.05, 0.95), n=st.integers(1, 2))
def test_mixed_chain_property(seed, t, n):
    rng = np.random.default_rng(seed)
    sigma = tensor_power(random_density_matrix(2, rng), n)
    omega = tensor_power(random_density_matrix(2, rng), n)
    alpha = float(rng.uniform(0, 1))
    gamma = alpha + float(rng.uniform(0, 1))
    lhs, rhs = mixed_chain(sigma, omega, t, n, alpha, gamma)
    assert lhs >= rhs - 1e-10
    mp = mixed_projector(sigma, omega, n, alpha)
    r0, rq, rk = mp.ranks
    assert rk <= r0 + rq


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), rate=st.floats(0.05, 1.0))
def test_best_case_beats_threshold_at_equal_rank(seed, rate):
    rho = tensor_power(random_density_matrix(2, seed), 3)
    scheme = best_case_scheme(rho, 3, rate)
    f = scheme_fidelity(rho, scheme)
    w = np.sort(np.linalg.eigvalsh(rho))[::-1]
    assert abs(f - w[: scheme.rank].sum() ** 2) < 1e-10
