import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from infospec.operators import (
    bell_state,
    binary_entropy,
    diag_state,
    random_density_matrix,
    random_psd,
    random_unitary,
    tensor_power,
)
from infospec.spectrum import (
    BipartiteSource,
    ProductSpectrum,
    SourceSequence,
    UnsupportedStructureError,
    WindowError,
    conditional_entropy_estimate,
    difference_trace,
    inf_divergence_estimate,
    mutual_information_estimate,
    product_trace_fastpath,
    spectral_entropy_estimates,
    sup_divergence_estimate,
    trace_curve,
)

EPS = 0.01
# grid spacing 8/63 halved ten times, plus slack
BISECT_TOL = 8 / 63 / 2**10 + 1e-9

# Spectral entropies of diag(0.25, 0.75) at eps = 0.01, from brentq on the
# exact binomial positive-part curve (independent of the estimator).
BINOMIAL_ORACLE = {
    4: (1.8444397270569681, 0.29571086078785425),
    8: (1.2684950969239503, 0.30083647293426785),
    12: (1.073924215717661, 0.3192944484283995),
    50: (0.754808537505889, 0.4277655074199761),
}


def test_difference_trace_example():
    rho = diag_state([0.6, 0.4])
    # eigenvalues of rho - e^{0} I/2: 0.1, -0.1
    assert abs(difference_trace(rho, np.eye(2) / 2, 1, 0.0) - 0.1) < 1e-15


@pytest.mark.parametrize("n", [1, 3, 8, 40])
def test_uniform_spectrum_closed_form(n):
    src = SourceSequence.iid(np.eye(2) / 2)
    sup = sup_divergence_estimate(src, n, epsilon=EPS).gamma_hat
    inf = inf_divergence_estimate(src, n, epsilon=EPS).gamma_hat
    assert abs(sup - (-np.log(2) + np.log(1 - EPS) / n)) < BISECT_TOL
    assert abs(inf - (-np.log(2) + np.log(EPS) / n)) < BISECT_TOL


@pytest.mark.parametrize("n", [1, 2, 6])
def test_state_equal_reference_closed_form(n):
    rho = random_density_matrix(3, n)
    src = SourceSequence.iid(rho, rho)
    sup = sup_divergence_estimate(src, n, epsilon=EPS)
    inf = inf_divergence_estimate(src, n, epsilon=EPS)
    assert abs(sup.gamma_hat - np.log(1 - EPS) / n) < sup.tolerance + 1e-9
    assert abs(inf.gamma_hat - np.log(EPS) / n) < inf.tolerance + 1e-9


@pytest.mark.parametrize("n", sorted(BINOMIAL_ORACLE))
def test_binomial_oracle(n):
    src = SourceSequence.iid(diag_state([0.25, 0.75]))
    upper, lower = spectral_entropy_estimates(src, n, epsilon=EPS)
    assert np.abs(np.array([upper, lower]) - BINOMIAL_ORACLE[n]).max() < BISECT_TOL


def test_entropy_estimates_converge_at_large_n():
    h = binary_entropy(0.25)
    src = SourceSequence.iid(diag_state([0.25, 0.75]))
    upper, lower = spectral_entropy_estimates(src, 2000, epsilon=EPS)
    assert lower <= h <= upper
    assert max(upper - h, h - lower) < 0.05
    assert abs(src.entropy_rate(2000) - h) < 1e-9


def test_estimates_bracket_with_ordering():
    src = SourceSequence.iid(random_density_matrix(3, 11))
    for n in (1, 3, 5):
        upper, lower = spectral_entropy_estimates(src, n)
        assert lower <= upper


def test_fast_path_matches_dense():
    u = random_unitary(3, 5)
    rho = (u * [0.5, 0.3, 0.2]) @ u.conj().T
    omega = (u * [1.0, 0.4, 2.0]) @ u.conj().T
    fast = SourceSequence.iid(rho, omega)
    dense = SourceSequence.general(lambda n: (tensor_power(rho, n), tensor_power(omega, n)))
    assert fast.product_spectrum(4) is not None and dense.product_spectrum(4) is None
    g = np.linspace(-2, 2, 41)
    assert np.abs(fast.curve_function(4)(g) - dense.curve_function(4)(g)).max() < 1e-10
    a = sup_divergence_estimate(fast, 4).gamma_hat
    b = sup_divergence_estimate(dense, 4).gamma_hat
    assert abs(a - b) < 1e-12


def test_product_and_mixture_fast_paths_match_dense():
    rng = np.random.default_rng(0)
    pairs = [(diag_state(rng.dirichlet([1, 1])), np.diag(rng.uniform(0.2, 2, 2))) for _ in range(5)]
    prod = SourceSequence.product(pairs)
    g = np.linspace(-1, 1, 21)
    r, w = prod.operators(5)
    dense = np.array([difference_trace(r, w, 5, x) for x in g])
    assert np.abs(prod.curve_function(5)(g) - dense).max() < 1e-10

    mix = SourceSequence.mixture(0.3, SourceSequence.iid(diag_state([0.9, 0.1])),
                                 SourceSequence.iid(diag_state([0.5, 0.5])))
    assert mix.product_spectrum(4) is not None
    r, w = mix.operators(4)
    dense = np.array([difference_trace(r, w, 4, x) for x in g])
    assert np.abs(mix.curve_function(4)(g) - dense).max() < 1e-10


def test_product_trace_fastpath_eigenvalue_lists():
    lam, mu = [0.7, 0.3], [1.0, 1.0]
    dense = difference_trace(tensor_power(np.diag(lam), 3), np.eye(8), 3, -0.5)
    assert abs(product_trace_fastpath(lam, mu, 3, -0.5) - dense) < 1e-12
    with pytest.raises(UnsupportedStructureError):
        product_trace_fastpath([0.5, 0.5], [1.0], 2, 0.0)


def test_product_spectrum_counts_types():
    spec = ProductSpectrum.iid(np.array([[0.25, 1.0], [0.75, 1.0]]), 10)
    lam, mult = spec.sorted_state_eigenvalues()
    assert len(lam) == 11
    assert abs(mult.sum() - 2**10) < 1e-6
    assert abs(np.sum(lam * mult) - 1) < 1e-12


def test_non_commuting_large_n_is_refused():
    rho = np.array([[0.6, 0.2], [0.2, 0.4]])
    src = SourceSequence.iid(rho, diag_state([0.3, 0.7]))
    assert src.product_spectrum(13) is None
    with pytest.raises(UnsupportedStructureError):
        src.curve_function(13)
    # small n falls back to dense
    assert np.isfinite(sup_divergence_estimate(src, 3).gamma_hat)


def test_window_error_when_crossing_far_outside():
    src = SourceSequence.iid(np.eye(2) / 2)
    with pytest.raises(WindowError):
        sup_divergence_estimate(src, 4, window=(3.0, 3.1))


def test_window_widening_once():
    # inf crossing at log(eps) - log 2 = -5.3 for n = 1: outside (-4, 4), inside (-8, 8)
    src = SourceSequence.iid(np.eye(2) / 2)
    est = inf_divergence_estimate(src, 1)
    assert abs(est.gamma_hat - (np.log(EPS) - np.log(2))) < 2 * est.tolerance + 1e-9


def test_entropy_requires_identity_reference():
    src = SourceSequence.iid(np.eye(2) / 2, diag_state([0.5, 0.5]))
    with pytest.raises(ValueError):
        spectral_entropy_estimates(src, 2)


def test_beta_bound_enforced():
    src = SourceSequence.general(lambda n: (np.eye(8) / 8, np.eye(8)), beta=0.1)
    with pytest.raises(ValueError):
        src.operators(2)


def test_bell_conditional_entropy_closed_form():
    src = BipartiteSource.iid(bell_state(0), (2, 2))
    for n in (2, 5, 10):
        upper, lower = conditional_entropy_estimate(src, n, epsilon=EPS)
        assert abs(upper - (-np.log(2) - np.log(EPS) / n)) < BISECT_TOL
        assert abs(lower - (-np.log(2) - np.log(1 - EPS) / n)) < BISECT_TOL


def test_product_mutual_information_closed_form():
    rho = np.kron(diag_state([0.2, 0.8]), diag_state([0.6, 0.4]))
    src = BipartiteSource.iid(rho, (2, 2))
    upper, lower = mutual_information_estimate(src, 6, epsilon=EPS)
    assert abs(upper - np.log(1 - EPS) / 6) < BISECT_TOL
    assert abs(lower - np.log(EPS) / 6) < BISECT_TOL


def test_general_bipartite_matches_iid():
    rho = random_density_matrix(4, 9)
    iid = BipartiteSource.iid(rho, (2, 2))
    gen = BipartiteSource(iid.generator, iid.shape, iid.a_factors)
    for fn in (conditional_entropy_estimate, mutual_information_estimate):
        a = np.array(fn(iid, 2))
        b = np.array(fn(gen, 2))
        assert np.abs(a - b).max() < 1e-9


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 3))
def test_trace_curve_monotone_and_bounded(seed, n):
    rng = np.random.default_rng(seed)
    rho = random_density_matrix(2, rng)
    omega = random_psd(2, rng, scale=1.5)
    curve = trace_curve(SourceSequence.iid(rho, omega), n)
    assert curve.is_nonincreasing()
    assert curve.values.min() >= 0 and curve.values.max() <= 1 + 1e-9


@settings(max_examples=40, deadline=None)
@given(p=st.floats(0.02, 0.98), n=st.integers(1, 30))
def test_sup_estimate_never_below_inf(p, n):
    src = SourceSequence.iid(diag_state([p, 1 - p]))
    upper, lower = spectral_entropy_estimates(src, n)
    assert lower <= upper + 1e-12
