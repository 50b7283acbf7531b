import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from infospec.estimators import (
    DenseCodingEstimator,
    PrettyGoodDecoder,
    SpectralRateEstimator,
    TypicalSubspaceCompressor,
)
from infospec.operators import bell_state, binary_entropy, diag_state, tensor_power

BISECT_TOL = 8 / 63 / 2**10 + 1e-9


def test_params_round_trip_and_clone():
    est = SpectralRateEstimator(n=5, epsilon=0.05)
    assert est.get_params()["n"] == 5
    est.set_params(n=7)
    twin = clone(est)
    assert twin.get_params() == est.get_params()
    assert not hasattr(twin, "sup_rate_")


def test_spectral_rate_estimator_closed_form():
    est = SpectralRateEstimator(n=8, epsilon=0.01).fit(np.eye(2) / 2)
    assert abs(est.entropy_sup_ - (np.log(2) - np.log(0.01) / 8)) < BISECT_TOL
    assert abs(est.entropy_inf_ - (np.log(2) - np.log(0.99) / 8)) < BISECT_TOL
    rel = SpectralRateEstimator(n=4).fit(diag_state([0.3, 0.7]), omega=diag_state([0.3, 0.7]))
    assert abs(rel.inf_rate_ - np.log(0.01) / 4) < BISECT_TOL
    assert not hasattr(rel, "entropy_sup_")


def test_spectral_rate_estimator_large_n():
    est = SpectralRateEstimator(n=2000).fit(diag_state([0.25, 0.75]))
    h = binary_entropy(0.25)
    assert abs(est.entropy_sup_ - h) < 0.05 and abs(est.entropy_inf_ - h) < 0.05


def test_compressor_modes():
    rho = tensor_power(diag_state([0.9, 0.1]), 2)
    comp = TypicalSubspaceCompressor(n=2, rate=np.log(2) / 2).fit(rho)
    assert comp.rank_ == 2
    assert abs(comp.score(rho) - 0.9**2 * 1.0) < 1e-12
    out = comp.transform(rho)
    assert out.shape == (1, 4, 4) and abs(np.trace(out[0]) - 1) < 1e-12
    thr = TypicalSubspaceCompressor(n=2, rate=0.2, mode="threshold").fit(rho)
    assert thr.rank_ == 1
    with pytest.raises(ValueError):
        TypicalSubspaceCompressor(mode="other").fit(rho)
    with pytest.raises(NotFittedError):
        TypicalSubspaceCompressor().transform(rho)


def test_pretty_good_decoder():
    words = np.array([diag_state([1, 0, 0]), diag_state([0, 1, 0])])
    dec = PrettyGoodDecoder(gamma=0.1).fit(words)
    assert dec.n_messages_ == 2
    assert list(dec.predict(words)) == [0, 1]
    proba = dec.predict_proba(words)
    assert proba.shape == (2, 3)
    assert np.abs(proba.sum(axis=1) - 1).max() < 1e-12
    assert abs(dec.score(words, [0, 1]) - 1) < 1e-12


def test_dense_coding_estimator():
    est = DenseCodingEstimator(n=10, restarts=1).fit(bell_state(0))
    assert abs(est.single_letter_capacity_ - 2 * np.log(2)) < 1e-10
    assert abs(est.capacity_ - (2 * np.log(2) + np.log(0.01) / 10)) < BISECT_TOL
    assert est.dims_ == (2, 2)
    with pytest.raises(ValueError):
        DenseCodingEstimator(restarts=0).fit(np.eye(8) / 8)
