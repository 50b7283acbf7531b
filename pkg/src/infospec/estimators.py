"""Estimator-style wrappers: hyperparameters in ``__init__``, learned state in
trailing-underscore attributes after ``fit``."""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .capacity import CQEnsemble, codebook_from_labels
from .compression import best_case_scheme, build_scheme, scheme_fidelity
from .densecoding import DEFAULT_RESTARTS, conditional_entropy, minimize_lambda
from .spectrum import (
    DEFAULT_EPSILON,
    DEFAULT_GRID_SIZE,
    DEFAULT_WINDOW,
    SourceSequence,
    inf_divergence_estimate,
    sup_divergence_estimate,
)
from .validation import check_density_matrix, check_psd


def _state_stack(X, name="X"):
    X = np.asarray(X, dtype=complex)
    if X.ndim == 2:
        X = X[None]
    if X.ndim != 3 or X.shape[1] != X.shape[2]:
        raise ValueError(f"{name} must be a square matrix or a stack of them, got shape {X.shape}")
    return X


class SpectralRateEstimator(BaseEstimator):
    """Finite-n sup/inf spectral divergence rates of an i.i.d. pair ``(rho, omega)``.

    With ``omega`` omitted the reference is the identity and ``entropy_sup_``
    and ``entropy_inf_`` are also set.
    """

    def __init__(self, n=12, epsilon=DEFAULT_EPSILON, window=DEFAULT_WINDOW, grid_size=DEFAULT_GRID_SIZE):
        self.n = n
        self.epsilon = epsilon
        self.window = window
        self.grid_size = grid_size

    def fit(self, X, y=None, omega=None):
        rho = check_density_matrix(X)
        ref = None if omega is None else check_psd(omega, name="omega")
        source = SourceSequence.iid(rho, ref)
        kw = dict(epsilon=self.epsilon, window=tuple(self.window), grid_size=self.grid_size)
        self.sup_rate_ = sup_divergence_estimate(source, self.n, **kw).gamma_hat
        self.inf_rate_ = inf_divergence_estimate(source, self.n, **kw).gamma_hat
        if omega is None:
            self.entropy_sup_ = -self.inf_rate_
            self.entropy_inf_ = -self.sup_rate_
        self.source_ = source
        return self


class TypicalSubspaceCompressor(TransformerMixin, BaseEstimator):
    """Block compressor fitted to ``rho_n``.

    ``mode="rank"`` keeps the ``floor(exp(n rate))`` largest eigenvectors;
    ``mode="threshold"`` keeps the eigenspace ``{rho_n >= exp(-n gamma)}``
    with ``gamma = rate``.
    """

    def __init__(self, n=1, rate=0.5, mode="rank"):
        self.n = n
        self.rate = rate
        self.mode = mode

    def fit(self, X, y=None):
        rho_n = check_density_matrix(X)
        if self.mode == "rank":
            self.scheme_ = best_case_scheme(rho_n, self.n, self.rate)
        elif self.mode == "threshold":
            self.scheme_ = build_scheme(rho_n, self.n, self.rate)
        else:
            raise ValueError(f"mode must be 'rank' or 'threshold', got {self.mode!r}")
        self.rank_ = self.scheme_.rank
        return self

    def transform(self, X):
        check_is_fitted(self, "scheme_")
        return np.array([self.scheme_.compress(s) for s in _state_stack(X)])

    def score(self, X, y=None):
        """Entanglement fidelity of the fitted scheme on ``X``."""
        check_is_fitted(self, "scheme_")
        return scheme_fidelity(check_density_matrix(X), self.scheme_)


class PrettyGoodDecoder(BaseEstimator):
    """Pretty-good measurement for codeword states under a uniform prior.

    ``fit`` takes the ``M`` codewords; ``predict`` returns the most likely
    message for each input state.
    """

    def __init__(self, n=1, gamma=0.0):
        self.n = n
        self.gamma = gamma

    def fit(self, X, y=None):
        states = _state_stack(X)
        ens = CQEnsemble.uniform(states)
        self.codebook_ = codebook_from_labels(ens, np.arange(len(ens)), self.n, self.gamma)
        self.n_messages_ = len(ens)
        return self

    def predict_proba(self, X):
        """Outcome probabilities; the last column is the failure outcome."""
        check_is_fitted(self, "codebook_")
        dec = self.codebook_.decoder
        probs = np.array([dec.probabilities(s) for s in _state_stack(X)]).clip(0.0, None)
        fail = np.clip(1.0 - probs.sum(axis=1), 0.0, None)
        return np.column_stack([probs, fail])

    def predict(self, X):
        return np.argmax(self.predict_proba(X)[:, :-1], axis=1)

    def score(self, X, y):
        """Mean probability of decoding the true message ``y``."""
        p = self.predict_proba(X)
        y = np.asarray(y, dtype=int)
        return float(np.mean(p[np.arange(len(y)), y]))


class DenseCodingEstimator(BaseEstimator):
    """Dense-coding capacity estimate ``log d - min_Lambda`` of the sup-spectral conditional entropy."""

    def __init__(self, n=10, restarts=DEFAULT_RESTARTS, seed=0, epsilon=DEFAULT_EPSILON):
        self.n = n
        self.restarts = restarts
        self.seed = seed
        self.epsilon = epsilon

    def fit(self, X, y=None, dims=None):
        rho = check_density_matrix(X)
        if dims is None:
            d = int(round(np.sqrt(rho.shape[0])))
            if d * d != rho.shape[0]:
                raise ValueError("pass dims for non-square bipartitions")
            dims = (d, d)
        res = minimize_lambda(rho, dims, self.n, restarts=self.restarts, seed=self.seed, epsilon=self.epsilon)
        self.dims_ = tuple(int(d) for d in dims)
        self.result_ = res
        self.conditional_entropy_ = res.value
        self.capacity_ = float(np.log(dims[0]) - res.value)
        self.single_letter_capacity_ = float(np.log(dims[0]) - conditional_entropy(rho, dims))
        return self

