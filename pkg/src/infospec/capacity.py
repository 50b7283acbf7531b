"""Classical communication over quantum channels: cq ensembles, random codes
with pretty-good-measurement decoding, achievability and converse bounds,
and inf-spectral capacity estimates."""

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .channels import POVM, KrausChannel, apply
from .operators import partial_trace, relative_projection
from .spectrum import (
    SourceSequence,
    difference_trace,
    inf_divergence_estimate,
)
from .validation import check_density_matrix, check_probability_vector, check_random_state

PINV_CUTOFF = 1e-10


class ThresholdError(ValueError):
    """Every codeword projector is zero; the threshold is above all likelihood ratios."""


@dataclass(frozen=True, eq=False)
class CQEnsemble:
    """Labelled states ``{p_x, rho_x}`` on a common space."""

    priors: np.ndarray
    states: np.ndarray

    def __post_init__(self):
        p = check_probability_vector(self.priors)
        states = np.asarray(self.states, dtype=complex)
        if states.ndim != 3 or states.shape[0] != p.size:
            raise ValueError("need one square state per prior")
        for i, s in enumerate(states):
            check_density_matrix(s, tol=1e-9, name=f"state {i}")
        object.__setattr__(self, "priors", p)
        object.__setattr__(self, "states", states)

    @classmethod
    def uniform(cls, states):
        states = np.asarray(states)
        return cls(np.full(len(states), 1.0 / len(states)), states)

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def __len__(self):
        return len(self.priors)

    def average_state(self):
        return np.einsum("x,xij->ij", self.priors, self.states)

    def through(self, channel: Optional[KrausChannel]) -> "CQEnsemble":
        if channel is None:
            return self
        return CQEnsemble(self.priors, np.array([apply(channel, s) for s in self.states]))

    def power(self, n: int) -> "CQEnsemble":
        """n-letter product ensemble with labels in lexicographic order."""
        priors, states = self.priors, self.states
        for _ in range(n - 1):
            priors = np.kron(priors, self.priors)
            states = np.array([np.kron(a, b) for a in states for b in self.states])
        return CQEnsemble(priors, states)


def cq_state(ens: CQEnsemble):
    """``sum_x p_x |x><x| ⊗ rho_x`` on label ⊗ system."""
    m, d = len(ens), ens.dim
    out = np.zeros((m * d, m * d), dtype=complex)
    for x in range(m):
        out[x * d:(x + 1) * d, x * d:(x + 1) * d] = ens.priors[x] * ens.states[x]
    return out


def product_reference(ens: CQEnsemble):
    """``rho^B ⊗ rho_bar``: the product of the cq state's marginals."""
    return np.kron(np.diag(ens.priors).astype(complex), ens.average_state())


def hn_bound(ens: CQEnsemble, n: int, gamma: float, M: int, relation: str = "<=") -> float:
    """``2 sum_x p_x Tr[{rho_x - e^{n gamma} rho_bar <= 0} rho_x] + 4 e^{-n gamma} M``.

    ``ens`` is the (n-letter) ensemble at the channel output. ``relation="<"``
    gives the slightly tighter form whose projector is the exact complement
    of the decoding projector.
    """
    if relation not in ("<=", "<"):
        raise ValueError("relation must be '<=' or '<'")
    bar = ens.average_state()
    c = np.exp(n * gamma)
    first = 0.0
    for p, s in zip(ens.priors, ens.states):
        if p == 0:
            continue
        proj = relative_projection(s, c * bar, relation)
        first += p * np.trace(proj @ s).real
    return float(2 * first + 4 * np.exp(-n * gamma) * M)


@dataclass(frozen=True, eq=False)
class CodeBook:
    """Codeword labels ``i -> x_i`` and a decoder POVM with one element per message."""

    labels: np.ndarray
    decoder: POVM
    projectors: Optional[np.ndarray] = None

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=int).reshape(-1)
        if labels.size < 1:
            raise ValueError("a code needs at least one codeword")
        if len(self.decoder) != labels.size:
            raise ValueError("decoder needs one element per codeword")
        object.__setattr__(self, "labels", labels)

    @property
    def size(self) -> int:
        return self.labels.size


def pretty_good_measurement(projectors, cutoff=PINV_CUTOFF) -> POVM:
    """``E_i = S^{-1/2} Pi_i S^{-1/2}`` with ``S = sum_j Pi_j``, inverted on range(S)."""
    projectors = np.asarray(projectors, dtype=complex)
    s = projectors.sum(axis=0)
    w, v = np.linalg.eigh((s + s.conj().T) / 2)
    inv_sqrt = np.zeros_like(w)
    keep = w > cutoff
    inv_sqrt[keep] = 1.0 / np.sqrt(w[keep])
    root = (v * inv_sqrt) @ v.conj().T
    elements = np.einsum("ij,kjl,lm->kim", root, projectors, root)
    elements = (elements + elements.conj().transpose(0, 2, 1)) / 2
    return POVM(elements)


def codebook_from_labels(ens: CQEnsemble, labels, n: int, gamma: float) -> CodeBook:
    """PGM code for the given codeword labels with projectors ``{rho_x >= e^{n gamma} rho_bar}``."""
    labels = np.asarray(labels, dtype=int).reshape(-1)
    bar = ens.average_state()
    c = np.exp(n * gamma)
    cache = {}
    for x in set(labels.tolist()):
        cache[x] = relative_projection(ens.states[x], c * bar, ">=")
    projectors = np.array([cache[x] for x in labels])
    if max(np.trace(p).real for p in projectors) < 0.5:
        raise ThresholdError(f"threshold too high: every codeword projector is zero at gamma={gamma}")
    return CodeBook(labels, pretty_good_measurement(projectors), projectors)


def pgm_codebook(ens: CQEnsemble, n: int, M: int, gamma: float, seed=None, replace: bool = True) -> CodeBook:
    """Random code: ``M`` labels drawn from the priors (i.i.d. unless ``replace=False``)
    and decoded by a pretty-good measurement."""
    if M < 1:
        raise ValueError("M must be >= 1")
    if not replace and M > np.count_nonzero(ens.priors):
        raise ValueError("M exceeds the number of labels with positive prior")
    rng = check_random_state(seed)
    labels = rng.choice(len(ens), size=M, p=ens.priors, replace=replace)
    return codebook_from_labels(ens, labels, n, gamma)


def average_error(codebook: CodeBook, ens: CQEnsemble) -> float:
    """``(1/M) sum_i (1 - Tr[sigma_i E_i])`` with ``sigma_i`` the state of label ``x_i``."""
    states = ens.states[codebook.labels]
    hits = np.einsum("kij,kji->k", states, codebook.decoder.elements).real
    return float(np.clip(np.mean(1.0 - hits), 0.0, 1.0))


def hn_instance_bound(codebook: CodeBook, ens: CQEnsemble) -> float:
    """Per-code Hayashi-Nagaoka operator bound for a PGM decoder built from projectors.

    ``(1/M) sum_i [2 Tr rho_i (I - Pi_i) + 4 sum_{j != i} Tr rho_i Pi_j]``
    holds for every drawn code, not only on average.
    """
    if codebook.projectors is None:
        raise ValueError("codebook has no projectors recorded")
    states = ens.states[codebook.labels]
    overlaps = np.einsum("aij,bji->ab", states, codebook.projectors).real
    own = np.diag(overlaps)
    cross = overlaps.sum(axis=1) - own
    return float(np.mean(2 * (1 - own) + 4 * cross))


def converse_error_bound(rho_aq, dims, channel: Optional[KrausChannel], n: int, gamma: float, M: int) -> float:
    """``1 - Tr[{Pi >= 0} Pi] - e^{n gamma} / M`` with
    ``Pi = rho^{A Lambda Q} - e^{n gamma} rho^A ⊗ rho^{Lambda Q}``.

    Valid for codes whose messages come from a measurement on A with
    uniform outcome probabilities ``1/M``.
    """
    da, dq = dims
    if channel is not None:
        lifted = KrausChannel(np.array([np.kron(np.eye(da), k) for k in channel.kraus_ops]))
        rho_out = apply(lifted, rho_aq)
        dq = channel.out_dim
    else:
        rho_out = np.asarray(rho_aq, dtype=complex)
    ra = partial_trace(rho_out, (da, dq), [0])
    rq = partial_trace(rho_out, (da, dq), [1])
    t = difference_trace(rho_out, np.kron(ra, rq), n, gamma)
    return float(1.0 - t - np.exp(n * gamma) / M)


@dataclass(frozen=True)
class UniformCodeResult:
    error: float
    sampled_error: float
    shots: int

    @property
    def sampled_sigma(self) -> float:
        p = self.error
        return float(np.sqrt(max(p * (1 - p), 0.0) / self.shots))


def simulate_uniform_code(ens_out: CQEnsemble, decoder: POVM, shots: int, seed=None) -> UniformCodeResult:
    """Send uniformly chosen messages ``i`` as state ``i`` of ``ens_out`` and decode.

    Returns the exact error and a shot-sampled estimate of it.
    """
    m = len(ens_out)
    if len(decoder) != m:
        raise ValueError("decoder needs one element per message")
    rng = check_random_state(seed)
    probs = np.array([decoder.probabilities(s) for s in ens_out.states])
    fail = np.clip(1.0 - probs.sum(axis=1), 0.0, None)
    table = np.column_stack([probs.clip(0.0, None), fail])
    table /= table.sum(axis=1, keepdims=True)
    exact = float(1.0 - np.mean(np.diag(probs)))
    messages = rng.integers(m, size=shots)
    wrong = 0
    for i in range(m):
        k = int(np.sum(messages == i))
        if k:
            outcomes = rng.choice(m + 1, size=k, p=table[i])
            wrong += int(np.sum(outcomes != i))
    return UniformCodeResult(exact, wrong / shots, shots)


# ---------------------------------------------------------------------------
# capacity estimates
# ---------------------------------------------------------------------------

EnsembleLike = Union[CQEnsemble, Callable[[int], CQEnsemble]]
ChannelLike = Union[KrausChannel, Callable[[int], KrausChannel], None]


def mutual_information_source(ensemble: EnsembleLike, channel: ChannelLike) -> SourceSequence:
    """cq state at the channel output against the product of its marginals.

    A fixed ensemble and fixed channel give the memoryless i.i.d. source;
    callables give a general sequence evaluated densely.
    """
    if isinstance(ensemble, CQEnsemble) and (channel is None or isinstance(channel, KrausChannel)):
        out = ensemble.through(channel)
        return SourceSequence.iid(cq_state(out), product_reference(out))

    def gen(n):
        ens = ensemble(n) if callable(ensemble) and not isinstance(ensemble, CQEnsemble) else ensemble.power(n)
        if channel is None:
            ch = None
        elif isinstance(channel, KrausChannel):
            ch = channel.power(n)
        else:
            ch = channel(n)
        out = ens.through(ch)
        return cq_state(out), product_reference(out)

    return SourceSequence.general(gen)


@dataclass(frozen=True)
class CapacityEstimate:
    """Inf-spectral mutual information estimate per n, maximized over candidates."""

    ns: tuple
    values: tuple
    best_index: tuple
    per_candidate: tuple

    @property
    def value(self) -> float:
        return self.values[-1]


def capacity_estimate(ensembles: Sequence[EnsembleLike], channel: ChannelLike, ns: Sequence[int],
                      **estimator_kwargs) -> CapacityEstimate:
    """Max over the supplied input ensembles of the inf-spectral mutual information estimate."""
    if not ensembles:
        raise ValueError("need at least one candidate ensemble")
    sources = [mutual_information_source(e, channel) for e in ensembles]
    table = np.array(
        [[inf_divergence_estimate(s, n, **estimator_kwargs).gamma_hat for n in ns] for s in sources]
    )
    best = np.argmax(table, axis=0)
    return CapacityEstimate(
        tuple(int(n) for n in ns),
        tuple(float(v) for v in table.max(axis=0)),
        tuple(int(b) for b in best),
        tuple(tuple(float(v) for v in row) for row in table),
    )


def basis_ensemble(d: int, priors=None) -> CQEnsemble:
    """Computational basis states with the given (default uniform) priors."""
    states = np.array([np.diag(np.eye(d)[i]).astype(complex) for i in range(d)])
    priors = np.full(d, 1.0 / d) if priors is None else priors
    return CQEnsemble(priors, states)
