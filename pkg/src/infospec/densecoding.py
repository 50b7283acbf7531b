"""Dense coding with a shared bipartite state: Weyl encodings, the twirl
identity, conditional spectral entropies, preprocessing-map search, protocol
simulation and the converse bound."""

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .capacity import CQEnsemble, average_error, hn_bound, pgm_codebook
from .channels import KrausChannel, apply, channel_from_isometry, identity_channel, random_isometry
from .operators import (
    SubsystemShape,
    partial_trace,
    permute_subsystems,
    positive_part_trace,
    tensor_power,
    von_neumann_entropy,
)
from .spectrum import (
    BipartiteSource,
    UnsupportedStructureError,
    conditional_entropy_estimate,
)
from .validation import check_density_matrix, check_random_state

# eigenvalues below this are clipped inside log(rho) for entropy gradients
LOG_FLOOR = 1e-15
DEFAULT_RESTARTS = 16


# ---------------------------------------------------------------------------
# Weyl operators
# ---------------------------------------------------------------------------

def weyl(D: int, p: int, q: int):
    """``U_{(p,q)} |j> = exp(2 pi i p j / D) |j + q mod D>``."""
    if D < 1:
        raise ValueError("D must be >= 1")
    if not (0 <= p < D and 0 <= q < D):
        raise ValueError(f"Weyl indices must lie in [0, {D}), got p={p}, q={q}")
    j = np.arange(D)
    u = np.zeros((D, D), dtype=complex)
    u[(j + q) % D, j] = np.exp(2j * np.pi * p * j / D)
    return u


@dataclass(frozen=True, eq=False)
class WeylSet:
    """All ``D**2`` shift-multiply unitaries; label ``x = p * D + q``."""

    D: int
    operators: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        ops = np.array([weyl(self.D, p, q) for p in range(self.D) for q in range(self.D)])
        ops.setflags(write=False)
        object.__setattr__(self, "operators", ops)

    def __len__(self):
        return self.D * self.D

    def __iter__(self):
        for x, u in enumerate(self.operators):
            yield divmod(x, self.D), u

    def label(self, p: int, q: int) -> int:
        return p * self.D + q


def _check_bipartite(rho_ab, dims):
    da, db = (int(d) for d in dims)
    rho_ab = check_density_matrix(rho_ab, tol=1e-9, name="rho_ab")
    if rho_ab.shape[0] != da * db:
        raise ValueError(f"state dimension {rho_ab.shape[0]} does not match dims ({da}, {db})")
    return rho_ab, da, db


def _on_a(u, rho, db):
    v = np.kron(u, np.eye(db))
    return v @ rho @ v.conj().T


def weyl_twirl(rho_ab, dims):
    """Uniform average of ``(U ⊗ I) rho (U ⊗ I)^dagger`` over all Weyl unitaries on A."""
    rho_ab, D, db = _check_bipartite(rho_ab, dims)
    out = np.zeros_like(rho_ab)
    for _, u in WeylSet(D):
        out += _on_a(u, rho_ab, db)
    return out / D**2


# ---------------------------------------------------------------------------
# n-letter states and conditional entropies
# ---------------------------------------------------------------------------

def _lift(channel: Optional[KrausChannel], da: int, db: int) -> Optional[KrausChannel]:
    if channel is None:
        return None
    if channel.in_dim != da or channel.out_dim != da:
        raise ValueError(f"preprocessing map must act on A (dim {da}) and keep its dimension")
    return KrausChannel(np.array([np.kron(k, np.eye(db)) for k in channel.kraus_ops]))


def preprocess(rho_ab, dims, channel: Optional[KrausChannel]):
    """``(Lambda ⊗ id) rho``."""
    rho_ab, da, db = _check_bipartite(rho_ab, dims)
    lifted = _lift(channel, da, db)
    return rho_ab if lifted is None else apply(lifted, rho_ab)


def block_power(rho_ab, dims, n: int):
    """``rho^{⊗n}`` with factors grouped as ``A1..An B1..Bn``."""
    da, db = (int(d) for d in dims)
    interleaved = tensor_power(rho_ab, n)
    perm = list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2))
    return permute_subsystems(interleaved, SubsystemShape((da, db) * n), perm)


def conditional_entropy(rho_ab, dims) -> float:
    """``S(AB) - S(B)``."""
    da, db = (int(d) for d in dims)
    return von_neumann_entropy(rho_ab) - von_neumann_entropy(partial_trace(rho_ab, (da, db), [1]))


def conditional_sup_entropy(rho_ab, dims, channel: Optional[KrausChannel], n: int, **estimator_kwargs) -> float:
    """Sup-spectral conditional entropy estimate of ``((Lambda ⊗ id) rho)^{⊗n}`` given B."""
    out = preprocess(rho_ab, dims, channel)
    sup, _ = conditional_entropy_estimate(BipartiteSource.iid(out, dims), n, **estimator_kwargs)
    return float(sup)


# ---------------------------------------------------------------------------
# preprocessing-map search
# ---------------------------------------------------------------------------

def _polar(x):
    u, _, vh = np.linalg.svd(x, full_matrices=False)
    return u @ vh


def _kraus_of(v, da, env):
    return v.reshape(da, env, da).transpose(1, 0, 2)


def _output(kraus, rho4):
    return np.einsum("kai,ibjc,kdj->abdc", kraus, rho4, kraus.conj())


def output_entropy_and_gradient(v, rho_ab, dims, env: int):
    """``S((Lambda_V ⊗ id) rho)`` and its Euclidean gradient with respect to the isometry ``V``.

    ``V`` maps A to A ⊗ E with rows ordered (out, env).
    """
    da, db = dims
    rho4 = rho_ab.reshape(da, db, da, db)
    k = _kraus_of(v, da, env)
    out4 = _output(k, rho4)
    out = out4.reshape(da * db, da * db)
    out = (out + out.conj().T) / 2
    w, u = np.linalg.eigh(out)
    wc = np.clip(w, LOG_FLOOR, None)
    s = float(-np.sum(w[w > LOG_FLOOR] * np.log(w[w > LOG_FLOOR])))
    lmat = -(u * (np.log(wc) + 1.0)) @ u.conj().T
    l4 = lmat.reshape(da, db, da, db)
    # M_k = Tr_B[rho (K_k^dagger ⊗ I) L], gradient 2 M_k^dagger
    m = np.einsum("ibjc,kxj,xcab->kia", rho4, k.conj(), l4)
    grad_k = 2 * m.conj().transpose(0, 2, 1)
    grad_v = grad_k.transpose(1, 0, 2).reshape(da * env, da)
    return s, grad_v


def _descend(v, rho_ab, dims, env, max_iter=300, tol=1e-10):
    s, g = output_entropy_and_gradient(v, rho_ab, dims, env)
    step = 1.0
    for _ in range(max_iter):
        herm = v.conj().T @ g
        rg = g - v @ ((herm + herm.conj().T) / 2)
        gnorm2 = float(np.vdot(rg, rg).real)
        if gnorm2 < tol**2:
            break
        accepted = False
        while step > 1e-12:
            trial = _polar(v - step * rg)
            s_new, g_new = output_entropy_and_gradient(trial, rho_ab, dims, env)
            if s_new <= s - 1e-4 * step * gnorm2:
                accepted = True
                break
            step *= 0.5
        if not accepted or s - s_new < 1e-13:
            if accepted:
                v, s = trial, s_new
            break
        v, s, g = trial, s_new, g_new
        step = min(step * 2.0, 4.0)
    return v, s


def _structured_starts(da, env):
    """Identity and the constant map onto ``|0>`` (when the environment allows it)."""
    starts = []
    ident = np.zeros((da, env, da), dtype=complex)
    for i in range(da):
        ident[i, 0, i] = 1.0
    starts.append(("identity", ident.reshape(da * env, da)))
    if env >= da:
        const = np.zeros((da, env, da), dtype=complex)
        for i in range(da):
            const[0, i, i] = 1.0
        starts.append(("constant", const.reshape(da * env, da)))
    return starts


@dataclass(frozen=True)
class OutputEntropySearch:
    channel: KrausChannel
    value: float
    start_labels: tuple
    start_values: tuple


def minimize_output_entropy(rho_ab, dims, restarts: int = DEFAULT_RESTARTS, seed=None,
                            env_dim: Optional[int] = None) -> OutputEntropySearch:
    """Local search for ``min_Lambda S((Lambda ⊗ id) rho)`` over Stinespring isometries.

    Starts from the identity, the constant map onto ``|0>`` and ``restarts``
    Haar-random isometries, each refined by Riemannian gradient descent with
    polar retraction. The best value found is an upper bound on the minimum.
    """
    rho_ab, da, db = _check_bipartite(rho_ab, dims)
    env = da if env_dim is None else int(env_dim)
    if not 1 <= env <= da * da:
        raise ValueError("environment dimension must lie in [1, dA**2]")
    rng = check_random_state(seed)
    starts = _structured_starts(da, env)
    starts += [(f"random{i}", random_isometry(da, da * env, rng)) for i in range(restarts)]
    labels, values, best = [], [], None
    for label, v0 in starts:
        v, s = _descend(v0, rho_ab, (da, db), env)
        labels.append(label)
        values.append(s)
        if best is None or s < best[1] - 1e-12:
            best = (v, s)
    channel = channel_from_isometry(best[0], da)
    return OutputEntropySearch(channel, float(best[1]), tuple(labels), tuple(float(x) for x in values))


@dataclass(frozen=True)
class LambdaSearchResult:
    """Best preprocessing map found and its sup-spectral conditional entropy at ``n``."""

    channel: KrausChannel
    value: float
    identity_value: float
    single_letter_value: float
    n: int
    used_identity: bool
    search: OutputEntropySearch
    note: str = ""


def minimize_lambda(rho_ab, dims, n: int, restarts: int = DEFAULT_RESTARTS, seed=None,
                    env_dim: Optional[int] = None, **estimator_kwargs) -> LambdaSearchResult:
    """Minimize the sup-spectral conditional entropy over preprocessing maps on A.

    Candidates come from :func:`minimize_output_entropy` on a single copy
    (``S(B)`` does not depend on the map). The best candidate and the
    identity are then scored at ``n`` and the smaller value is returned.
    """
    rho_ab, da, db = _check_bipartite(rho_ab, dims)
    search = minimize_output_entropy(rho_ab, (da, db), restarts, seed, env_dim)
    ident = identity_channel(da)
    id_value = conditional_sup_entropy(rho_ab, (da, db), ident, n, **estimator_kwargs)
    note = ""
    try:
        cand_value = conditional_sup_entropy(rho_ab, (da, db), search.channel, n, **estimator_kwargs)
    except UnsupportedStructureError as exc:
        cand_value, note = np.inf, f"candidate not evaluable at n={n}: {exc}"
    s_b = von_neumann_entropy(partial_trace(rho_ab, (da, db), [1]))
    use_id = id_value <= cand_value
    return LambdaSearchResult(
        ident if use_id else search.channel,
        float(id_value if use_id else cand_value),
        float(id_value),
        float(search.value - s_b),
        int(n),
        bool(use_id),
        search,
        note,
    )


@dataclass(frozen=True)
class DenseCodingEstimate:
    n: int
    capacity: float
    conditional_entropy: float
    used_identity: bool


def dc_capacity_estimate(rho_ab, dims, ns: Sequence[int], restarts: int = DEFAULT_RESTARTS, seed=None,
                         **estimator_kwargs):
    """``log d - min_Lambda`` sup-spectral conditional entropy, per ``n``."""
    da = int(dims[0])
    rows = []
    for n in ns:
        res = minimize_lambda(rho_ab, dims, n, restarts=restarts, seed=seed, **estimator_kwargs)
        rows.append(DenseCodingEstimate(int(n), float(np.log(da) - res.value), res.value, res.used_identity))
    return rows


def horodecki_capacity(rho_ab, dims, N: int, restarts: int = DEFAULT_RESTARTS, seed=None) -> float:
    """``log d + S(B) - min_Lambda S((Lambda ⊗ id) rho^{⊗N}) / N`` with ``Lambda`` on ``A^N``."""
    rho_ab, da, db = _check_bipartite(rho_ab, dims)
    big = block_power(rho_ab, (da, db), N)
    search = minimize_output_entropy(big, (da**N, db**N), restarts, seed)
    s_b = von_neumann_entropy(partial_trace(rho_ab, (da, db), [1]))
    return float(np.log(da) + s_b - search.value / N)


# ---------------------------------------------------------------------------
# protocol simulation and bounds
# ---------------------------------------------------------------------------

def dense_coding_ensemble(rho_ab, dims, n: int, channel: Optional[KrausChannel] = None):
    """Uniform ensemble of the ``d^{2n}`` Weyl codewords of ``((Lambda ⊗ id) rho)^{⊗n}``.

    Returns ``(ensemble, rho_lambda_n)`` with factors ordered ``A^n B^n``.
    """
    rho_ab, da, db = _check_bipartite(rho_ab, dims)
    base = block_power(preprocess(rho_ab, (da, db), channel), (da, db), n)
    D, dbn = da**n, db**n
    states = np.array([_on_a(u, base, dbn) for _, u in WeylSet(D)])
    return CQEnsemble.uniform(states), base


def conditional_threshold_trace(rho_lambda_n, dims_n, n: int, gamma: float, log_d: float) -> float:
    """``Tr[{rho >= c I ⊗ rho_B} (rho - c I ⊗ rho_B)]`` with ``c = exp(-n (log d - gamma))``."""
    D, dbn = dims_n
    rho_b = partial_trace(rho_lambda_n, (D, dbn), [1])
    c = np.exp(-n * (log_d - gamma))
    return positive_part_trace(rho_lambda_n - c * np.kron(np.eye(D), rho_b))


def weyl_average_trace(ens: CQEnsemble, n: int, gamma: float) -> float:
    """``sum_x p_x Tr[{rho_x >= e^{n gamma} rho_bar} (rho_x - e^{n gamma} rho_bar)]``."""
    bar = np.exp(n * gamma) * ens.average_state()
    return float(sum(p * positive_part_trace(s - bar) for p, s in zip(ens.priors, ens.states)))


@dataclass(frozen=True)
class DenseCodingRun:
    n: int
    M: int
    gamma: float
    error: float
    bound: float
    conditional_trace: float
    labels: tuple


def dc_simulate(rho_ab, dims, n: int, M: int, gamma: float, seed=None,
                channel: Optional[KrausChannel] = None) -> DenseCodingRun:
    """Random Weyl code of ``M`` distinct encodings decoded by a pretty-good measurement.

    ``bound`` is the achievability bound for the uniform prior over all
    ``d^{2n}`` encodings; ``conditional_trace`` lower-bounds the decoding
    weight that enters it.
    """
    rho_ab, da, db = _check_bipartite(rho_ab, dims)
    if not 1 <= M <= da ** (2 * n):
        raise ValueError(f"M must lie in [1, d^(2n) = {da ** (2 * n)}]")
    ens, base = dense_coding_ensemble(rho_ab, (da, db), n, channel)
    code = pgm_codebook(ens, n, M, gamma, seed=seed, replace=False)
    return DenseCodingRun(
        int(n), int(M), float(gamma),
        average_error(code, ens),
        hn_bound(ens, n, gamma, M, relation="<"),
        conditional_threshold_trace(base, (da**n, db**n), n, gamma, np.log(da)),
        tuple(int(x) for x in code.labels),
    )


def dc_converse_bound(rho_ab, dims, encodings: Sequence[KrausChannel], n: int, gamma: float, M: int) -> float:
    """``1 - max_i Tr[{Pi_i >= 0} Pi_i] - exp(n (log d - gamma)) / M`` with
    ``Pi_i = (E_i ⊗ id) rho_n - exp(-n gamma) I ⊗ rho_B``.

    ``encodings`` are maps on ``A^n``; ``rho_n`` is ``rho^{⊗n}`` ordered ``A^n B^n``.
    """
    rho_ab, da, db = _check_bipartite(rho_ab, dims)
    if M < 1:
        raise ValueError("M must be >= 1")
    if not encodings:
        raise ValueError("need at least one encoding")
    base = block_power(rho_ab, (da, db), n)
    D, dbn = da**n, db**n
    rho_b = partial_trace(base, (D, dbn), [1])
    ref = np.exp(-n * gamma) * np.kron(np.eye(D), rho_b)
    best = 0.0
    for enc in encodings:
        word = apply(_lift(enc, D, dbn), base)
        best = max(best, positive_part_trace(word - ref))
    return float(1.0 - best - np.exp(n * (np.log(da) - gamma)) / M)


def weyl_encodings(D: int):
    """The ``D**2`` Weyl unitaries as channels, in label order."""
    return [KrausChannel(u[None]) for _, u in WeylSet(D)]
