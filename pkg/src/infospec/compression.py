"""Blind block compression onto high-eigenvalue subspaces, its fidelity bounds,
and the projector construction for mixed sources."""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channels import KrausChannel, compose, entanglement_fidelity, identity_channel
from .operators import spectral_projection
from .spectrum import SourceSequence, difference_trace, spectral_entropy_estimates
from .validation import check_density_matrix, check_hermitian, check_projector

# Gram-Schmidt residual norms below this mean "already in the subspace".
INDEPENDENCE_TOL = 1e-9
# Above this dimension fidelities are evaluated from the closed form instead of Kraus lists.
KRAUS_DIM_LIMIT = 64


class EmptyProjectorError(ValueError):
    """The compression threshold lies above every eigenvalue of the state."""


@dataclass(frozen=True, eq=False)
class CompressionScheme:
    """Compression ``C_n(s) = P s P + Tr[(I - P) s] |chi0><chi0|`` with identity decoding."""

    n: int
    projector: np.ndarray
    chi0: np.ndarray

    def __post_init__(self):
        p = check_projector(self.projector)
        chi0 = np.asarray(self.chi0, dtype=complex).reshape(-1)
        if abs(np.linalg.norm(chi0) - 1) > 1e-9:
            raise ValueError("chi0 must be a unit vector")
        if np.max(np.abs(p @ chi0 - chi0)) > 1e-9:
            raise ValueError("chi0 must lie in the range of the compression projector")
        object.__setattr__(self, "projector", p)
        object.__setattr__(self, "chi0", chi0)

    @property
    def dim(self) -> int:
        return self.projector.shape[0]

    @property
    def rank(self) -> int:
        """Compressed dimension ``M_n = Tr P_n``."""
        return int(round(np.trace(self.projector).real))

    @property
    def rate(self) -> float:
        return float(np.log(self.rank) / self.n)

    def complement_basis(self):
        """Orthonormal basis of the range of ``I - P``, as columns."""
        w, v = np.linalg.eigh(np.eye(self.dim) - self.projector)
        return v[:, w > 0.5]

    @property
    def encoder(self) -> KrausChannel:
        """Kraus form ``{P} ∪ {|chi0><k|}``; size grows with the complement dimension."""
        comp = self.complement_basis()
        ops = [self.projector] + [np.outer(self.chi0, comp[:, k].conj()) for k in range(comp.shape[1])]
        return KrausChannel(np.array(ops))

    @property
    def decoder(self) -> KrausChannel:
        return identity_channel(self.dim)

    def compress(self, sigma):
        p = self.projector
        leak = np.trace((np.eye(self.dim) - p) @ sigma)
        return p @ sigma @ p + leak * np.outer(self.chi0, self.chi0.conj())


def _top_vector(rho, p):
    w, v = np.linalg.eigh(p @ rho @ p)
    return v[:, -1]


def scheme_from_projector(rho_n, projector, n: int) -> CompressionScheme:
    p = check_projector(projector)
    if np.trace(p).real < 0.5:
        raise EmptyProjectorError("compression projector is zero")
    return CompressionScheme(n, p, _top_vector(check_hermitian(rho_n), p))


def build_scheme(rho_n, n: int, gamma: float) -> CompressionScheme:
    """Scheme with projector ``{rho_n >= exp(-n gamma) I}``."""
    rho_n = check_density_matrix(rho_n)
    p = spectral_projection(rho_n, ">=", np.exp(-n * gamma))
    if np.trace(p).real < 0.5:
        raise EmptyProjectorError(
            f"rate window below all eigenvalues: exp(-n gamma) = {np.exp(-n * gamma):.3e} "
            f"exceeds the largest eigenvalue of rho_n"
        )
    return scheme_from_projector(rho_n, p, n)


def rate_budget(n: int, rate: float, dim: int) -> int:
    """``floor(exp(n R))`` clipped to ``[1, dim]``."""
    return int(min(dim, max(1, np.floor(np.exp(n * rate) + 1e-9))))


def best_case_scheme(rho_n, n: int, rate: float) -> CompressionScheme:
    """Projector onto the ``floor(exp(n R))`` eigenvectors of largest eigenvalue."""
    rho_n = check_density_matrix(rho_n)
    m = rate_budget(n, rate, rho_n.shape[0])
    w, v = np.linalg.eigh(rho_n)
    top = v[:, ::-1][:, :m]
    return CompressionScheme(n, top @ top.conj().T, top[:, 0])


def scheme_fidelity(rho_n, scheme: CompressionScheme, method: str = "auto") -> float:
    """Entanglement fidelity of ``D_n ∘ C_n`` on ``rho_n``.

    ``method="kraus"`` composes the Kraus lists and sums ``|Tr(K rho)|^2``;
    ``"closed"`` evaluates the same sum without materializing the rank-one
    Kraus operators: ``|Tr P rho|^2 + <chi0| rho (I - P) rho |chi0>``.
    """
    rho_n = check_hermitian(rho_n)
    if method == "auto":
        method = "kraus" if scheme.dim <= KRAUS_DIM_LIMIT else "closed"
    if method == "kraus":
        return entanglement_fidelity(rho_n, compose(scheme.decoder, scheme.encoder))
    if method != "closed":
        raise ValueError(f"unknown method {method!r}")
    p = scheme.projector
    kept = abs(np.trace(p @ rho_n)) ** 2
    v = rho_n @ scheme.chi0
    leaked = np.vdot(v, v - p @ v).real
    return float(kept + leaked)


def _threshold_trace(rho, n, gamma):
    """``Tr[{rho_n >= e^{-n gamma}} (rho_n - e^{-n gamma})]`` for a matrix or an identity-reference source."""
    if isinstance(rho, SourceSequence):
        if not rho.reference_is_identity(n):
            raise ValueError("compression bounds need a source with identity reference")
        return float(rho.curve_function(n)(-gamma)[0])
    rho = check_hermitian(rho)
    return difference_trace(rho, np.eye(rho.shape[0]), n, -gamma)


def achievability_bound(rho_n, n: int, gamma: float) -> float:
    """Lower bound ``T^2`` on the fidelity of the threshold scheme at ``gamma``."""
    return _threshold_trace(rho_n, n, gamma) ** 2


def converse_fidelity_bound(rho_n, n: int, rate: float, gamma: float) -> float:
    """Upper bound on the fidelity of any scheme of compressed rank at most ``exp(n R)``."""
    return _threshold_trace(rho_n, n, gamma) + float(np.exp(-n * (gamma - rate)))


def tightest_converse_bound(rho_n, n: int, rate: float, gammas) -> tuple:
    """Minimum of :func:`converse_fidelity_bound` over ``gammas``; returns ``(bound, gamma)``."""
    vals = [converse_fidelity_bound(rho_n, n, rate, g) for g in gammas]
    i = int(np.argmin(vals))
    return vals[i], float(gammas[i])


def best_case_fidelity(source: SourceSequence, n: int, rate: float) -> tuple:
    """Fidelity of the best-case rank ``floor(exp(n R))`` scheme; returns ``(fidelity, rank)``.

    The projector commutes with ``rho_n`` and contains ``chi0``, so the
    fidelity is the squared weight of the top eigenvalues. Types from the
    product spectrum are used when available.
    """
    spec = source.product_spectrum(n)
    if spec is None:
        rho_n, _ = source.operators(n)
        scheme = best_case_scheme(rho_n, n, rate)
        return scheme_fidelity(rho_n, scheme), scheme.rank
    lam, mult = spec.sorted_state_eigenvalues()
    dim = int(round(mult.sum()))
    m = rate_budget(n, rate, dim)
    take = np.minimum(mult, np.maximum(0, m - np.concatenate([[0], np.cumsum(mult)[:-1]])))
    return float(np.sum(take * lam) ** 2), m


def threshold_fidelity(source: SourceSequence, n: int, gamma: float) -> tuple:
    """Fidelity of the threshold scheme ``{rho_n >= e^{-n gamma}}``; returns ``(fidelity, rank)``.

    That projector is spectral, so the fidelity is the squared weight of the
    kept eigenvalues; computed from types when the product spectrum exists.
    """
    spec = source.product_spectrum(n)
    if spec is None:
        rho_n, _ = source.operators(n)
        scheme = build_scheme(rho_n, n, gamma)
        return scheme_fidelity(rho_n, scheme), scheme.rank
    lam, mult = spec.sorted_state_eigenvalues()
    keep = lam >= np.exp(-n * gamma) - 1e-12
    rank = int(round(mult[keep].sum()))
    if rank == 0:
        raise EmptyProjectorError(
            f"rate window below all eigenvalues: exp(-n gamma) = {np.exp(-n * gamma):.3e} "
            f"exceeds the largest eigenvalue of rho_n"
        )
    return float(np.sum(mult[keep] * lam[keep]) ** 2), rank


def strong_converse_probe(source: SourceSequence, rate: float, ns: Sequence[int]):
    """Best-case fidelities across ``ns``; rows of ``{"n", "rank", "fidelity"}``."""
    rows = []
    for n in ns:
        f, m = best_case_fidelity(source, n, rate)
        rows.append({"n": int(n), "rank": int(m), "fidelity": f})
    return rows


# ---------------------------------------------------------------------------
# mixed sources
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MixedSourceProjector:
    """``P0`` from the first component, ``Q`` from the second, and their span ``PK``."""

    p0: np.ndarray
    q: np.ndarray
    pk: np.ndarray
    steps: int

    @property
    def ranks(self):
        return tuple(int(round(np.trace(x).real)) for x in (self.p0, self.q, self.pk))


def mixed_projector(sigma_n, omega_n, n: int, alpha: float) -> MixedSourceProjector:
    """Grow ``{sigma_n >= e^{-n alpha}}`` by the eigenvectors of ``{omega_n >= e^{-n alpha}}``.

    Each eigenvector's component orthogonal to the current subspace is
    adjoined unless its norm is below ``INDEPENDENCE_TOL``.
    """
    if not np.isfinite(alpha):
        raise ValueError("alpha must be finite")
    sigma_n = check_hermitian(sigma_n)
    omega_n = check_hermitian(omega_n)
    thr = np.exp(-n * alpha)
    ws, vs = np.linalg.eigh(sigma_n)
    basis = vs[:, ws >= thr - 1e-12]
    p0 = basis @ basis.conj().T
    wo, vo = np.linalg.eigh(omega_n)
    qvecs = vo[:, wo >= thr - 1e-12]
    q = qvecs @ qvecs.conj().T
    for i in range(qvecs.shape[1]):
        v = qvecs[:, i]
        for _ in range(2):
            v = v - basis @ (basis.conj().T @ v)
        norm = np.linalg.norm(v)
        if norm < INDEPENDENCE_TOL:
            continue
        basis = np.column_stack([basis, v / norm])
    pk = basis @ basis.conj().T
    return MixedSourceProjector(p0, q, pk, qvecs.shape[1])


def mixed_chain(sigma_n, omega_n, t: float, n: int, alpha: float, gamma: float):
    """Both sides of the lower bound on the mixture's threshold trace via ``PK``.

    Returns ``(lhs, rhs)`` with ``lhs = Tr[PK (rho - e^{-n gamma})]`` for
    ``rho = t sigma + (1 - t) omega`` and
    ``rhs = t Tr[P0 sigma] + (1 - t) Tr[Q omega] - 2 e^{-n (gamma - alpha)}``.
    """
    mp = mixed_projector(sigma_n, omega_n, n, alpha)
    rho = t * sigma_n + (1 - t) * omega_n
    d = rho.shape[0]
    lhs = np.trace(mp.pk @ (rho - np.exp(-n * gamma) * np.eye(d))).real
    rhs = (
        t * np.trace(mp.p0 @ sigma_n).real
        + (1 - t) * np.trace(mp.q @ omega_n).real
        - 2 * np.exp(-n * (gamma - alpha))
    )
    return float(lhs), float(rhs)


@dataclass(frozen=True)
class MixedRateRow:
    n: int
    sup_first: float
    sup_second: float
    inf_first: float
    inf_second: float
    sup_mixture: float
    inf_mixture: float

    @property
    def optimal_rate(self) -> float:
        return max(self.sup_first, self.sup_second)

    @property
    def strong_converse_rate(self) -> float:
        return min(self.inf_first, self.inf_second)


def mixed_rate_estimate(first: SourceSequence, second: SourceSequence, t: float,
                        ns: Sequence[int], **estimator_kwargs):
    """Per-n spectral entropy estimates of both components and of their mixture."""
    if not 0.0 < t < 1.0:
        raise ValueError("t must lie in (0, 1)")
    mix = SourceSequence.mixture(t, first, second)
    rows = []
    for n in ns:
        s1 = spectral_entropy_estimates(first, n, **estimator_kwargs)
        s2 = spectral_entropy_estimates(second, n, **estimator_kwargs)
        sm = spectral_entropy_estimates(mix, n, **estimator_kwargs)
        rows.append(MixedRateRow(int(n), s1[0], s2[0], s1[1], s2[1], sm[0], sm[1]))
    return rows
