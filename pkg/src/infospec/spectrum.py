"""Information-spectrum functionals and finite-n rate estimators.

Everything is phrased through the difference operator
``Pi_n(gamma) = rho_n - exp(n gamma) omega_n`` and its positive-part trace

    T_n(gamma) = Tr[{Pi_n(gamma) >= 0} Pi_n(gamma)],

the sum of the nonnegative eigenvalues of ``Pi_n(gamma)``. For a PSD
reference ``T_n`` falls from 1 (gamma -> -inf) to 0, and the sup/inf
divergence rates are where it leaves 0 and 1. At finite ``n`` we locate the
crossings of the levels ``epsilon`` and ``1 - epsilon``.

Sources with commuting product structure (i.i.d. states against i.i.d.
references, products of commuting factors, and mixtures of such) are
evaluated from factor eigenvalues grouped into types, so ``n`` in the
hundreds costs next to nothing. Everything else goes through dense
eigendecompositions.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import logsumexp

from .operators import (
    SubsystemShape,
    embed_with_identity,
    partial_trace,
    permute_subsystems,
    tensor,
    tensor_power,
    von_neumann_entropy,
)
from .validation import check_hermitian, check_square

DEFAULT_EPSILON = 0.01
DEFAULT_WINDOW = (-4.0, 4.0)
DEFAULT_GRID_SIZE = 64
BISECTION_STEPS = 10
COMMUTE_TOL = 1e-10
# dense paths refuse anything larger than this
MAX_DENSE_DIM = 4096


class UnsupportedStructureError(ValueError):
    """The operators do not have the commuting product structure the fast path needs."""


class WindowError(ValueError):
    """The gamma window does not bracket the level crossing."""


# ---------------------------------------------------------------------------
# joint diagonalization and type spectra
# ---------------------------------------------------------------------------

def _commute(a, b, tol=COMMUTE_TOL):
    scale = max(1.0, float(np.max(np.abs(a))), float(np.max(np.abs(b))))
    return float(np.max(np.abs(a @ b - b @ a))) <= tol * scale


def joint_eigenvalues(mats, tol=1e-9):
    """Eigenvalues of pairwise-commuting Hermitian matrices in a shared eigenbasis.

    Returns an array of shape ``(d, len(mats))``; row ``i`` lists the
    eigenvalue of each matrix on the ``i``-th common eigenvector.
    """
    mats = [check_hermitian(m) for m in mats]
    d = mats[0].shape[0]
    for i in range(len(mats)):
        if mats[i].shape != (d, d):
            raise ValueError("joint_eigenvalues needs matrices of equal dimension")
        for j in range(i):
            if not _commute(mats[i], mats[j]):
                raise UnsupportedStructureError(
                    "operators do not commute; no shared eigenbasis for the product fast path"
                )
    blocks = [np.eye(d, dtype=complex)]
    for m in mats:
        refined = []
        for b in blocks:
            w, v = np.linalg.eigh(b.conj().T @ m @ b)
            start = 0
            for i in range(1, len(w) + 1):
                if i == len(w) or w[i] - w[i - 1] > tol:
                    refined.append(b @ v[:, start:i])
                    start = i
        blocks = refined
    basis = np.hstack(blocks)
    vals = np.empty((d, len(mats)))
    for j, m in enumerate(mats):
        r = basis.conj().T @ m @ basis
        off = r - np.diag(np.diag(r))
        if off.size and float(np.max(np.abs(off))) > 1e3 * tol:
            raise UnsupportedStructureError("joint diagonalization failed to converge")
        vals[:, j] = np.diag(r).real
    return vals


def _safe_log(x):
    x = np.asarray(x, dtype=float)
    out = np.full(x.shape, -np.inf)
    pos = x > 0
    out[pos] = np.log(x[pos])
    return out


def _merge(log_values, log_mult):
    """Merge rows with equal (rounded) log values, adding their multiplicities."""
    keys = np.round(log_values, 11)
    _, first, inverse = np.unique(keys, axis=0, return_index=True, return_inverse=True)
    inverse = inverse.reshape(-1)
    peak = np.full(len(first), -np.inf)
    np.maximum.at(peak, inverse, log_mult)
    acc = np.zeros(len(first))
    np.add.at(acc, inverse, np.exp(log_mult - peak[inverse]))
    return log_values[first], peak + np.log(acc)


@dataclass(frozen=True, eq=False)
class ProductSpectrum:
    """Joint spectrum of commuting product operators, grouped by type.

    ``log_values[r, j]`` is the log eigenvalue of component ``j`` on every
    eigenvector of type ``r``; ``log_mult[r]`` is the log of how many joint
    eigenvectors share that type. Components are the state parts followed by
    the reference as the last column.
    """

    log_values: np.ndarray
    log_mult: np.ndarray
    state_weights: tuple = (1.0,)

    @classmethod
    def from_factors(cls, factors, state_weights=(1.0,)):
        """Build from per-factor joint eigenvalue arrays of shape ``(k_i, c)``."""
        factors = [np.atleast_2d(np.asarray(f, dtype=float)) for f in factors]
        c = factors[0].shape[1]
        if len(state_weights) != c - 1:
            raise ValueError("need one weight per state column (all but the last)")
        lv = np.zeros((1, c))
        lm = np.zeros(1)
        cache = {}
        for f in factors:
            key = id(f)
            if key not in cache:
                cache[key] = _merge(_safe_log(f), np.zeros(len(f)))
            fl, fm = cache[key]
            lv = (lv[:, None, :] + fl[None, :, :]).reshape(-1, c)
            lm = (lm[:, None] + fm[None, :]).reshape(-1)
            # rows where every state component vanishes contribute nothing
            alive = np.any(np.isfinite(lv[:, :-1]), axis=1)
            lv, lm = _merge(lv[alive], lm[alive])
        return cls(lv, lm, tuple(float(w) for w in state_weights))

    @classmethod
    def iid(cls, factor, n: int, state_weights=(1.0,)):
        factor = np.asarray(factor, dtype=float)
        return cls.from_factors([factor] * n, state_weights)

    def state_masses(self):
        """Per-type eigenvalue of the state and the total weight ``mult * eigenvalue``."""
        lam = np.zeros(len(self.log_mult))
        mass = np.zeros(len(self.log_mult))
        with np.errstate(over="ignore"):
            for j, w in enumerate(self.state_weights):
                if w == 0:
                    continue
                lam += w * np.exp(self.log_values[:, j])
                mass += w * np.exp(self.log_mult + self.log_values[:, j])
        return lam, mass

    def positive_part_trace(self, n: int, gammas):
        """``T_n(gamma)`` for each gamma, from the grouped spectrum."""
        g = np.atleast_1d(np.asarray(gammas, dtype=float))
        _, mass = self.state_masses()
        with np.errstate(over="ignore"):
            ref = np.exp(self.log_mult[:, None] + self.log_values[:, -1][:, None] + n * g[None, :])
        t = np.sum(np.maximum(mass[:, None] - ref, 0.0), axis=0)
        return t

    def log_state_eigenvalues(self):
        """Per-type log eigenvalue of the state, computed without underflow."""
        cols = [j for j, w in enumerate(self.state_weights) if w != 0]
        logs = self.log_values[:, cols] + np.log([self.state_weights[j] for j in cols])
        with np.errstate(invalid="ignore"):
            return logsumexp(logs, axis=1)

    def entropy(self):
        _, mass = self.state_masses()
        log_lam = self.log_state_eigenvalues()
        ok = np.isfinite(log_lam) & (mass > 0)
        return float(-np.sum(mass[ok] * log_lam[ok]))

    def sorted_state_eigenvalues(self):
        """``(eigenvalues descending, multiplicities)`` of the state."""
        lam, _ = self.state_masses()
        order = np.argsort(-lam, kind="stable")
        return lam[order], np.exp(self.log_mult[order])


def product_trace_fastpath(rho_factors, omega_factors, n: int, gamma):
    """``T_n(gamma)`` for simultaneously diagonal product operators.

    ``rho_factors`` and ``omega_factors`` are either a single pair of
    eigenvalue lists (i.i.d.: the same factor ``n`` times, paired by index),
    a sequence of ``n`` such pairs (a general product), or matrices, which
    are jointly diagonalized first and rejected if they do not commute.
    """
    rho_factors = [np.asarray(f) for f in _as_factor_list(rho_factors, n)]
    omega_factors = [np.asarray(f) for f in _as_factor_list(omega_factors, n)]
    if len(rho_factors) != len(omega_factors):
        raise ValueError("need as many reference factors as state factors")
    joint = []
    for r, w in zip(rho_factors, omega_factors):
        if r.ndim == 2 or w.ndim == 2:
            joint.append(joint_eigenvalues([_as_matrix(r), _as_matrix(w)]))
        else:
            if r.shape != w.shape:
                raise UnsupportedStructureError("eigenvalue lists of different lengths cannot be paired")
            joint.append(np.column_stack([r.real, w.real]))
    # reuse one array for repeated factors so types are merged once
    if all(j is joint[0] or np.array_equal(j, joint[0]) for j in joint):
        spec = ProductSpectrum.iid(joint[0], len(joint))
    else:
        spec = ProductSpectrum.from_factors(joint)
    out = spec.positive_part_trace(n, gamma)
    return float(out[0]) if np.ndim(gamma) == 0 else out


def _as_factor_list(f, n):
    if isinstance(f, (list, tuple)) and not np.isscalar(f[0]):
        if len(f) != n:
            raise ValueError(f"expected {n} factors, got {len(f)}")
        return list(f)
    return [f] * n


def _as_matrix(x):
    x = np.asarray(x)
    return np.diag(x) if x.ndim == 1 else x


# ---------------------------------------------------------------------------
# dense paths
# ---------------------------------------------------------------------------

def difference_trace(rho_n, omega_n, n: int, gamma: float) -> float:
    """``Tr[{Pi >= 0} Pi]`` with ``Pi = rho_n - exp(n gamma) omega_n``, by direct diagonalization."""
    rho_n = check_hermitian(rho_n, name="rho_n")
    omega_n = check_hermitian(omega_n, name="omega_n")
    if rho_n.shape != omega_n.shape:
        raise ValueError(f"dimension mismatch: rho_n {rho_n.shape} vs omega_n {omega_n.shape}")
    w = np.linalg.eigvalsh(rho_n - np.exp(n * gamma) * omega_n)
    return float(np.sum(w[w >= 0]))


class _DenseCurve:
    """Evaluates ``T_n`` for explicit matrices; one diagonalization when they commute."""

    def __init__(self, rho_n, omega_n, n):
        rho_n = check_hermitian(rho_n, tol=1e-10, name="rho_n")
        omega_n = check_hermitian(omega_n, tol=1e-10, name="omega_n")
        if rho_n.shape != omega_n.shape:
            raise ValueError(f"dimension mismatch: rho_n {rho_n.shape} vs omega_n {omega_n.shape}")
        if rho_n.shape[0] > MAX_DENSE_DIM:
            raise ValueError(f"dimension {rho_n.shape[0]} exceeds the dense limit {MAX_DENSE_DIM}")
        self.n = n
        self.rho = rho_n
        self.omega = omega_n
        self.joint = None
        if _commute(rho_n, omega_n):
            try:
                self.joint = joint_eigenvalues([rho_n, omega_n])
            except UnsupportedStructureError:
                self.joint = None

    def __call__(self, gammas):
        g = np.atleast_1d(np.asarray(gammas, dtype=float))
        if self.joint is not None:
            lam, mu = self.joint[:, 0], self.joint[:, 1]
            vals = lam[:, None] - np.exp(self.n * g)[None, :] * mu[:, None]
            return np.sum(np.maximum(vals, 0.0), axis=0)
        out = np.empty(len(g))
        for i, gi in enumerate(g):
            w = np.linalg.eigvalsh(self.rho - np.exp(self.n * gi) * self.omega)
            out[i] = np.sum(w[w >= 0])
        return out


class _SpectrumCurve:
    def __init__(self, spectrum: ProductSpectrum, n):
        self.spectrum = spectrum
        self.n = n

    def __call__(self, gammas):
        return self.spectrum.positive_part_trace(self.n, gammas)


# ---------------------------------------------------------------------------
# sources
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SourceSequence:
    """A sequence ``n -> (rho_n, omega_n)`` of states and PSD references.

    Build with :meth:`iid`, :meth:`product`, :meth:`mixture` or
    :meth:`general`; the constructors record the structure the fast path can
    exploit. ``beta`` bounds ``log(dim_n) / n``.
    """

    generator: Callable[[int], tuple]
    kind: str = "general"
    beta: Optional[float] = None
    data: tuple = ()
    _cache: dict = field(default_factory=dict, repr=False)

    # -- constructors --

    @classmethod
    def iid(cls, rho, omega=None):
        rho = check_square(rho, "rho")
        omega = np.eye(rho.shape[0], dtype=complex) if omega is None else check_square(omega, "omega")
        if omega.shape != rho.shape:
            raise ValueError("rho and omega factors must have equal dimension")
        return cls(
            lambda n: (tensor_power(rho, n), tensor_power(omega, n)),
            kind="iid",
            beta=float(np.log(rho.shape[0])),
            data=(rho, omega),
        )

    @classmethod
    def product(cls, pairs: Sequence[tuple]):
        """Independent, non-identical factors: ``rho_n = rho_1 ⊗ ... ⊗ rho_n``."""
        pairs = [(check_square(r), check_square(w)) for r, w in pairs]
        beta = max(float(np.log(r.shape[0])) for r, _ in pairs)

        def gen(n):
            if n > len(pairs):
                raise ValueError(f"product source only defines {len(pairs)} factors")
            return tensor([r for r, _ in pairs[:n]]), tensor([w for _, w in pairs[:n]])

        return cls(gen, kind="product", beta=beta, data=tuple(pairs))

    @classmethod
    def mixture(cls, t: float, first: "SourceSequence", second: "SourceSequence"):
        """``rho_n = t first_n + (1 - t) second_n`` against ``first``'s reference."""
        if not 0.0 < t < 1.0:
            raise ValueError("mixture weight must lie in (0, 1)")

        def gen(n):
            r1, w1 = first.operators(n)
            r2, w2 = second.operators(n)
            if r1.shape != r2.shape or not np.allclose(w1, w2, atol=1e-12):
                raise ValueError("mixed components need equal dimensions and a common reference")
            return t * r1 + (1 - t) * r2, w1

        beta = max(first.beta or 0.0, second.beta or 0.0)
        return cls(gen, kind="mixed", beta=beta, data=(t, first, second))

    @classmethod
    def general(cls, generator: Callable[[int], tuple], beta: Optional[float] = None):
        return cls(generator, kind="general", beta=beta)

    # -- evaluation --

    def operators(self, n: int):
        if n < 1:
            raise ValueError("n must be >= 1")
        rho, omega = self.generator(n)
        rho = check_square(rho, "rho_n")
        omega = check_square(omega, "omega_n")
        if rho.shape != omega.shape:
            raise ValueError(f"rho_n {rho.shape} and omega_n {omega.shape} differ in dimension")
        if self.beta is not None and np.log(rho.shape[0]) / n > self.beta + 1e-12:
            raise ValueError(f"log(d_n)/n = {np.log(rho.shape[0]) / n:.4f} exceeds beta = {self.beta}")
        return rho, omega

    def product_spectrum(self, n: int) -> Optional[ProductSpectrum]:
        """Grouped joint spectrum at ``n``, or ``None`` if the fast path does not apply."""
        key = ("spectrum", n)
        if key in self._cache:
            return self._cache[key]
        spec = None
        try:
            if self.kind == "iid":
                spec = ProductSpectrum.iid(self._iid_joint(), n)
            elif self.kind == "product":
                if n <= len(self.data):
                    spec = ProductSpectrum.from_factors(
                        [joint_eigenvalues([r, w]) for r, w in self.data[:n]]
                    )
            elif self.kind == "mixed":
                t, first, second = self.data
                if first.kind == "iid" and second.kind == "iid":
                    (r1, w1), (r2, w2) = first.data, second.data
                    if np.allclose(w1, w2, atol=1e-12):
                        joint = joint_eigenvalues([r1, r2, w1])
                        spec = ProductSpectrum.iid(joint, n, state_weights=(t, 1 - t))
        except UnsupportedStructureError:
            spec = None
        self._cache[key] = spec
        return spec

    def _iid_joint(self):
        if "joint" not in self._cache:
            self._cache["joint"] = joint_eigenvalues(list(self.data))
        return self._cache["joint"]

    def curve_function(self, n: int):
        """Callable ``gammas -> T_n(gammas)`` using the fastest valid path."""
        spec = self.product_spectrum(n)
        if spec is not None:
            return _SpectrumCurve(spec, n)
        if self.kind == "iid" and self.data[0].shape[0] ** n > MAX_DENSE_DIM:
            raise UnsupportedStructureError(
                f"non-commuting i.i.d. factors at n={n} need dimension "
                f"{self.data[0].shape[0]}**{n} > dense limit {MAX_DENSE_DIM}"
            )
        rho, omega = self.operators(n)
        return _DenseCurve(rho, omega, n)

    def reference_is_identity(self, n: int) -> bool:
        if self.kind == "iid":
            w = self.data[1]
            return bool(np.allclose(w, np.eye(w.shape[0]), atol=1e-12))
        if self.kind == "mixed":
            return self.data[1].reference_is_identity(n)
        _, omega = self.operators(n)
        return bool(np.allclose(omega, np.eye(omega.shape[0]), atol=1e-12))

    def entropy_rate(self, n: int) -> float:
        """``S(rho_n) / n`` (natural log)."""
        spec = self.product_spectrum(n)
        if spec is not None:
            return spec.entropy() / n
        return von_neumann_entropy(self.operators(n)[0]) / n


# ---------------------------------------------------------------------------
# curves and rate estimates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectralTraceCurve:
    """Samples ``(gamma, T_n(gamma))`` of the positive-part trace."""

    n: int
    gammas: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if np.any(v < -1e-9) or np.any(v > 1 + 1e-9):
            raise ValueError("trace curve values must lie in [0, 1]")

    def is_nonincreasing(self, tol=1e-9) -> bool:
        return bool(np.all(np.diff(self.values) <= tol))

    def __iter__(self):
        return iter(zip(self.gammas, self.values))


@dataclass(frozen=True)
class RateEstimate:
    """Finite-n crossing of ``T_n`` with ``epsilon`` (sup side) or ``1 - epsilon`` (inf side)."""

    gamma_hat: float
    n: int
    epsilon: float
    side: str
    window: tuple
    tolerance: float

    def __float__(self):
        return float(self.gamma_hat)


def _grid(window, grid_size):
    lo, hi = float(window[0]), float(window[1])
    if not hi > lo:
        raise ValueError(f"window must satisfy lo < hi, got {window}")
    if grid_size < 2:
        raise ValueError("grid_size must be >= 2")
    return np.linspace(lo, hi, int(grid_size))


def trace_curve(source: SourceSequence, n: int, gammas=None, window=DEFAULT_WINDOW,
                grid_size=DEFAULT_GRID_SIZE) -> SpectralTraceCurve:
    g = _grid(window, grid_size) if gammas is None else np.asarray(gammas, dtype=float)
    values = source.curve_function(n)(g)
    return SpectralTraceCurve(n, g, np.clip(values, 0.0, None))


def _locate(fn, n, side, epsilon, grid):
    """Grid search plus bisection for the crossing; ``None`` if the grid does not bracket it."""
    vals = fn(grid)
    step = grid[1] - grid[0]
    if side == "sup":
        hit = vals <= epsilon
        if hit[0] or not hit[-1]:
            return None
        i = int(np.argmax(hit))
        lo, hi = grid[i - 1], grid[i]
        for _ in range(BISECTION_STEPS):
            mid = 0.5 * (lo + hi)
            if fn(mid)[0] <= epsilon:
                hi = mid
            else:
                lo = mid
        return hi, step / 2**BISECTION_STEPS
    level = 1.0 - epsilon
    hit = vals >= level
    if not hit[0] or hit[-1]:
        return None
    i = len(hit) - 1 - int(np.argmax(hit[::-1]))
    lo, hi = grid[i], grid[i + 1]
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        if fn(mid)[0] >= level:
            lo = mid
        else:
            hi = mid
    return lo, step / 2**BISECTION_STEPS


def _estimate(source, n, side, gammas, epsilon, window, grid_size):
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    fn = source.curve_function(n)
    grid = _grid(window, grid_size) if gammas is None else np.sort(np.asarray(gammas, dtype=float))
    for attempt in range(2):
        found = _locate(fn, n, side, epsilon, grid)
        if found is not None:
            gamma_hat, tol = found
            return RateEstimate(float(gamma_hat), n, epsilon, side, (float(grid[0]), float(grid[-1])), tol)
        if attempt == 0:
            center = 0.5 * (grid[0] + grid[-1])
            half = grid[-1] - grid[0]
            grid = np.linspace(center - half, center + half, len(grid))
    raise WindowError(
        f"{side} crossing at n={n} (level {epsilon if side == 'sup' else 1 - epsilon}) "
        f"is not bracketed by [{grid[0]:.4g}, {grid[-1]:.4g}] even after doubling; widen window"
    )


def sup_divergence_estimate(source: SourceSequence, n: int, gammas=None, epsilon=DEFAULT_EPSILON,
                            window=DEFAULT_WINDOW, grid_size=DEFAULT_GRID_SIZE) -> RateEstimate:
    """Smallest gamma with ``T_n(gamma) <= epsilon``."""
    return _estimate(source, n, "sup", gammas, epsilon, window, grid_size)


def inf_divergence_estimate(source: SourceSequence, n: int, gammas=None, epsilon=DEFAULT_EPSILON,
                            window=DEFAULT_WINDOW, grid_size=DEFAULT_GRID_SIZE) -> RateEstimate:
    """Largest gamma with ``T_n(gamma) >= 1 - epsilon``."""
    return _estimate(source, n, "inf", gammas, epsilon, window, grid_size)


def spectral_entropy_estimates(source: SourceSequence, n: int, **kwargs):
    """``(sup-entropy, inf-entropy)`` estimates: negated inf/sup divergences against the identity."""
    if not source.reference_is_identity(n):
        raise ValueError("spectral entropies need the identity as reference")
    upper = -inf_divergence_estimate(source, n, **kwargs).gamma_hat
    lower = -sup_divergence_estimate(source, n, **kwargs).gamma_hat
    return upper, lower


# ---------------------------------------------------------------------------
# bipartite sources: conditional entropy and mutual information
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BipartiteSource:
    """Sequence of bipartite states ``n -> rho_n^{AB}`` with declared factor layout.

    ``shape(n)`` gives the tensor factors of ``rho_n`` and ``a_factors(n)``
    the indices belonging to A; the rest are B.
    """

    generator: Callable[[int], np.ndarray]
    shape: Callable[[int], SubsystemShape]
    a_factors: Callable[[int], Sequence[int]]
    factor: Optional[tuple] = None

    @classmethod
    def iid(cls, rho_ab, dims):
        """``rho_ab^{⊗n}`` with factors interleaved as A1 B1 A2 B2 ..."""
        dims = tuple(int(d) for d in dims)
        rho_ab = check_square(rho_ab, "rho_ab")
        if rho_ab.shape[0] != dims[0] * dims[1]:
            raise ValueError(f"state dimension {rho_ab.shape[0]} does not match dims {dims}")
        return cls(
            lambda n: tensor_power(rho_ab, n),
            lambda n: SubsystemShape(dims * n),
            lambda n: list(range(0, 2 * n, 2)),
            factor=(rho_ab, dims),
        )

    def marginals(self, n: int):
        rho = self.generator(n)
        shape = self.shape(n)
        a = list(self.a_factors(n))
        b = [i for i in range(len(shape)) if i not in a]
        return rho, shape, a, b

    def conditional_reference_source(self) -> SourceSequence:
        """State against ``I^A ⊗ rho^B``."""
        if self.factor is not None:
            rho_ab, (da, db) = self.factor
            rho_b = partial_trace(rho_ab, (da, db), [1])
            return SourceSequence.iid(rho_ab, np.kron(np.eye(da), rho_b))

        def gen(n):
            rho, shape, a, b = self.marginals(n)
            return rho, embed_with_identity(partial_trace(rho, shape, b), shape, b)

        return SourceSequence.general(gen)

    def mutual_reference_source(self) -> SourceSequence:
        """State against ``rho^A ⊗ rho^B``."""
        if self.factor is not None:
            rho_ab, (da, db) = self.factor
            rho_a = partial_trace(rho_ab, (da, db), [0])
            rho_b = partial_trace(rho_ab, (da, db), [1])
            return SourceSequence.iid(rho_ab, np.kron(rho_a, rho_b))

        def gen(n):
            rho, shape, a, b = self.marginals(n)
            ra = partial_trace(rho, shape, a)
            rb = partial_trace(rho, shape, b)
            order = list(a) + list(b)
            inv = [order.index(i) for i in range(len(shape))]
            permuted = SubsystemShape(tuple(shape.factor_dims[i] for i in order))
            return rho, permute_subsystems(np.kron(ra, rb), permuted, inv)

        return SourceSequence.general(gen)


def conditional_entropy_estimate(source: BipartiteSource, n: int, **kwargs):
    """``(sup, inf)`` conditional spectral entropy estimates of A given B."""
    ref = source.conditional_reference_source()
    upper = -inf_divergence_estimate(ref, n, **kwargs).gamma_hat
    lower = -sup_divergence_estimate(ref, n, **kwargs).gamma_hat
    return upper, lower


def mutual_information_estimate(source: BipartiteSource, n: int, **kwargs):
    """``(sup, inf)`` spectral mutual information estimates between A and B."""
    ref = source.mutual_reference_source()
    upper = sup_divergence_estimate(ref, n, **kwargs).gamma_hat
    lower = inf_divergence_estimate(ref, n, **kwargs).gamma_hat
    return upper, lower
