"""Dense Hermitian linear algebra: spectral projections, tensor structure, entropy.

Operators are plain ``numpy`` complex arrays. Validation lives in
:mod:`infospec.validation`; functions here validate their inputs and return
new arrays, never mutating what they were given.
"""

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np
from scipy.stats import unitary_group

from .validation import check_hermitian, check_random_state, check_square

# Eigenvalues this close to a threshold count as equal to it.
TIE_TOL = 1e-12
# Eigenvalues below this contribute 0 to entropies (0 log 0 := 0).
ENTROPY_CUTOFF = 1e-14

_RELATIONS = (">=", ">", "<=", "<")


@dataclass(frozen=True)
class SubsystemShape:
    """Ordered tensor factor dimensions of a composite Hilbert space."""

    factor_dims: tuple

    def __post_init__(self):
        dims = tuple(int(d) for d in self.factor_dims)
        if not dims or any(d < 1 for d in dims):
            raise ValueError(f"factor dims must be positive integers, got {self.factor_dims}")
        object.__setattr__(self, "factor_dims", dims)

    @property
    def dim(self) -> int:
        return int(np.prod(self.factor_dims))

    def __len__(self):
        return len(self.factor_dims)

    def repeat(self, n: int) -> "SubsystemShape":
        """Shape of ``n`` interleaved copies, e.g. (A1, B1, A2, B2, ...)."""
        return SubsystemShape(self.factor_dims * n)


def eig(h):
    """Eigendecomposition of a Hermitian matrix.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues ascending and
    eigenvectors as the columns of a unitary matrix.
    """
    h = check_hermitian(h)
    return np.linalg.eigh(h)


def _mask(values, relation, threshold):
    if relation not in _RELATIONS:
        raise ValueError(f"relation must be one of {_RELATIONS}, got {relation!r}")
    diff = values - threshold
    if relation == ">=":
        return diff >= -TIE_TOL
    if relation == ">":
        return diff > TIE_TOL
    if relation == "<=":
        return diff <= TIE_TOL
    return diff < -TIE_TOL


def spectral_projection(a, relation=">=", threshold=0.0):
    """Projector onto the eigenspace of ``a`` whose eigenvalues satisfy ``relation``.

    ``spectral_projection(a, ">=")`` is the positive spectral projection
    ``{a >= 0}``. Ties within ``TIE_TOL`` of the threshold satisfy the closed
    relations and fail the strict ones.
    """
    w, v = eig(a)
    keep = _mask(w, relation, threshold)
    vk = v[:, keep]
    return vk @ vk.conj().T


def relative_projection(a, b, relation=">="):
    """``{a relation b}``, i.e. the spectral projection of ``a - b`` against 0."""
    a = check_square(a, "a")
    b = check_square(b, "b")
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return spectral_projection(a - b, relation, 0.0)


def positive_part_trace(a):
    """``Tr[{a >= 0} a]``: the sum of the nonnegative eigenvalues of ``a``."""
    w = np.linalg.eigvalsh(check_hermitian(a))
    return float(np.sum(w[w >= 0]))


def tensor(*ops):
    """Kronecker product of the given operators, left to right."""
    if len(ops) == 1 and not isinstance(ops[0], np.ndarray):
        ops = tuple(ops[0])
    if not ops:
        raise ValueError("tensor() needs at least one operator")
    return reduce(np.kron, (np.asarray(o) for o in ops))


def tensor_power(op, n: int):
    if n < 1:
        raise ValueError("n must be >= 1")
    out = np.asarray(op)
    for _ in range(n - 1):
        out = np.kron(out, op)
    return out


def partial_trace(op, shape, keep: Iterable[int]):
    """Trace out every factor of ``shape`` not listed in ``keep``.

    The kept factors stay in their original order.
    """
    if not isinstance(shape, SubsystemShape):
        shape = SubsystemShape(tuple(shape))
    op = check_square(op)
    if op.shape[0] != shape.dim:
        raise ValueError(
            f"shape {shape.factor_dims} (dim {shape.dim}) inconsistent with operator dim {op.shape[0]}"
        )
    keep = sorted(set(int(k) for k in keep))
    k = len(shape)
    if any(i < 0 or i >= k for i in keep):
        raise ValueError(f"keep indices {keep} out of range for {k} factors")
    dims = shape.factor_dims
    t = op.reshape(dims + dims)
    traced = [i for i in range(k) if i not in keep]
    nleft = k
    # trace one factor at a time, highest index first, so lower axes keep their position
    for i in reversed(traced):
        t = np.trace(t, axis1=i, axis2=i + nleft)
        nleft -= 1
    dk = int(np.prod([dims[i] for i in keep])) if keep else 1
    return t.reshape(dk, dk)


def von_neumann_entropy(rho, base=np.e):
    """``-Tr rho log rho``, natural log unless ``base`` is given."""
    w = np.linalg.eigvalsh(check_hermitian(rho))
    w = w[w > ENTROPY_CUTOFF]
    s = float(-np.sum(w * np.log(w)))
    if base != np.e:
        s /= np.log(base)
    return s + 0.0


def shannon_entropy(p):
    p = np.asarray(p, dtype=float)
    p = p[p > ENTROPY_CUTOFF]
    return float(-np.sum(p * np.log(p))) + 0.0


def binary_entropy(p: float) -> float:
    return shannon_entropy([p, 1.0 - p])


def ket(index: int, dim: int):
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def projector_onto(vec):
    vec = np.asarray(vec, dtype=complex).reshape(-1)
    return np.outer(vec, vec.conj())


def bell_state(index: int = 0):
    """Density matrix of one of the four two-qubit Bell states (index 0 is Phi+)."""
    vecs = np.array(
        [[1, 0, 0, 1], [1, 0, 0, -1], [0, 1, 1, 0], [0, 1, -1, 0]], dtype=complex
    ) / np.sqrt(2)
    return projector_onto(vecs[index])


def maximally_entangled(d: int):
    v = np.eye(d, dtype=complex).reshape(-1) / np.sqrt(d)
    return projector_onto(v)


# ---- random generators; all take a seed or Generator, never the global RNG ----

def random_unitary(d: int, random_state=None):
    rng = check_random_state(random_state)
    return unitary_group.rvs(d, random_state=rng) if d > 1 else np.exp(
        2j * np.pi * rng.random()
    ) * np.ones((1, 1))


def random_hermitian(d: int, random_state=None, scale=1.0):
    rng = check_random_state(random_state)
    x = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * (x + x.conj().T) / 2


def random_density_matrix(d: int, random_state=None, rank: int = None):
    """Density matrix from a Ginibre draw (Hilbert-Schmidt measure for full rank)."""
    rng = check_random_state(random_state)
    r = d if rank is None else rank
    g = rng.normal(size=(d, r)) + 1j * rng.normal(size=(d, r))
    rho = g @ g.conj().T
    rho = (rho + rho.conj().T) / 2
    return rho / np.trace(rho).real


def random_contraction(d: int, random_state=None):
    """Random Hermitian ``P`` with spectrum in [0, 1]."""
    rng = check_random_state(random_state)
    u = random_unitary(d, rng)
    return (u * rng.random(d)) @ u.conj().T


def random_psd(d: int, random_state=None, scale=1.0):
    rng = check_random_state(random_state)
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    m = g @ g.conj().T
    return scale * (m + m.conj().T) / 2


def diag_state(probs: Sequence[float]):
    return np.diag(np.asarray(probs, dtype=complex))


def permute_subsystems(op, shape, perm: Sequence[int]):
    """Reorder tensor factors: factor ``perm[i]`` of the input becomes factor ``i``."""
    if not isinstance(shape, SubsystemShape):
        shape = SubsystemShape(tuple(shape))
    op = check_square(op)
    k = len(shape)
    if sorted(perm) != list(range(k)):
        raise ValueError(f"{perm} is not a permutation of {k} factors")
    t = op.reshape(shape.factor_dims * 2)
    axes = list(perm) + [k + p for p in perm]
    return t.transpose(axes).reshape(op.shape)


def embed_with_identity(op, shape, keep: Sequence[int]):
    """Place ``op`` on the factors ``keep`` of ``shape`` and the identity elsewhere.

    The inverse of a partial trace up to normalization: ``partial_trace`` of
    the result over the identity factors gives ``op`` times their dimension.
    """
    if not isinstance(shape, SubsystemShape):
        shape = SubsystemShape(tuple(shape))
    keep = sorted(keep)
    rest = [i for i in range(len(shape)) if i not in keep]
    d_rest = int(np.prod([shape.factor_dims[i] for i in rest])) if rest else 1
    full = np.kron(op, np.eye(d_rest))
    order = keep + rest
    # full is laid out in `order`; invert that permutation to restore the original order
    inv = [order.index(i) for i in range(len(shape))]
    permuted_shape = SubsystemShape(tuple(shape.factor_dims[i] for i in order))
    return permute_subsystems(full, permuted_shape, inv)
