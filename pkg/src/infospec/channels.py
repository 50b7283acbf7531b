"""CPTP maps in Kraus form and POVM decoders."""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .operators import SubsystemShape, random_unitary, tensor
from .validation import check_hermitian, check_random_state, check_square

TP_TOL = 1e-9
POVM_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """Completely positive trace-preserving map ``rho -> sum_k K_k rho K_k^dagger``.

    ``kraus_ops`` has shape ``(num_ops, out_dim, in_dim)``.
    """

    kraus_ops: np.ndarray

    def __post_init__(self):
        ops = np.asarray(self.kraus_ops, dtype=complex)
        if ops.ndim == 2:
            ops = ops[None]
        if ops.ndim != 3 or ops.shape[0] == 0:
            raise ValueError(f"Kraus list must be a nonempty stack of matrices, got shape {ops.shape}")
        ops.setflags(write=False)
        object.__setattr__(self, "kraus_ops", ops)
        gram = np.einsum("kji,kjl->il", ops.conj(), ops)
        err = float(np.max(np.abs(gram - np.eye(self.in_dim))))
        if err > TP_TOL:
            raise ValueError(f"Kraus operators are not trace preserving: max |sum K^dag K - I| = {err:.3e}")

    @property
    def in_dim(self) -> int:
        return self.kraus_ops.shape[2]

    @property
    def out_dim(self) -> int:
        return self.kraus_ops.shape[1]

    def __len__(self):
        return self.kraus_ops.shape[0]

    def __call__(self, rho):
        return apply(self, rho)

    def kron(self, other: "KrausChannel") -> "KrausChannel":
        """``self ⊗ other`` acting on the tensor product of the input spaces."""
        ops = [np.kron(a, b) for a in self.kraus_ops for b in other.kraus_ops]
        return KrausChannel(np.array(ops))

    def power(self, n: int) -> "KrausChannel":
        """Memoryless n-fold product channel. Kraus count grows as len(self)**n."""
        out = self
        for _ in range(n - 1):
            out = out.kron(self)
        return out

    def on_subsystem(self, shape, index: int) -> "KrausChannel":
        """Lift to the full space of ``shape``, acting on factor ``index`` only.

        Requires ``in_dim == out_dim`` so the surrounding shape is unchanged.
        """
        shape = shape if isinstance(shape, SubsystemShape) else SubsystemShape(tuple(shape))
        if shape.factor_dims[index] != self.in_dim or self.in_dim != self.out_dim:
            raise ValueError("channel dims do not match the selected factor")
        left = int(np.prod(shape.factor_dims[:index]))
        right = int(np.prod(shape.factor_dims[index + 1:]))
        ops = [tensor(np.eye(left), k, np.eye(right)) for k in self.kraus_ops]
        return KrausChannel(np.array(ops))


@dataclass(frozen=True, eq=False)
class POVM:
    """Measurement elements ``E_1..E_M`` with ``sum E_i <= I``.

    The failure element ``E_0 = I - sum E_i`` is implicit.
    """

    elements: np.ndarray

    def __post_init__(self):
        el = np.asarray(self.elements, dtype=complex)
        if el.ndim != 3 or el.shape[1] != el.shape[2]:
            raise ValueError(f"POVM elements must be a stack of square matrices, got {el.shape}")
        for i, e in enumerate(el):
            check_hermitian(e, tol=POVM_TOL, name=f"POVM element {i}")
            if np.linalg.eigvalsh(e)[0] < -1e-10:
                raise ValueError(f"POVM element {i} is not positive semidefinite")
        deficit = np.eye(el.shape[1]) - el.sum(axis=0)
        if el.shape[0] and np.linalg.eigvalsh((deficit + deficit.conj().T) / 2)[0] < -POVM_TOL:
            raise ValueError("POVM elements sum to more than the identity")
        el.setflags(write=False)
        object.__setattr__(self, "elements", el)

    @property
    def dim(self) -> int:
        return self.elements.shape[1]

    def __len__(self):
        return self.elements.shape[0]

    def failure_element(self):
        return np.eye(self.dim) - self.elements.sum(axis=0)

    def probabilities(self, rho):
        """Outcome probabilities ``Tr[rho E_i]`` for i = 1..M (failure excluded)."""
        return np.einsum("kij,ji->k", self.elements, rho).real


def apply(channel: KrausChannel, rho):
    rho = check_square(rho, "state")
    if rho.shape[0] != channel.in_dim:
        raise ValueError(f"dimension mismatch: channel input {channel.in_dim}, state {rho.shape[0]}")
    k = channel.kraus_ops
    out = np.einsum("kij,jl,kml->im", k, rho, k.conj())
    return (out + out.conj().T) / 2


def entanglement_fidelity(rho, channel: KrausChannel) -> float:
    """``F(rho, channel) = sum_k |Tr(K_k rho)|^2``."""
    rho = check_square(rho, "state")
    if channel.in_dim != channel.out_dim or channel.in_dim != rho.shape[0]:
        raise ValueError("entanglement fidelity needs a channel from the state's space to itself")
    traces = np.einsum("kij,ji->k", channel.kraus_ops, rho)
    return float(np.sum(np.abs(traces) ** 2))


def compose(second: KrausChannel, first: KrausChannel) -> KrausChannel:
    """``second ∘ first``; Kraus operators are all products ``K2 K1``."""
    if first.out_dim != second.in_dim:
        raise ValueError(f"cannot compose: first outputs dim {first.out_dim}, second takes {second.in_dim}")
    ops = np.einsum("aij,bjk->abik", second.kraus_ops, first.kraus_ops)
    return KrausChannel(ops.reshape(-1, second.out_dim, first.in_dim))


def random_isometry(in_dim: int, out_dim: int, random_state=None):
    if out_dim < in_dim:
        raise ValueError("an isometry needs out_dim >= in_dim")
    u = random_unitary(out_dim, random_state)
    return u[:, :in_dim]


def channel_from_isometry(v, out_dim: int) -> KrausChannel:
    """Kraus operators of ``rho -> Tr_env[V rho V^dagger]`` with output ordered (out, env)."""
    v = np.asarray(v)
    env = v.shape[0] // out_dim
    ops = v.reshape(out_dim, env, v.shape[1]).transpose(1, 0, 2)
    return KrausChannel(ops)


def random_cptp(in_dim: int, out_dim: int, env_dim: int = 1, seed=None) -> KrausChannel:
    """Random channel from a Haar isometry ``in_dim -> out_dim * env_dim``."""
    if env_dim < 1:
        raise ValueError("env_dim must be >= 1")
    if out_dim * env_dim < in_dim:
        raise ValueError("out_dim * env_dim must be >= in_dim for an isometry")
    rng = check_random_state(seed)
    return channel_from_isometry(random_isometry(in_dim, out_dim * env_dim, rng), out_dim)


# ---- named channels ----

def identity_channel(d: int) -> KrausChannel:
    return KrausChannel(np.eye(d)[None])


def unitary_channel(u) -> KrausChannel:
    return KrausChannel(np.asarray(u)[None])


def dephasing_channel(d: int) -> KrausChannel:
    """Complete dephasing in the computational basis."""
    ops = np.zeros((d, d, d), dtype=complex)
    for i in range(d):
        ops[i, i, i] = 1.0
    return KrausChannel(ops)


def depolarizing_channel(d: int) -> KrausChannel:
    """Completely depolarizing map ``rho -> Tr(rho) I/d``."""
    ops = np.zeros((d * d, d, d), dtype=complex)
    for i in range(d):
        for j in range(d):
            ops[i * d + j, i, j] = 1.0 / np.sqrt(d)
    return KrausChannel(ops)


def replacement_channel(in_dim: int, vec) -> KrausChannel:
    """``sigma -> Tr(sigma) |vec><vec|`` with Kraus operators ``|vec><k|``."""
    vec = np.asarray(vec, dtype=complex).reshape(-1)
    vec = vec / np.linalg.norm(vec)
    ops = np.array([np.outer(vec, np.eye(in_dim)[k]) for k in range(in_dim)])
    return KrausChannel(ops)


def bit_flip_channel(f: float) -> KrausChannel:
    """Qubit map ``(1-f) rho + f X rho X``; a binary symmetric channel on diagonal inputs."""
    if not 0.0 <= f <= 1.0:
        raise ValueError("flip probability must lie in [0, 1]")
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    return KrausChannel(np.array([np.sqrt(1 - f) * np.eye(2), np.sqrt(f) * x]))


def mixed_unitary_channel(probs: Sequence[float], unitaries) -> KrausChannel:
    ops = [np.sqrt(p) * np.asarray(u) for p, u in zip(probs, unitaries) if p > 0]
    return KrausChannel(np.array(ops))
