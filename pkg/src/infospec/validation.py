"""Input validation helpers shared by every module and estimator."""

import numbers

import numpy as np

HERMITIAN_TOL = 1e-12
STATE_TOL = 1e-10
PROJECTOR_TOL = 1e-9


class NotHermitianError(ValueError):
    """Raised when an operator required to be self-adjoint is not."""


def check_random_state(seed):
    """Turn ``seed`` into a ``numpy.random.Generator``.

    Integers seed a Philox (counter-based) bit generator so independent
    streams can be split off deterministically with ``spawn``.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None:
        return np.random.Generator(np.random.Philox(0))
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.Philox(seed))
    if isinstance(seed, numbers.Integral):
        return np.random.Generator(np.random.Philox(int(seed)))
    raise TypeError(f"cannot build a random generator from {seed!r}")


def check_square(a, name="operator"):
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a.astype(complex, copy=False)


def check_hermitian(a, tol=HERMITIAN_TOL, name="operator"):
    """Return ``a`` as a complex array after checking ``a == a^dagger`` entrywise."""
    a = check_square(a, name)
    asym = float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0
    if asym > tol:
        raise NotHermitianError(
            f"{name} is not Hermitian: max |A - A^dagger| entry is {asym:.3e} (tol {tol:.0e})"
        )
    return a


def check_density_matrix(rho, tol=STATE_TOL, name="state"):
    rho = check_hermitian(rho, name=name)
    tr = np.trace(rho).real
    if abs(tr - 1.0) > tol:
        raise ValueError(f"{name} has trace {tr!r}, expected 1")
    wmin = np.linalg.eigvalsh(rho)[0]
    if wmin < -tol:
        raise ValueError(f"{name} has negative eigenvalue {wmin:.3e}")
    return rho


def check_psd(a, tol=STATE_TOL, name="operator"):
    a = check_hermitian(a, name=name)
    wmin = np.linalg.eigvalsh(a)[0]
    if wmin < -tol:
        raise ValueError(f"{name} is not positive semidefinite (min eigenvalue {wmin:.3e})")
    return a


def check_projector(p, tol=PROJECTOR_TOL, name="projector"):
    p = check_hermitian(p, name=name)
    err = float(np.max(np.abs(p @ p - p))) if p.size else 0.0
    if err > tol:
        raise ValueError(f"{name} is not idempotent (max |P^2 - P| = {err:.3e})")
    return p


def check_same_dim(a, b, names=("a", "b")):
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {names[0]} {a.shape} vs {names[1]} {b.shape}")


def check_probability_vector(p, tol=STATE_TOL, name="priors"):
    p = np.asarray(p, dtype=float).reshape(-1)
    if p.size == 0 or np.any(p < -tol):
        raise ValueError(f"{name} must be a nonempty nonnegative vector")
    if abs(p.sum() - 1.0) > tol:
        raise ValueError(f"{name} sums to {p.sum()!r}, expected 1")
    return np.clip(p, 0.0, None)
