"""Randomized property checks shared by the ``verify`` experiment and the test suite.

Each check draws its instances from one seed and reports how many passed
and the worst margin seen (positive means violated).
"""

from dataclasses import dataclass

import numpy as np

from ..capacity import (
    CQEnsemble,
    ThresholdError,
    average_error,
    converse_error_bound,
    cq_state,
    hn_bound,
    hn_instance_bound,
    pgm_codebook,
    simulate_uniform_code,
)
from ..channels import apply, random_cptp
from ..compression import mixed_chain, mixed_projector
from ..densecoding import weyl_twirl
from ..operators import (
    partial_trace,
    random_density_matrix,
    random_hermitian,
    random_psd,
    random_unitary,
    relative_projection,
    tensor,
)
from ..spectrum import difference_trace, product_trace_fastpath
from ..validation import check_random_state

TOL = 1e-9


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: int
    total: int
    worst: float
    tolerance: float

    @property
    def ok(self) -> bool:
        return self.passed == self.total


def _result(name, margins, tol):
    margins = np.asarray(margins, dtype=float)
    return CheckResult(name, int(np.sum(margins <= tol)), int(margins.size),
                       float(margins.max()) if margins.size else 0.0, tol)


def _positive_part_oracle(x):
    """``Tr X_+ = (Tr X + ||X||_1) / 2`` with the trace norm from singular values."""
    return 0.5 * (np.trace(x).real + np.linalg.svd(x, compute_uv=False).sum())


def _random_effect(d, rng):
    u = random_unitary(d, rng)
    return (u * rng.uniform(0, 1, d)) @ u.conj().T


def check_projection_bound(instances=1000, seed=0):
    """``Tr[P(A - B)] <= Tr[{A >= B}(A - B)]`` for ``0 <= P <= I``, and the right side
    against the singular-value oracle."""
    rng = check_random_state(seed)
    bound_margin, oracle_err = [], []
    for _ in range(instances):
        d = int(rng.integers(2, 9))
        a, b = random_hermitian(d, rng), random_hermitian(d, rng)
        p = _random_effect(d, rng)
        proj = relative_projection(a, b, ">=")
        rhs = np.trace(proj @ (a - b)).real
        bound_margin.append(np.trace(p @ (a - b)).real - rhs)
        oracle_err.append(abs(rhs - _positive_part_oracle(a - b)))
    return [_result("projection_bound", bound_margin, TOL), _result("projection_oracle", oracle_err, TOL)]


def check_cptp_monotonicity(instances=1000, seed=0):
    """Positive-part trace does not increase under a CPTP map."""
    rng = check_random_state(seed)
    margins = []
    for _ in range(instances):
        d = int(rng.integers(2, 9))
        out = int(rng.integers(2, 9))
        env = int(rng.integers(1, 4))
        while out * env < d:
            env += 1
        ch = random_cptp(d, out, env, rng)
        a, b = random_hermitian(d, rng), random_hermitian(d, rng)
        ta, tb = apply(ch, a), apply(ch, b)
        lhs = np.trace(relative_projection(ta, tb, ">=") @ (ta - tb)).real
        rhs = np.trace(relative_projection(a, b, ">=") @ (a - b)).real
        margins.append(lhs - rhs)
    return [_result("cptp_monotonicity", margins, TOL)]


def check_reference_mass(instances=1000, seed=0):
    """``Tr[{rho >= e^{n gamma} omega} omega] <= e^{-n gamma}`` for states and PSD references."""
    rng = check_random_state(seed)
    margins = []
    for _ in range(instances):
        d = int(rng.integers(2, 9))
        n = int(rng.integers(1, 4))
        gamma = float(rng.uniform(-2.0, 2.0))
        rho = random_density_matrix(d, rng)
        omega = random_psd(d, rng, scale=float(rng.uniform(0.1, 3.0)))
        c = np.exp(n * gamma)
        lhs = np.trace(relative_projection(rho, c * omega, ">=") @ omega).real
        margins.append(lhs - np.exp(-n * gamma))
    return [_result("reference_mass", margins, TOL)]


def check_fastpath(instances=200, seed=0):
    """Product fast path against dense diagonalization of the full tensor product."""
    rng = check_random_state(seed)
    errs = []
    for _ in range(instances):
        d = int(rng.integers(2, 4))
        n = int(rng.integers(1, 7 if d == 2 else 5))
        gamma = float(rng.uniform(-1.5, 1.5))
        rho_f, omega_f = [], []
        for _ in range(n):
            u = random_unitary(d, rng)
            lam = rng.dirichlet(np.ones(d))
            mu = rng.uniform(0.05, 2.0, d)
            rho_f.append((u * lam) @ u.conj().T)
            omega_f.append((u * mu) @ u.conj().T)
        fast = product_trace_fastpath(rho_f, omega_f, n, gamma)
        dense = difference_trace(tensor(rho_f), tensor(omega_f), n, gamma)
        errs.append(abs(float(np.squeeze(fast)) - dense))
    return [_result("fastpath", errs, TOL)]


def check_partial_trace(instances=200, seed=0):
    """Trace preservation and linearity of the partial trace."""
    rng = check_random_state(seed)
    errs = []
    for _ in range(instances):
        dims = tuple(int(x) for x in rng.integers(1, 4, size=int(rng.integers(2, 4))))
        dim = int(np.prod(dims))
        keep = [i for i in range(len(dims)) if rng.uniform() < 0.5]
        x, y = random_hermitian(dim, rng), random_hermitian(dim, rng)
        a, b = rng.normal(size=2)
        px, py = partial_trace(x, dims, keep), partial_trace(y, dims, keep)
        lin = np.abs(partial_trace(a * x + b * y, dims, keep) - (a * px + b * py)).max()
        tr = abs(np.trace(px) - np.trace(x))
        errs.append(max(lin, tr))
    return [_result("partial_trace", errs, TOL)]


def check_twirl(instances=60, seed=0):
    """Weyl twirl equals ``I/D ⊗ rho_B`` for D in {2, 3, 4}."""
    rng = check_random_state(seed)
    errs = []
    for i in range(instances):
        D = 2 + i % 3
        db = int(rng.integers(1, 4))
        rho = random_density_matrix(D * db, rng)
        rho_b = partial_trace(rho, (D, db), [1])
        errs.append(np.abs(weyl_twirl(rho, (D, db)) - np.kron(np.eye(D) / D, rho_b)).max())
    return [_result("twirl", errs, TOL)]


def _random_ensemble(rng, d, m):
    states = np.array([random_density_matrix(d, rng, rank=int(rng.integers(1, d + 1))) for _ in range(m)])
    return CQEnsemble(rng.dirichlet(np.ones(m)), states)


def _pgm_instance(rng):
    """Half single-letter random ensembles, half block ensembles of near-pure states
    where the bound is informative."""
    if rng.uniform() < 0.5:
        d, m = int(rng.integers(2, 5)), int(rng.integers(2, 5))
        return _random_ensemble(rng, d, m), 1, float(rng.uniform(-0.5, 1.0)), int(rng.integers(1, 6))
    d = 2 if rng.uniform() < 0.5 else 3
    n = 3 if d == 2 else 2
    noise = float(rng.uniform(0.0, 0.05))
    u = random_unitary(d, rng)
    states = [(1 - noise) * np.outer(u[:, k], u[:, k].conj()) + noise * np.eye(d) / d for k in range(d)]
    base = CQEnsemble(rng.dirichlet(20 * np.ones(d)), np.array(states))
    gamma = float(rng.uniform(0.6, 1.0)) * np.log(d)
    return base.power(n), n, gamma, int(rng.integers(1, 4))


def check_pgm_bound(instances=200, seed=0):
    """PGM codes against the averaged bound and against the per-code operator bound."""
    rng = check_random_state(seed)
    avg, inst = [], []
    attempts = 0
    while len(avg) < instances and attempts < 20 * instances:
        attempts += 1
        ens, n, gamma, M = _pgm_instance(rng)
        code_seed = int(rng.integers(2**32))
        try:
            code = pgm_codebook(ens, n, M, gamma, seed=code_seed)
        except ThresholdError:
            continue
        pe = average_error(code, ens)
        avg.append(pe - hn_bound(ens, n, gamma, M))
        inst.append(pe - hn_instance_bound(code, ens))
    return [_result("pgm_hn_bound", avg, TOL), _result("pgm_hn_instance_bound", inst, TOL)]


def uniform_code_converse(ens, n, M, code_gamma, seed, shots=4000, gammas=None):
    """Draw a PGM code, send uniform messages, and compare with the converse bound.

    The converse is evaluated on the code's own cq state (uniform over its
    ``M`` codewords) and maximized over ``gammas``. Returns
    ``(exact_error, sampled_error, sigma, bound)``.
    """
    code = pgm_codebook(ens, n, M, code_gamma, seed=seed)
    words = CQEnsemble.uniform(ens.states[code.labels])
    sim = simulate_uniform_code(words, code.decoder, shots, seed=seed)
    rho_aq = cq_state(words)
    gammas = np.linspace(-1.0, 1.5, 26) if gammas is None else gammas
    bound = max(converse_error_bound(rho_aq, (M, ens.dim), None, n, g, M) for g in gammas)
    return sim.error, sim.sampled_error, sim.sampled_sigma, bound


def check_converse(instances=100, seed=0):
    """Uniform-marginal codes never beat the converse bound (3 sigma on shot-sampled errors)."""
    rng = check_random_state(seed)
    sampled, exact = [], []
    attempt = 0
    while len(exact) < instances and attempt < 20 * instances:
        d = int(rng.integers(2, 4))
        m = int(rng.integers(2, 4))
        ens = _random_ensemble(rng, d, m)
        M = int(rng.integers(2, 5))
        code_seed = (seed + attempt) % 2**64
        attempt += 1
        try:
            pe, ps, sigma, bound = uniform_code_converse(ens, 1, M, float(rng.uniform(-0.3, 0.3)), code_seed)
        except ThresholdError:
            continue
        exact.append(bound - pe)
        sampled.append(bound - ps - 3 * max(sigma, 1e-12))
    return [_result("converse_sampled_3sigma", sampled, 0.0), _result("converse_exact", exact, TOL)]


def check_mixed_chain(instances=100, seed=0):
    """Rank bound, containment and the trace chain for the mixed-source projector."""
    rng = check_random_state(seed)
    rank, contain, chain = [], [], []
    for _ in range(instances):
        d = int(rng.integers(2, 7))
        n = int(rng.integers(1, 3))
        sigma = random_density_matrix(d, rng)
        omega = random_density_matrix(d, rng)
        alpha = float(rng.uniform(0.0, np.log(d) + 0.5))
        gamma = alpha + float(rng.uniform(0.0, 1.0))
        t = float(rng.uniform(0.05, 0.95))
        mp = mixed_projector(sigma, omega, n, alpha)
        r0, rq, rk = mp.ranks
        rank.append(rk - (r0 + rq))
        contain.append(max(np.abs(mp.pk @ mp.p0 - mp.p0).max(),
                           np.trace(mp.q @ omega).real - np.trace(mp.pk @ omega).real))
        lhs, rhs = mixed_chain(sigma, omega, t, n, alpha, gamma)
        chain.append(rhs - lhs)
    return [
        _result("mixed_rank_bound", rank, 0),
        _result("mixed_containment", contain, TOL),
        _result("mixed_chain", chain, TOL),
    ]


SUITES = {
    "projection_bound": check_projection_bound,
    "cptp_monotonicity": check_cptp_monotonicity,
    "reference_mass": check_reference_mass,
    "fastpath": check_fastpath,
    "partial_trace": check_partial_trace,
    "twirl": check_twirl,
    "pgm_bound": check_pgm_bound,
    "converse": check_converse,
    "mixed_chain": check_mixed_chain,
}
