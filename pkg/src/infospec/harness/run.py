"""Expand a config into independent work items, execute them, and merge rows.

Work items are pure functions of their arguments (seeds included), so the
sorted table does not depend on the worker count or completion order.
"""

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..capacity import (
    ThresholdError,
    average_error,
    basis_ensemble,
    capacity_estimate,
    hn_bound,
    pgm_codebook,
)
from ..channels import bit_flip_channel, dephasing_channel, depolarizing_channel, identity_channel
from ..compression import (
    best_case_fidelity,
    converse_fidelity_bound,
    mixed_rate_estimate,
    threshold_fidelity,
)
from ..densecoding import (
    conditional_entropy,
    dc_capacity_estimate,
    dc_converse_bound,
    dc_simulate,
    horodecki_capacity,
    weyl_encodings,
)
from ..operators import bell_state, diag_state, ket, projector_onto, shannon_entropy
from ..spectrum import (
    SourceSequence,
    inf_divergence_estimate,
    sup_divergence_estimate,
    trace_curve,
)
from . import checks
from .config import MAX_SEED, ExperimentConfig


@dataclass(frozen=True)
class ResultRow:
    experiment: str
    metric: str
    value: Optional[float]
    n: Optional[int] = None
    gamma: Optional[float] = None
    seed: Optional[int] = None
    status: str = "ok"
    params: str = ""

    def sort_key(self):
        return (
            self.n is not None, self.n or 0,
            self.gamma is not None, self.gamma or 0.0,
            self.seed is not None, self.seed or 0,
            self.metric, self.params,
        )


def _params(**kw) -> str:
    parts = []
    for k in sorted(kw):
        v = kw[k]
        if isinstance(v, float):
            v = format(v, ".17g")
        elif isinstance(v, (list, tuple)):
            v = "/".join(format(x, ".17g") if isinstance(x, float) else str(x) for x in v)
        parts.append(f"{k}={v}")
    return ";".join(parts)


def _trial_seed(base: int, k: int) -> int:
    return (base + k) % (MAX_SEED + 1)


# ---- builders for named objects -------------------------------------------

def _iid_source(probs, ref=None):
    return SourceSequence.iid(diag_state(probs), None if ref is None else diag_state(ref))


def _channel(desc):
    kind = desc["kind"]
    dim = desc.get("dim", 2)
    if kind == "identity":
        return identity_channel(dim)
    if kind == "bit_flip":
        return bit_flip_channel(desc["f"])
    if kind == "depolarizing":
        return depolarizing_channel(dim)
    return dephasing_channel(dim)


def _shared_state(desc):
    kind = desc["kind"]
    if kind == "bell":
        return bell_state(0)
    if kind == "product":
        return np.kron(projector_onto(ket(0, 2)), projector_onto(ket(0, 2)))
    if kind == "diag":
        return diag_state(desc["weights"])
    return sum(w * bell_state(i) for i, w in enumerate(desc["weights"]))


# ---- work items -------------------------------------------------------------

def _spectrum_item(cfg, n):
    p = cfg.params
    ref = p.get("reference")
    src = _iid_source(p["source"]["probs"], None if ref is None else ref["probs"])
    kw = cfg.estimator_kwargs()
    sup = sup_divergence_estimate(src, n, **kw).gamma_hat
    inf = inf_divergence_estimate(src, n, **kw).gamma_hat
    rows = []
    tag = _params(epsilon=cfg.epsilon)
    if ref is None:
        rows += [
            ResultRow(cfg.name, "sup_entropy_estimate", -inf, n, params=tag),
            ResultRow(cfg.name, "inf_entropy_estimate", -sup, n, params=tag),
            ResultRow(cfg.name, "entropy_rate", src.entropy_rate(n), n, params=tag),
        ]
    else:
        q, r = np.asarray(p["source"]["probs"]), np.asarray(ref["probs"])
        ok = q > 0
        rel = float(np.sum(q[ok] * (np.log(q[ok]) - np.log(r[ok]))))
        rows += [
            ResultRow(cfg.name, "sup_divergence_estimate", sup, n, params=tag),
            ResultRow(cfg.name, "inf_divergence_estimate", inf, n, params=tag),
            ResultRow(cfg.name, "relative_entropy", rel, n, params=tag),
        ]
    rows.append(ResultRow(cfg.name, "gap", abs(sup - inf), n, params=tag))
    if p.get("gammas"):
        curve = trace_curve(src, n, gammas=p["gammas"])
        rows += [ResultRow(cfg.name, "trace", float(v), n, float(g)) for g, v in curve]
    return rows


def _compress_item(cfg, n, rate, label):
    src = _iid_source(cfg.params["source"]["probs"])
    tag = label
    rows = []
    f, m = best_case_fidelity(src, n, rate)
    rows.append(ResultRow(cfg.name, "best_case_fidelity", f, n, rate, params=tag))
    rows.append(ResultRow(cfg.name, "best_case_rank", float(m), n, rate, params=tag))
    grid = np.linspace(rate - 1.0, rate + 3.0, 401)
    vals = [converse_fidelity_bound(src, n, rate, g) for g in grid]
    rows.append(ResultRow(cfg.name, "converse_bound", float(min(vals)), n, rate, params=tag))
    ft, mt = threshold_fidelity(src, n, rate)
    rows.append(ResultRow(cfg.name, "threshold_fidelity", ft, n, rate, params=tag))
    rows.append(ResultRow(cfg.name, "threshold_rank", float(mt), n, rate, params=tag))
    t = src.curve_function(n)(-rate)[0]
    rows.append(ResultRow(cfg.name, "achievability_bound", float(t) ** 2, n, rate, params=tag))
    return rows


def _mixed_item(cfg, n):
    p = cfg.params
    first = _iid_source(p["first"]["probs"])
    second = _iid_source(p["second"]["probs"])
    (row,) = mixed_rate_estimate(first, second, p["t"], [n], **cfg.estimator_kwargs())
    tag = _params(t=p["t"])
    return [
        ResultRow(cfg.name, "optimal_rate", row.optimal_rate, n, params=tag),
        ResultRow(cfg.name, "strong_converse_rate", row.strong_converse_rate, n, params=tag),
        ResultRow(cfg.name, "sup_entropy_mixture", row.sup_mixture, n, params=tag),
        ResultRow(cfg.name, "inf_entropy_mixture", row.inf_mixture, n, params=tag),
        ResultRow(cfg.name, "sup_entropy_first", row.sup_first, n, params=tag),
        ResultRow(cfg.name, "sup_entropy_second", row.sup_second, n, params=tag),
        ResultRow(cfg.name, "inf_entropy_first", row.inf_first, n, params=tag),
        ResultRow(cfg.name, "inf_entropy_second", row.inf_second, n, params=tag),
        ResultRow(cfg.name, "entropy_first", shannon_entropy(p["first"]["probs"]), n, params=tag),
        ResultRow(cfg.name, "entropy_second", shannon_entropy(p["second"]["probs"]), n, params=tag),
    ]


def _check_rows(cfg, results, seed):
    return [
        ResultRow(
            cfg.name, r.name, r.worst, seed=seed,
            status="pass" if r.ok else "fail",
            params=_params(passed=r.passed, total=r.total, tol=r.tolerance),
        )
        for r in results
    ]


def _mixed_chain_item(cfg, instances, seed):
    return _check_rows(cfg, checks.check_mixed_chain(instances, seed), seed)


def _capacity_item(cfg, n):
    p = cfg.params
    ens = [basis_ensemble(len(e["priors"]), e["priors"]) for e in p["ensembles"]]
    est = capacity_estimate(ens, _channel(p["channel"]), [n], **cfg.estimator_kwargs())
    rows = [ResultRow(cfg.name, "capacity_estimate", est.values[0], n, params=_params(best=est.best_index[0]))]
    for i, row in enumerate(est.per_candidate):
        rows.append(ResultRow(cfg.name, "candidate_estimate", row[0], n, params=_params(candidate=i)))
    return rows


def _capacity_sim_item(cfg, n, M, gamma, seed):
    p = cfg.params
    ch = _channel(p["channel"])
    base = basis_ensemble(len(p["ensembles"][0]["priors"]), p["ensembles"][0]["priors"])
    ens = base.power(n).through(ch.power(n))
    tag = _params(M=M)
    try:
        code = pgm_codebook(ens, n, M, gamma, seed=seed)
    except ThresholdError as exc:
        return [ResultRow(cfg.name, "pgm_error", None, n, gamma, seed, f"skip: {exc}", tag)]
    pe = average_error(code, ens)
    bound = hn_bound(ens, n, gamma, M)
    shots = p["simulation"].get("shots", 4000)
    exact, sampled, sigma, conv = checks.uniform_code_converse(ens, n, M, gamma, seed, shots)
    return [
        ResultRow(cfg.name, "pgm_error", pe, n, gamma, seed, "pass" if pe <= bound + 1e-9 else "fail", tag),
        ResultRow(cfg.name, "hn_bound", bound, n, gamma, seed, params=tag),
        ResultRow(cfg.name, "uniform_code_error_sampled", sampled, n, gamma, seed,
                  "pass" if sampled >= conv - 3 * max(sigma, 1e-12) else "fail", tag),
        ResultRow(cfg.name, "uniform_code_error_exact", exact, n, gamma, seed,
                  "pass" if exact >= conv - 1e-9 else "fail", tag),
        ResultRow(cfg.name, "converse_bound", conv, n, gamma, seed, params=tag),
    ]


def _densecode_item(cfg, n):
    p = cfg.params
    rho = _shared_state(p["state"])
    restarts = p.get("restarts", 16)
    (row,) = dc_capacity_estimate(rho, (2, 2), [n], restarts=restarts, seed=cfg.seed, **cfg.estimator_kwargs())
    tag = _params(restarts=restarts)
    return [
        ResultRow(cfg.name, "capacity_estimate", row.capacity, n, params=tag),
        ResultRow(cfg.name, "conditional_entropy_estimate", row.conditional_entropy, n, params=tag),
        ResultRow(cfg.name, "identity_optimal", float(row.used_identity), n, params=tag),
        ResultRow(cfg.name, "single_letter_capacity", float(np.log(2) - conditional_entropy(rho, (2, 2))), n,
                  params=tag),
    ]


def _horodecki_item(cfg, N):
    p = cfg.params
    restarts = p.get("restarts", 16)
    value = horodecki_capacity(_shared_state(p["state"]), (2, 2), N, restarts=restarts, seed=cfg.seed)
    return [ResultRow(cfg.name, "horodecki_capacity", value, N, params=_params(restarts=restarts))]


def _densecode_sim_item(cfg, n, M, gamma, seed):
    rho = _shared_state(cfg.params["state"])
    run = dc_simulate(rho, (2, 2), n, M, gamma, seed=seed)
    conv = dc_converse_bound(rho, (2, 2), weyl_encodings(2**n), n, gamma, M)
    tag = _params(M=M)
    return [
        ResultRow(cfg.name, "dc_error", run.error, n, gamma, seed,
                  "pass" if run.error <= run.bound + 1e-9 and run.error >= conv - 1e-9 else "fail", tag),
        ResultRow(cfg.name, "dc_achievability_bound", run.bound, n, gamma, seed, params=tag),
        ResultRow(cfg.name, "dc_converse_bound", conv, n, gamma, seed, params=tag),
        ResultRow(cfg.name, "dc_conditional_trace", run.conditional_trace, n, gamma, seed, params=tag),
    ]


def _verify_item(cfg, suite, instances, seed):
    fn = checks.SUITES[suite]
    results = fn(seed=seed) if instances is None else fn(instances=instances, seed=seed)
    return _check_rows(cfg, results, seed)


ITEMS = {
    "spectrum": _spectrum_item,
    "compress": _compress_item,
    "mixed": _mixed_item,
    "mixed_chain": _mixed_chain_item,
    "capacity": _capacity_item,
    "capacity_sim": _capacity_sim_item,
    "densecode": _densecode_item,
    "horodecki": _horodecki_item,
    "densecode_sim": _densecode_sim_item,
    "verify": _verify_item,
}


def expand(cfg: ExperimentConfig):
    """Work items ``(item name, args)`` for a config, in a fixed order."""
    p = cfg.params
    items = []
    if cfg.kind == "spectrum":
        items = [("spectrum", (n,)) for n in cfg.ns]
    elif cfg.kind == "compress":
        rates = [(r, _params(rate=r)) for r in p.get("rates", [])]
        h = shannon_entropy(p["source"]["probs"])
        rates += [(h + o, _params(offset=o)) for o in p.get("rate_offsets", [])]
        items = [("compress", (n, r, label)) for n in cfg.ns for r, label in rates]
    elif cfg.kind == "mixed":
        items = [("mixed", (n,)) for n in cfg.ns]
        if p.get("instances"):
            items.append(("mixed_chain", (p["instances"], cfg.seed)))
    elif cfg.kind == "capacity":
        items = [("capacity", (n,)) for n in cfg.ns]
        sim = p.get("simulation")
        if sim:
            for k in range(sim.get("trials", 1)):
                for M in sim["M"]:
                    for g in sim["gammas"]:
                        items.append(("capacity_sim", (sim.get("n", 1), M, g, _trial_seed(cfg.seed, k))))
    elif cfg.kind == "densecode":
        items = [("densecode", (n,)) for n in cfg.ns]
        items += [("horodecki", (N,)) for N in p.get("horodecki_N", [])]
        sim = p.get("simulation")
        if sim:
            for k in range(sim.get("trials", 1)):
                for M in sim["M"]:
                    for g in sim["gammas"]:
                        items.append(("densecode_sim", (sim.get("n", 1), M, g, _trial_seed(cfg.seed, k))))
    elif cfg.kind == "verify":
        suites = p.get("suites", list(checks.SUITES))
        items = [("verify", (s, p.get("instances"), cfg.seed)) for s in suites]
    return items


def execute(cfg: ExperimentConfig, item):
    """Run one work item; numerical failures become a single error row."""
    name, args = item
    try:
        return ITEMS[name](cfg, *args)
    except Exception as exc:  # row-level failure marker; the run continues
        n = args[0] if args and isinstance(args[0], int) and name != "verify" else None
        return [ResultRow(cfg.name, name, None, n, status=f"error: {type(exc).__name__}: {exc}",
                          params=_params(args=[str(a) for a in args]))]


def _execute_packed(packed):
    return execute(*packed)


def run(cfg: ExperimentConfig, workers: Optional[int] = None):
    """All result rows for ``cfg``, sorted by ``(n, gamma, seed)`` then metric."""
    items = expand(cfg)
    if workers is None:
        workers = os.cpu_count() or 1
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if workers == 1 or len(items) <= 1:
        chunks = [execute(cfg, it) for it in items]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
            chunks = list(pool.map(_execute_packed, [(cfg, it) for it in items]))
    rows = [r for chunk in chunks for r in chunk]
    return sorted(rows, key=ResultRow.sort_key)
