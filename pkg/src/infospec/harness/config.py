"""Experiment configuration: YAML files validated against a fixed schema.

Unknown keys are rejected. Every error names the offending field and, when
the value came from a file, its line.
"""

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Dict, Optional

import yaml

KINDS = ("spectrum", "compress", "mixed", "capacity", "densecode", "verify")
CHANNEL_KINDS = ("identity", "bit_flip", "depolarizing", "dephasing")
STATE_KINDS = ("bell", "product", "bell_diagonal", "diag")
VERIFY_SUITES = (
    "projection_bound",
    "cptp_monotonicity",
    "reference_mass",
    "fastpath",
    "partial_trace",
    "twirl",
    "pgm_bound",
    "converse",
    "mixed_chain",
)
MAX_SEED = 2**64 - 1


class ConfigError(ValueError):
    """Invalid experiment configuration."""


# ---- typed field checkers -------------------------------------------------

def _fail(ctx, path, msg):
    line = ctx["lines"].get(path)
    where = f"{ctx['source']}:{line}: " if line else f"{ctx['source']}: "
    raise ConfigError(f"{where}field '{path}': {msg}")


def _int(ctx, path, v, lo=None, hi=None):
    if isinstance(v, bool) or not isinstance(v, int):
        _fail(ctx, path, f"expected an integer, got {v!r}")
    if lo is not None and v < lo:
        _fail(ctx, path, f"must be >= {lo}, got {v}")
    if hi is not None and v > hi:
        _fail(ctx, path, f"must be <= {hi}, got {v}")
    return v


def _float(ctx, path, v, lo=None, hi=None, open_lo=False, open_hi=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        _fail(ctx, path, f"expected a number, got {v!r}")
    v = float(v)
    if v != v or v in (float("inf"), float("-inf")):
        _fail(ctx, path, "must be finite")
    if lo is not None and (v < lo or (open_lo and v == lo)):
        _fail(ctx, path, f"must be {'>' if open_lo else '>='} {lo}, got {v}")
    if hi is not None and (v > hi or (open_hi and v == hi)):
        _fail(ctx, path, f"must be {'<' if open_hi else '<='} {hi}, got {v}")
    return v


def _list(ctx, path, v, item, nonempty=True):
    if not isinstance(v, list):
        _fail(ctx, path, f"expected a list, got {v!r}")
    if nonempty and not v:
        _fail(ctx, path, "must not be empty")
    return [item(ctx, f"{path}[{i}]", x) for i, x in enumerate(v)]


def _choice(ctx, path, v, options):
    if v not in options:
        _fail(ctx, path, f"must be one of {', '.join(options)}; got {v!r}")
    return v


def _mapping(ctx, path, v, schema, required=()):
    if not isinstance(v, dict):
        _fail(ctx, path, f"expected a mapping, got {v!r}")
    for key in v:
        if key not in schema:
            sub = f"{path}.{key}" if path else str(key)
            _fail(ctx, sub, f"unknown key (allowed: {', '.join(sorted(schema))})")
    for key in required:
        if key not in v:
            _fail(ctx, path or "<root>", f"missing required key '{key}'")
    out = {}
    for key, checker in schema.items():
        if key in v:
            sub = f"{path}.{key}" if path else key
            out[key] = checker(ctx, sub, v[key])
    return out


def _probs(ctx, path, v):
    p = _list(ctx, path, v, lambda c, q, x: _float(c, q, x, lo=0.0))
    if abs(sum(p) - 1.0) > 1e-10:
        _fail(ctx, path, f"probabilities must sum to 1, got {sum(p)!r}")
    return p


def _ns(ctx, path, v):
    return _list(ctx, path, v, lambda c, q, x: _int(c, q, x, lo=1, hi=4096))


def _window(ctx, path, v):
    w = _list(ctx, path, v, lambda c, q, x: _float(c, q, x))
    if len(w) != 2 or not w[0] < w[1]:
        _fail(ctx, path, "window must be [lo, hi] with lo < hi")
    return w


def _source(ctx, path, v):
    return _mapping(ctx, path, v, {"probs": _probs}, required=("probs",))


def _channel(ctx, path, v):
    out = _mapping(
        ctx, path, v,
        {
            "kind": lambda c, q, x: _choice(c, q, x, CHANNEL_KINDS),
            "f": lambda c, q, x: _float(c, q, x, lo=0.0, hi=1.0),
            "dim": lambda c, q, x: _int(c, q, x, lo=2, hi=8),
        },
        required=("kind",),
    )
    if out["kind"] == "bit_flip" and "f" not in out:
        _fail(ctx, path, "bit_flip channel needs 'f'")
    return out


def _ensemble(ctx, path, v):
    return _mapping(ctx, path, v, {"priors": _probs}, required=("priors",))


def _state(ctx, path, v):
    out = _mapping(
        ctx, path, v,
        {
            "kind": lambda c, q, x: _choice(c, q, x, STATE_KINDS),
            "weights": _probs,
        },
        required=("kind",),
    )
    if out["kind"] in ("bell_diagonal", "diag") and "weights" not in out:
        _fail(ctx, path, f"{out['kind']} state needs 'weights'")
    if out["kind"] == "bell_diagonal" and len(out["weights"]) != 4:
        _fail(ctx, f"{path}.weights", "bell_diagonal needs four weights")
    if out["kind"] == "diag" and len(out["weights"]) != 4:
        _fail(ctx, f"{path}.weights", "diag two-qubit state needs four weights")
    return out


def _positive_int(ctx, path, v):
    return _int(ctx, path, v, lo=1)


def _nonneg_int(ctx, path, v):
    return _int(ctx, path, v, lo=0)


def _floats(ctx, path, v):
    return _list(ctx, path, v, lambda c, q, x: _float(c, q, x))


def _simulation(ctx, path, v):
    return _mapping(
        ctx, path, v,
        {
            "n": _positive_int,
            "M": lambda c, q, x: _list(c, q, x, _positive_int),
            "gammas": _floats,
            "trials": _positive_int,
            "shots": _positive_int,
        },
        required=("M", "gammas"),
    )


COMMON = {
    "experiment": lambda c, q, x: _choice(c, q, x, KINDS),
    "name": lambda c, q, x: str(x),
    "seed": lambda c, q, x: _int(c, q, x, lo=0, hi=MAX_SEED),
    "epsilon": lambda c, q, x: _float(c, q, x, lo=0.0, hi=0.5, open_lo=True, open_hi=True),
    "window": _window,
    "grid_size": lambda c, q, x: _int(c, q, x, lo=2, hi=100000),
    "ns": _ns,
    "output": lambda c, q, x: str(x),
}

SCHEMAS = {
    "spectrum": {
        "source": _source,
        "reference": _source,
        "gammas": _floats,
    },
    "compress": {
        "source": _source,
        "rates": _floats,
        "rate_offsets": _floats,
    },
    "mixed": {
        "first": _source,
        "second": _source,
        "t": lambda c, q, x: _float(c, q, x, lo=0.0, hi=1.0, open_lo=True, open_hi=True),
        "instances": _nonneg_int,
    },
    "capacity": {
        "channel": _channel,
        "ensembles": lambda c, q, x: _list(c, q, x, _ensemble),
        "simulation": _simulation,
    },
    "densecode": {
        "state": _state,
        "restarts": _nonneg_int,
        "horodecki_N": lambda c, q, x: _list(c, q, x, lambda c2, q2, y: _int(c2, q2, y, lo=1, hi=3)),
        "simulation": _simulation,
    },
    "verify": {
        "suites": lambda c, q, x: _list(c, q, x, lambda c2, q2, y: _choice(c2, q2, y, VERIFY_SUITES)),
        "instances": _positive_int,
    },
}

REQUIRED = {
    "spectrum": ("source", "ns"),
    "compress": ("source", "ns"),
    "mixed": ("first", "second", "t", "ns"),
    "capacity": ("channel", "ensembles", "ns"),
    "densecode": ("state", "ns"),
    "verify": (),
}


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    name: str
    seed: int
    epsilon: float
    window: tuple
    grid_size: int
    ns: tuple
    params: Dict[str, Any] = field(default_factory=dict)
    output: Optional[str] = None

    def estimator_kwargs(self):
        return {"epsilon": self.epsilon, "window": tuple(self.window), "grid_size": self.grid_size}

    def with_seed(self, seed: int) -> "ExperimentConfig":
        if not 0 <= seed <= MAX_SEED:
            raise ConfigError(f"--seed: must lie in [0, 2**64 - 1], got {seed}")
        return ExperimentConfig(self.kind, self.name, seed, self.epsilon, self.window,
                                self.grid_size, self.ns, self.params, self.output)


def _line_map(node, path="", out=None):
    """Field path -> 1-based line of its value, from a composed YAML node."""
    out = {} if out is None else out
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            sub = f"{path}.{k.value}" if path else str(k.value)
            out[sub] = k.start_mark.line + 1
            _line_map(v, sub, out)
    elif isinstance(node, yaml.SequenceNode):
        for i, v in enumerate(node.value):
            sub = f"{path}[{i}]"
            out[sub] = v.start_mark.line + 1
            _line_map(v, sub, out)
    return out


def parse_config(text: str, source: str = "<config>", kind: Optional[str] = None) -> ExperimentConfig:
    """Validate YAML text; ``kind`` (from the CLI subcommand) fills or must match ``experiment``."""
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"{source}:{mark.line + 1}" if mark is not None else source
        raise ConfigError(f"{where}: YAML syntax error: {getattr(exc, 'problem', exc)}") from None
    ctx = {"source": source, "lines": _line_map(node) if node is not None else {}}
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: top level must be a mapping")
    declared = data.get("experiment", kind)
    if declared is None:
        raise ConfigError(f"{source}: field 'experiment': missing (one of {', '.join(KINDS)})")
    _choice(ctx, "experiment", declared, KINDS)
    if kind is not None and declared != kind:
        _fail(ctx, "experiment", f"config is for '{declared}' but the '{kind}' subcommand was used")
    schema = dict(COMMON)
    schema.update(SCHEMAS[declared])
    required = REQUIRED[declared]
    values = _mapping(ctx, "", dict(data, experiment=declared), schema, required=required)
    if declared == "compress" and not (values.get("rates") or values.get("rate_offsets")):
        _fail(ctx, "rates", "compress needs 'rates' or 'rate_offsets'")
    if declared == "mixed":
        if len(values["first"]["probs"]) != len(values["second"]["probs"]):
            _fail(ctx, "second.probs", "mixed components must have equal dimension")
    params = {k: v for k, v in values.items() if k not in COMMON}
    return ExperimentConfig(
        kind=declared,
        name=values.get("name", declared),
        seed=values.get("seed", 0),
        epsilon=values.get("epsilon", 0.01),
        window=tuple(values.get("window", (-4.0, 4.0))),
        grid_size=values.get("grid_size", 64),
        ns=tuple(values.get("ns", (1,))),
        params=params,
        output=values.get("output"),
    )


def preset_names():
    root = resources.files("infospec") / "presets"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".yaml"))


def load_config(path_or_preset: str, kind: Optional[str] = None) -> ExperimentConfig:
    """Read a config file, or a shipped preset by name."""
    path = Path(path_or_preset)
    if path.is_file():
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"{path}: cannot read config: {exc}") from None
        return parse_config(text, str(path), kind)
    preset = resources.files("infospec") / "presets" / f"{path_or_preset}.yaml"
    if preset.is_file():
        return parse_config(preset.read_text(encoding="utf-8"), f"preset:{path_or_preset}", kind)
    raise ConfigError(
        f"{path_or_preset}: no such config file or preset (presets: {', '.join(preset_names())})"
    )
