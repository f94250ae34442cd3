"""JSON sweep configuration."""

import json
import os
import re
from dataclasses import dataclass, field

from .. import arch
from ..beamform import DEFAULT_ETA, DEFAULT_P_CIR, DEFAULT_P_T, STAGE1_METHODS
from ..chanopt import DEFAULT_NOISE_POWER, DEFAULT_PATHLOSS
from ..errors import ConfigError
from ..network import DEFAULT_Z0

EXPERIMENTS = ("complexity", "gain_vs_q", "wsr_vs_q", "tradeoff", "streams", "timing")
OUTPUT_DIR_ENV = "BDRIS_OUTPUT_DIR"

_DEFAULT_METRICS = {
    "complexity": (),
    "gain_vs_q": ("gain",),
    "wsr_vs_q": ("wsr",),
    "tradeoff": ("gain", "wsr"),
    "streams": ("gain", "wsr"),
    "timing": ("gain", "wsr"),
}
_DEFAULT_METHODS = {
    "complexity": (),
    "gain_vs_q": ("ub_sosup", "sosup_qn"),
    "wsr_vs_q": ("ub_sosup", "sosup_qn"),
    "tradeoff": ("ub_sosup",),
    "streams": ("ub_sosup",),
    "timing": ("ub_sosup", "sosup_qn", "heuristic_sosup"),
}
_KNOWN_KEYS = {
    "experiment", "output", "seed", "realizations", "workers", "dims", "archs",
    "q_values", "methods", "metrics", "physics", "qn", "fp",
}
_PHYSICS_KEYS = {"z0", "p_t", "noise_power", "weights", "eta", "p_cir", "pathloss"}


@dataclass(frozen=True)
class Physics:
    z0: float = DEFAULT_Z0
    p_t: float = DEFAULT_P_T
    noise_power: float = DEFAULT_NOISE_POWER
    weights: tuple | None = None
    eta: float = DEFAULT_ETA
    p_cir: float = DEFAULT_P_CIR
    pathloss: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SweepConfig:
    experiment: str
    output: str
    n: tuple
    l: tuple  # noqa: E741
    k: tuple
    archs: tuple  # dict templates; "n" filled from the grid when absent
    realizations: int = 100
    seed: int = 0
    workers: int = 1
    methods: tuple = ()
    metrics: tuple = ()
    physics: Physics = field(default_factory=Physics)
    qn: dict = field(default_factory=dict)
    fp: dict = field(default_factory=dict)

    def points(self):
        """Grid points ``(n, l, k)`` in row-major order."""
        return [(n, l, k) for n in self.n for l in self.l for k in self.k]  # noqa: E741


def _line_of(text, key):
    if text is None:
        return None
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _int_list(value, name, text):
    vals = value if isinstance(value, list) else [value]
    if not vals or not all(isinstance(v, int) and not isinstance(v, bool) and v >= 1 for v in vals):
        raise ConfigError("must be a positive integer or non-empty list of them", name, _line_of(text, name))
    return tuple(vals)


def parse_config(data, text=None):
    """Validate a decoded JSON object into a :class:`SweepConfig`."""
    if not isinstance(data, dict):
        raise ConfigError("top-level JSON value must be an object")
    unknown = set(data) - _KNOWN_KEYS
    if unknown:
        key = sorted(unknown)[0]
        raise ConfigError(f"unknown key (allowed: {sorted(_KNOWN_KEYS)})", key, _line_of(text, key))

    exp = data.get("experiment")
    if exp not in EXPERIMENTS:
        raise ConfigError(f"must be one of {EXPERIMENTS}", "experiment", _line_of(text, "experiment"))
    output = data.get("output")
    if not isinstance(output, str) or not output.strip():
        raise ConfigError("output path is required", "output", _line_of(text, "output"))
    if not os.path.isabs(output) and os.environ.get(OUTPUT_DIR_ENV):
        output = os.path.join(os.environ[OUTPUT_DIR_ENV], output)

    dims = data.get("dims", {})
    if not isinstance(dims, dict):
        raise ConfigError("must be an object with n, l, k", "dims", _line_of(text, "dims"))
    if "n" not in dims:
        raise ConfigError("grid needs at least 'n'", "dims", _line_of(text, "dims"))
    n = _int_list(dims["n"], "n", text)
    l = _int_list(dims.get("l", 1), "l", text)  # noqa: E741
    k = _int_list(dims.get("k", 1), "k", text)

    archs = list(data.get("archs", []))
    for tpl in archs:
        if not isinstance(tpl, dict) or "kind" not in tpl:
            raise ConfigError("each entry needs a 'kind'", "archs", _line_of(text, "archs"))
        try:
            arch.parse_kind(tpl["kind"])
        except ValueError as exc:
            raise ConfigError(str(exc), "archs", _line_of(text, "archs")) from None
    q_values = data.get("q_values", [])
    if q_values:
        if exp not in ("gain_vs_q", "wsr_vs_q"):
            raise ConfigError("only valid for gain_vs_q and wsr_vs_q", "q_values", _line_of(text, "q_values"))
        if not all(isinstance(q, int) and q >= 0 for q in q_values):
            raise ConfigError("must be non-negative integers", "q_values", _line_of(text, "q_values"))
        archs += [{"kind": "stem", "q": q} for q in q_values]
    if not archs:
        raise ConfigError("grid has no architectures", "archs", _line_of(text, "archs"))

    realizations = data.get("realizations", 100)
    if not isinstance(realizations, int) or realizations < 1:
        raise ConfigError("must be an integer >= 1", "realizations", _line_of(text, "realizations"))
    seed = data.get("seed", 0)
    if not isinstance(seed, int) or not 0 <= seed < 2**64:
        raise ConfigError("must be a 64-bit unsigned integer", "seed", _line_of(text, "seed"))
    workers = data.get("workers", 1)
    if not isinstance(workers, int) or workers < 1:
        raise ConfigError("must be an integer >= 1", "workers", _line_of(text, "workers"))

    methods = tuple(data.get("methods", _DEFAULT_METHODS[exp]))
    bad = [m for m in methods if m not in STAGE1_METHODS]
    if bad:
        raise ConfigError(f"unknown methods {bad}; choose from {STAGE1_METHODS}", "methods", _line_of(text, "methods"))
    metrics = tuple(data.get("metrics", _DEFAULT_METRICS[exp]))
    if any(m not in ("gain", "wsr") for m in metrics):
        raise ConfigError("metrics are 'gain' and/or 'wsr'", "metrics", _line_of(text, "metrics"))
    if exp != "complexity" and (not methods or not metrics):
        raise ConfigError("needs at least one method and one metric", "methods", _line_of(text, "methods"))

    phys = data.get("physics", {})
    if not isinstance(phys, dict) or set(phys) - _PHYSICS_KEYS:
        raise ConfigError(f"allowed keys are {sorted(_PHYSICS_KEYS)}", "physics", _line_of(text, "physics"))
    pathloss = phys.get("pathloss", {})
    if set(pathloss) - set(DEFAULT_PATHLOSS):
        raise ConfigError(f"allowed keys are {sorted(DEFAULT_PATHLOSS)}", "pathloss", _line_of(text, "pathloss"))
    weights = phys.get("weights")
    physics = Physics(
        z0=float(phys.get("z0", DEFAULT_Z0)),
        p_t=float(phys.get("p_t", DEFAULT_P_T)),
        noise_power=float(phys.get("noise_power", DEFAULT_NOISE_POWER)),
        weights=tuple(float(w) for w in weights) if weights is not None else None,
        eta=float(phys.get("eta", DEFAULT_ETA)),
        p_cir=float(phys.get("p_cir", DEFAULT_P_CIR)),
        pathloss={key: float(v) for key, v in pathloss.items()},
    )
    if physics.z0 <= 0 or physics.p_t <= 0 or physics.noise_power <= 0:
        raise ConfigError("z0, p_t and noise_power must be positive", "physics", _line_of(text, "physics"))
    if weights is not None and any(kk != len(weights) for kk in k):
        raise ConfigError("weights length must match k", "weights", _line_of(text, "weights"))

    return SweepConfig(
        experiment=exp,
        output=output,
        n=n,
        l=l,
        k=k,
        archs=tuple(archs),
        realizations=realizations,
        seed=seed,
        workers=workers,
        methods=methods,
        metrics=metrics,
        physics=physics,
        qn=dict(data.get("qn", {})),
        fp=dict(data.get("fp", {})),
    )


def load_config(path, overrides=None):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, line=exc.lineno) from None
    if overrides:
        data.update({k: v for k, v in overrides.items() if v is not None})
    return parse_config(data, text)
