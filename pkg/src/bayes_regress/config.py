"""Experiment configuration: a flat JSON object, validated field by field.

A metadata file written by a previous run (``{"config": {...}, ...}``) is
also accepted, so any run can be reproduced from its own metadata.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

from .baseline import NWConfig
from .conjugate import Example1Hyper, Example2Hyper, Example3Hyper
from .errors import ConfigError, DomainError, UsageError
from .grid import DEFAULT_MC_SIZE
from .risk import default_trim
from .seeding import MASK64

COMMANDS = ("estimate", "consistency", "risk", "compare")
MODELS = ("example1", "example2", "example3")
ESTIMATOR_BASES = ("bayes-closed", "bayes-grid", "nadaraya-watson")
HYPER_KEYS = {"example1": ("lambda",), "example2": (), "example3": ("mu", "tau", "sigma", "rho")}
HYPER_DEFAULTS = {"lambda": 1.0, "mu": 0.0, "tau": 1.0, "sigma": 1.0, "rho": 0.5}
X1_DEFAULTS = {"example1": [0.5, 1.0, 2.0], "example2": [0.0, 1.0], "example3": [-1.0, 0.0, 1.0]}
ESTIMATOR_DEFAULTS = {
    "estimate": ["bayes-closed"],
    "consistency": ["bayes-closed"],
    "risk": ["bayes-closed"],
    "compare": ["bayes-closed", "nadaraya-watson"],
}
KNOWN_KEYS = {
    "command", "model", "lambda", "mu", "tau", "sigma", "rho", "estimator", "n_schedule",
    "replications", "grid_size", "x1_eval", "loss_k", "trim", "seed", "output_dir", "data", "bandwidth",
}
REQUIRED_KEYS = ("model", "seed", "output_dir")


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    model: str
    hyperparams: dict
    estimator: list
    n_schedule: list
    replications: int
    grid_size: int
    x1_eval: list
    loss_k: list
    trim: list
    seed: int
    output_dir: str
    data: str | None
    bandwidth: float | str

    def hyper(self):
        if self.model == "example1":
            return Example1Hyper(self.hyperparams["lambda"])
        if self.model == "example2":
            return Example2Hyper()
        return Example3Hyper(**self.hyperparams)

    def nw_config(self) -> NWConfig | None:
        return None if self.bandwidth == "auto" else NWConfig(self.bandwidth)

    def resolved(self) -> dict:
        """Flat dict that parses back into an identical config."""
        out = asdict(self)
        out.update(out.pop("hyperparams"))
        if out["data"] is None:
            del out["data"]
        return out


def _number(doc, key, *, positive=False):
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(key, f"must be a finite number, got {v!r}")
    if positive and not v > 0:
        raise ConfigError(key, f"must be > 0, got {v!r}")
    return float(v)


def _int(value, key, minimum=None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(key, f"must be an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(key, f"must be >= {minimum}, got {value}")
    return value


def _list(doc, key, default):
    v = doc.get(key, default)
    if not isinstance(v, list):
        v = [v]
    return v


def parse_config(doc: dict, command: str | None = None) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    unknown = sorted(set(doc) - KNOWN_KEYS)
    if unknown:
        raise ConfigError(unknown[0], "unknown key")
    for key in REQUIRED_KEYS:
        if key not in doc:
            raise ConfigError(key, "required key is missing")

    cmd = doc.get("command", command)
    if cmd not in COMMANDS:
        raise ConfigError("command", f"must be one of {COMMANDS}, got {cmd!r}")
    if command is not None and cmd != command:
        raise ConfigError("command", f"config says {cmd!r} but {command!r} was requested")

    model = doc["model"]
    if model not in MODELS:
        raise ConfigError("model", f"must be one of {MODELS}, got {model!r}")

    hyper = {}
    for key in ("lambda", "mu", "tau", "sigma", "rho"):
        if key in doc and key not in HYPER_KEYS[model]:
            raise ConfigError(key, f"not a hyperparameter of {model}")
    for key in HYPER_KEYS[model]:
        hyper[key] = _number(doc, key, positive=key in ("lambda", "tau", "sigma")) if key in doc else HYPER_DEFAULTS[key]
    if model == "example3" and not -1.0 < hyper["rho"] < 1.0:
        raise ConfigError("rho", f"must lie in (-1, 1), got {hyper['rho']}")

    seed = doc["seed"]
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed <= MASK64:
        raise ConfigError("seed", f"must be a 64-bit unsigned integer, got {seed!r}")

    output_dir = doc["output_dir"]
    if not isinstance(output_dir, str) or not output_dir:
        raise ConfigError("output_dir", "must be a non-empty path string")

    estimators = _list(doc, "estimator", ESTIMATOR_DEFAULTS[cmd])
    for i, est in enumerate(estimators):
        if not isinstance(est, str) or est.partition(":")[0] not in ESTIMATOR_BASES:
            raise ConfigError(f"estimator[{i}]", f"must be one of {ESTIMATOR_BASES} (with optional :variant), got {est!r}")
        variant = est.partition(":")[2]
        if variant:
            variants = {"example1": Example1Hyper, "example2": Example2Hyper, "example3": Example3Hyper}[model].variants
            if est.partition(":")[0] != "bayes-closed" or variant not in variants:
                raise ConfigError(f"estimator[{i}]", f"invalid variant {variant!r} for {model}")
    if cmd == "consistency" and len(estimators) != 1:
        raise ConfigError("estimator", "consistency takes exactly one estimator")
    if cmd == "compare" and len(estimators) < 2:
        raise ConfigError("estimator", "compare needs at least two estimators")

    sched = [_int(n, f"n_schedule[{i}]", 0) for i, n in enumerate(_list(doc, "n_schedule", [10, 100, 1000]))]
    if not sched:
        raise ConfigError("n_schedule", "must not be empty")
    if cmd == "consistency" and any(b <= a for a, b in zip(sched, sched[1:])):
        raise ConfigError("n_schedule", "must be strictly increasing")
    if any(e.startswith("nadaraya-watson") for e in estimators) and cmd != "estimate" and min(sched) < 1:
        raise ConfigError("n_schedule", "nadaraya-watson needs sample sizes >= 1")

    replications = _int(doc.get("replications", 200), "replications", 2)
    grid_size = _int(doc.get("grid_size", DEFAULT_MC_SIZE), "grid_size", 2)

    x1_eval = _list(doc, "x1_eval", X1_DEFAULTS[model])
    model_obj = (Example1Hyper() if model == "example1" else Example2Hyper() if model == "example2" else Example3Hyper()).model()
    for i, x in enumerate(x1_eval):
        if isinstance(x, bool) or not isinstance(x, (int, float)):
            raise ConfigError(f"x1_eval[{i}]", f"must be a number, got {x!r}")
        try:
            model_obj.check_x1(x)
        except DomainError as exc:
            raise ConfigError(f"x1_eval[{i}]", str(exc)) from None
    x1_eval = [float(x) for x in x1_eval]
    if not x1_eval:
        raise ConfigError("x1_eval", "must not be empty")

    loss_k = _list(doc, "loss_k", [2])
    for i, k in enumerate(loss_k):
        if isinstance(k, bool) or k not in (1, 2):
            raise ConfigError(f"loss_k[{i}]" if len(loss_k) > 1 else "loss_k", f"must be 1 or 2, got {k!r}")
    loss_k = sorted(set(int(k) for k in loss_k))

    trim = doc.get("trim", list(default_trim(model)))
    if (
        not isinstance(trim, list) or len(trim) != 2
        or any(isinstance(t, bool) or not isinstance(t, (int, float)) for t in trim)
        or not 0.0 <= trim[0] < trim[1] <= 1.0
    ):
        raise ConfigError("trim", f"must be [lo, hi] with 0 <= lo < hi <= 1, got {trim!r}")
    trim = [float(t) for t in trim]

    data = doc.get("data")
    if cmd == "estimate" and data is None:
        raise ConfigError("data", "estimate needs a dataset file")
    if data is not None and not isinstance(data, str):
        raise ConfigError("data", "must be a path string")

    bandwidth = doc.get("bandwidth", "auto")
    if bandwidth != "auto":
        if isinstance(bandwidth, bool) or not isinstance(bandwidth, (int, float)) or not bandwidth > 0:
            raise ConfigError("bandwidth", f"must be a positive number or 'auto', got {bandwidth!r}")
        bandwidth = float(bandwidth)

    return ExperimentConfig(
        cmd, model, hyper, estimators, sched, replications, grid_size, x1_eval, loss_k, trim,
        seed, output_dir, data, bandwidth,
    )


def load_config(path, command: str | None = None) -> ExperimentConfig:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError("--config", f"file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("--config", f"invalid JSON: {exc}") from None
    if isinstance(doc, dict) and "artifact_version" in doc and isinstance(doc.get("config"), dict):
        doc = doc["config"]
    return parse_config(doc, command)


def read_dataset(path):
    """Headerless ``x1,x2`` rows, one pair per line."""
    from .models import Dataset

    pairs = []
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("data", f"cannot read {path}: {exc}") from None
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise ConfigError("data", f"line {lineno}: expected 2 comma-separated values")
        try:
            pair = (float(parts[0]), float(parts[1]))
        except ValueError:
            raise ConfigError("data", f"line {lineno}: not a pair of reals: {line!r}") from None
        if not all(math.isfinite(v) for v in pair):
            raise ConfigError("data", f"line {lineno}: non-finite value")
        pairs.append(pair)
    return Dataset.from_pairs(pairs)


def check_usage(cfg: ExperimentConfig):
    """Re-raise library contract violations as field-precise config errors."""
    try:
        hyper = cfg.hyper()
    except (DomainError, UsageError) as exc:
        raise ConfigError("model", str(exc)) from None
    return hyper
