"""Experiment configuration files.

A configuration is a single YAML document with up to three sections::

    model:                      # required
      n: 500
      mu: [0.5, 0.5]
      K: [10, 15]
      P: 10000
      alpha: [[0.3, 0.2], [0.2, 0.3]]
    sweep:                      # optional; needed by `sweep` and `threshold`
      axis: K1                  # K1 | alpha | alpha_diag
      values: {start: 10, stop: 35, step: 1}    # or an explicit list
      linked_rule: "K2=K1+5"    # K1 axis; defaults to the offsets of model.K
      i: 1                      # alpha axis only, 1-based class indices
      j: 2
    run:                        # optional
      trials: 400
      master_seed: 1
      workers: 1
      output_path: out.csv

Unknown fields anywhere are rejected by name, so typos fail loudly instead
of silently running the wrong experiment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

import numpy as np
import yaml

from .errors import ConfigError, ParameterError
from .model import ChannelMatrix, ClassDistribution, KeyProfile, ModelParams
from .montecarlo import (
    AlphaDiagonalSweep,
    AlphaEntrySweep,
    ExperimentSpec,
    KeyRingSweep,
)

__all__ = ["RunSettings", "Config", "load_config", "parse_config"]

_MODEL_FIELDS = {"n", "r", "mu", "K", "P", "alpha"}
_SWEEP_FIELDS = {"axis", "values", "linked_rule", "i", "j"}
_RUN_FIELDS = {"trials", "master_seed", "workers", "output_path"}
_RULE_RE = re.compile(r"^K(\d+)=K1\+(\d+)$")


@dataclass(frozen=True)
class RunSettings:
    trials: int = 400
    master_seed: int = 0
    workers: int = 1
    output_path: Optional[str] = None


@dataclass(frozen=True)
class Config:
    params: ModelParams
    spec: Optional[ExperimentSpec]
    run: RunSettings


def _require_mapping(obj, where: str) -> dict:
    if not isinstance(obj, dict):
        raise ConfigError(where, "expected a mapping")
    return obj


def _reject_unknown(section: dict, allowed: set, where: str) -> None:
    unknown = sorted(set(section) - allowed)
    if unknown:
        raise ConfigError(f"{where}.{unknown[0]}", "unknown field")


def _get(section: dict, where: str, key: str):
    if key not in section:
        raise ConfigError(f"{where}.{key}", "missing required field")
    return section[key]


def _as_int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(where, f"expected an integer, got {value!r}")
    return value


def _parse_model(section: dict) -> ModelParams:
    _reject_unknown(section, _MODEL_FIELDS, "model")
    n = _as_int(_get(section, "model", "n"), "model.n")
    mu = _get(section, "model", "mu")
    big_k = _get(section, "model", "K")
    pool = _as_int(_get(section, "model", "P"), "model.P")
    alpha = _get(section, "model", "alpha")
    try:
        params = ModelParams(
            n=n,
            dist=ClassDistribution(probs=np.asarray(mu, dtype=float)),
            keys=KeyProfile(
                ring_sizes=np.asarray(big_k, dtype=np.int64), pool_size=pool
            ),
            channel=ChannelMatrix(alpha=np.asarray(alpha, dtype=float)),
        )
    except (ParameterError, ValueError, TypeError) as exc:
        raise ConfigError("model", str(exc)) from exc
    if "r" in section and _as_int(section["r"], "model.r") != params.r:
        raise ConfigError(
            "model.r", f"declared {section['r']} classes but vectors have {params.r}"
        )
    return params


def _parse_rule(rule: str, r: int) -> tuple:
    """Offsets encoded as ``K2=K1+5`` (comma separated for more classes)."""
    offsets = {1: 0}
    for part in str(rule).split(","):
        m = _RULE_RE.match(part.strip())
        if not m:
            raise ConfigError(
                "sweep.linked_rule", f"cannot parse {part.strip()!r}; expected Ki=K1+d"
            )
        offsets[int(m.group(1))] = int(m.group(2))
    if sorted(offsets) != list(range(1, r + 1)):
        raise ConfigError(
            "sweep.linked_rule", f"rule must define K2..K{r} exactly once each"
        )
    return tuple(offsets[i] for i in range(1, r + 1))


def _parse_values(raw, where: str) -> tuple:
    if isinstance(raw, dict):
        _reject_unknown(raw, {"start", "stop", "step"}, where)
        start = _get(raw, where, "start")
        stop = _get(raw, where, "stop")
        step = raw.get("step", 1)
        if not all(isinstance(v, (int, float)) for v in (start, stop, step)):
            raise ConfigError(where, "start/stop/step must be numbers")
        if step <= 0:
            raise ConfigError(f"{where}.step", "step must be positive")
        if isinstance(start, int) and isinstance(stop, int) and isinstance(step, int):
            return tuple(range(start, stop + 1, step))
        count = int(round((stop - start) / step)) + 1
        values = tuple(start + i * step for i in range(count) if start + i * step <= stop + 1e-12)
        return values
    if isinstance(raw, list) and raw:
        if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in raw):
            raise ConfigError(where, "values must all be numbers")
        return tuple(raw)
    raise ConfigError(where, "expected a non-empty list or {start, stop, step}")


def _parse_sweep(section: dict, params: ModelParams, run: RunSettings) -> ExperimentSpec:
    _reject_unknown(section, _SWEEP_FIELDS, "sweep")
    axis_name = _get(section, "sweep", "axis")
    values = _parse_values(_get(section, "sweep", "values"), "sweep.values")

    if axis_name == "K1":
        if any(not isinstance(v, int) for v in values):
            raise ConfigError("sweep.values", "K1 sweep values must be integers")
        if "i" in section or "j" in section:
            raise ConfigError("sweep.i", "i/j only apply to the alpha axis")
        if "linked_rule" in section:
            offsets = _parse_rule(section["linked_rule"], params.r)
        else:
            base = params.keys.ring_sizes
            offsets = tuple(int(k - base[0]) for k in base)
        axis = KeyRingSweep(offsets=offsets)
    elif axis_name == "alpha":
        if "linked_rule" in section:
            raise ConfigError("sweep.linked_rule", "only applies to the K1 axis")
        i = _as_int(_get(section, "sweep", "i"), "sweep.i")
        j = _as_int(_get(section, "sweep", "j"), "sweep.j")
        if not (1 <= i <= params.r and 1 <= j <= params.r):
            raise ConfigError("sweep.i", f"class indices must lie in 1..{params.r}")
        axis = AlphaEntrySweep(i=i - 1, j=j - 1)
    elif axis_name == "alpha_diag":
        if "linked_rule" in section or "i" in section or "j" in section:
            raise ConfigError("sweep.axis", "alpha_diag takes no extra fields")
        axis = AlphaDiagonalSweep()
    else:
        raise ConfigError(
            "sweep.axis", f"unknown axis {axis_name!r}; expected K1, alpha or alpha_diag"
        )

    try:
        spec = ExperimentSpec(
            base_params=params,
            axis=axis,
            values=values,
            trials=run.trials,
            master_seed=run.master_seed,
        )
        spec.materialize()
    except ParameterError as exc:
        raise ConfigError("sweep", str(exc)) from exc
    return spec


def _parse_run(section: dict) -> RunSettings:
    _reject_unknown(section, _RUN_FIELDS, "run")
    trials = _as_int(section.get("trials", 400), "run.trials")
    seed = _as_int(section.get("master_seed", 0), "run.master_seed")
    workers = _as_int(section.get("workers", 1), "run.workers")
    if trials < 1:
        raise ConfigError("run.trials", "must be at least 1")
    if not 0 <= seed < 2**64:
        raise ConfigError("run.master_seed", "must fit in an unsigned 64-bit integer")
    if workers < 1:
        raise ConfigError("run.workers", "must be at least 1")
    output_path = section.get("output_path")
    if output_path is not None and not isinstance(output_path, str):
        raise ConfigError("run.output_path", "must be a string path")
    return RunSettings(
        trials=trials, master_seed=seed, workers=workers, output_path=output_path
    )


def parse_config(doc: dict) -> Config:
    """Validate a parsed YAML document and build the runtime objects."""
    doc = _require_mapping(doc, "config")
    _reject_unknown(doc, {"model", "sweep", "run"}, "config")
    if "model" not in doc:
        raise ConfigError("model", "missing required section")
    params = _parse_model(_require_mapping(doc["model"], "model"))
    run = _parse_run(_require_mapping(doc.get("run", {}), "run"))
    spec = None
    if "sweep" in doc:
        spec = _parse_sweep(_require_mapping(doc["sweep"], "sweep"), params, run)
    return Config(params=params, spec=spec, run=run)


def load_config(path: str) -> Config:
    """Load and validate a configuration file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError("config", f"invalid YAML in {path}: {exc}") from exc
    if doc is None:
        raise ConfigError("config", f"{path} is empty")
    return parse_config(doc)
