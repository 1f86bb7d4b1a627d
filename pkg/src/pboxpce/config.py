"""Experiment configuration: JSON parsing with fail-fast validation.

Unknown keys raise :class:`ConfigError` immediately so that a typo can never
silently change an experiment.  Dimension consistency between the model and
the input p-boxes is checked before any model evaluation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import ConfigError, PboxError
from .models import ModelHandle, model_from_spec
from .optimize import OptimizerConfig
from .pbox import pbox_from_dict
from .propagation import PropagationConfig

_MODEL_DIMS = {"linear": 1, "rosenbrock": 2, "oscillator": 7, "truss": 10}

_TOP_KEYS = {
    "model",
    "inputs",
    "method",
    "propagation",
    "optimizer",
    "output_dir",
    "replications",
    "seed",
    "comment",
}
_MODEL_KEYS = {"kind", "command", "dimension", "monotone", "timeout", "comment"}
_PROP_KEYS = {f.name for f in PropagationConfig.__dataclass_fields__.values()}
_OPT_KEYS = {f.name for f in OptimizerConfig.__dataclass_fields__.values()}
_METHODS = ("slicing", "conversion", "two_level", "reference")


@dataclass
class ExperimentConfig:
    """Validated experiment description ready to execute."""

    model_spec: dict
    input_specs: list
    method: str
    propagation: PropagationConfig
    optimizer: OptimizerConfig
    output_dir: str = "out"
    replications: int = 1
    seed: int = 0
    name: str = "experiment"

    def build_model(self) -> ModelHandle:
        return model_from_spec(self.model_spec)

    def build_inputs(self):
        try:
            return [pbox_from_dict(spec) for spec in self.input_specs]
        except (PboxError, KeyError, TypeError) as exc:
            raise ConfigError(f"invalid input p-box: {exc!r}") from exc


def _check_keys(mapping, allowed, where):
    for key in mapping:
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r} in {where}")


def _build_dataclass(cls, mapping, allowed, where):
    _check_keys(mapping, allowed | {"comment"}, where)
    try:
        return cls(**{k: v for k, v in mapping.items() if k != "comment"})
    except TypeError as exc:
        raise ConfigError(f"bad value in {where}: {exc}") from exc


def parse_config(obj, name="experiment"):
    """Validate a decoded JSON object into an :class:`ExperimentConfig`."""
    if not isinstance(obj, dict):
        raise ConfigError("config must be a JSON object")
    _check_keys(obj, _TOP_KEYS, "config")
    for required in ("model", "inputs", "method"):
        if required not in obj:
            raise ConfigError(f"missing required key {required!r}")

    model_spec = obj["model"]
    if not isinstance(model_spec, dict) or "kind" not in model_spec:
        raise ConfigError("model must be an object with a 'kind'")
    _check_keys(model_spec, _MODEL_KEYS, "model")

    method = obj["method"]
    if method not in _METHODS:
        raise ConfigError(f"method must be one of {_METHODS}, got {method!r}")

    inputs = obj["inputs"]
    if not isinstance(inputs, list) or not inputs:
        raise ConfigError("inputs must be a non-empty list of p-box specs")
    dim = _MODEL_DIMS.get(model_spec["kind"], model_spec.get("dimension"))
    if dim is not None and len(inputs) != dim:
        raise ConfigError(
            f"model '{model_spec['kind']}' needs {dim} inputs, config has {len(inputs)}"
        )

    prop = _build_dataclass(
        PropagationConfig, obj.get("propagation", {}), _PROP_KEYS, "propagation"
    )
    opt = _build_dataclass(
        OptimizerConfig, obj.get("optimizer", {}), _OPT_KEYS, "optimizer"
    )

    replications = int(obj.get("replications", 1))
    if replications < 1:
        raise ConfigError("replications must be >= 1")

    return ExperimentConfig(
        model_spec=model_spec,
        input_specs=inputs,
        method=method,
        propagation=prop,
        optimizer=opt,
        output_dir=str(obj.get("output_dir", "out")),
        replications=replications,
        seed=int(obj.get("seed", 0)),
        name=name,
    )


def load_config(path):
    """Read and validate a JSON config file."""
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    import os

    name = os.path.splitext(os.path.basename(str(path)))[0]
    return parse_config(obj, name=name)
