"""Run configuration: YAML document plus command-line overrides.

One YAML file drives every command; unknown keys are rejected so typos
surface immediately. Command-line flags take precedence over file values,
which take precedence over the built-in defaults.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields

import yaml

from .benchmarks import SyntheticSpec
from .errors import ConfigError
from .model import Hyperparams

__all__ = ["RunConfig", "load_config", "hyperparams_from_dict"]

_HYPER_KEYS = {f.name for f in fields(Hyperparams)}
_TOP_KEYS = {"task", "data", "response", "chain", "output", "workers",
             "hyper", "cv", "benchmark", "grid", "classify"}

TASKS = ("fit", "predict", "classify", "benchmark", "cv", "hyper-grid")


def hyperparams_from_dict(block: dict) -> Hyperparams:
    unknown = set(block) - _HYPER_KEYS
    if unknown:
        raise ConfigError(f"unknown hyper keys: {sorted(unknown)}")
    kwargs = dict(block)
    for key in ("degrees", "move_probs"):
        if key in kwargs:
            kwargs[key] = tuple(kwargs[key])
    try:
        return Hyperparams(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


@dataclass
class RunConfig:
    """Everything one command needs, with documented defaults."""

    task: str = "fit"
    data: str | None = None
    response: str | None = None
    chain: str | None = None
    output: str = "out"
    workers: int = 1
    hyper: Hyperparams = field(default_factory=Hyperparams)
    cv_folds: int = 5
    cv_repeats: int = 20
    benchmark_specs: list[SyntheticSpec] = field(default_factory=list)
    benchmark_replicates: int = 5
    grid_degrees: list[tuple[int, ...]] | None = None
    grid_max_interaction: list[int] | None = None
    grid_expansion: list[float] | None = None
    grid_repeats: int = 1
    grid_export: str | None = None
    grid_resolution: int = 50

    def __post_init__(self):
        if self.task not in TASKS:
            raise ConfigError(f"task must be one of {TASKS}, got {self.task!r}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")


def _parse_benchmark_specs(entries, default_seed: int) -> list[SyntheticSpec]:
    specs = []
    for entry in entries:
        entry = dict(entry)
        rsnrs = entry.pop("rsnr", 5.0)
        if not isinstance(rsnrs, (list, tuple)):
            rsnrs = [rsnrs]
        entry.setdefault("seed", default_seed)
        function_id = entry.pop("function")
        for rsnr in rsnrs:
            try:
                specs.append(SyntheticSpec(function_id=function_id,
                                           rsnr=float(rsnr), **entry))
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad benchmark spec: {exc}") from None
    return specs


def load_config(path: str | None = None, overrides: dict | None = None
                ) -> RunConfig:
    """Build a :class:`RunConfig` from an optional YAML file and overrides.

    ``overrides`` holds already-typed values from command-line flags; keys
    use the same names as the file. Nested hyper overrides arrive under
    ``hyper``.
    """
    doc: dict = {}
    if path is not None:
        with open(path) as fh:
            loaded = yaml.safe_load(fh)
        if loaded is None:
            loaded = {}
        if not isinstance(loaded, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
        doc = loaded
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    overrides = overrides or {}

    hyper_block = dict(doc.get("hyper") or {})
    hyper_block.update(overrides.pop("hyper", {}))
    hyper = hyperparams_from_dict(hyper_block)

    cv_block = dict(doc.get("cv") or {})
    bench_block = dict(doc.get("benchmark") or {})
    grid_block = dict(doc.get("grid") or {})
    classify_block = dict(doc.get("classify") or {})

    kwargs = {
        "task": doc.get("task", "fit"),
        "data": doc.get("data"),
        "response": doc.get("response"),
        "chain": doc.get("chain"),
        "output": doc.get("output", "out"),
        "workers": int(doc.get("workers", 1)),
        "hyper": hyper,
        "cv_folds": int(cv_block.get("folds", 5)),
        "cv_repeats": int(cv_block.get("repeats", 20)),
        "benchmark_replicates": int(bench_block.get("replicates", 5)),
        "benchmark_specs": _parse_benchmark_specs(
            bench_block.get("specs", []), hyper.seed),
        "grid_repeats": int(grid_block.get("repeats", 1)),
        "grid_export": classify_block.get("grid_export"),
        "grid_resolution": int(classify_block.get("grid_resolution", 50)),
    }
    if "degrees" in grid_block:
        kwargs["grid_degrees"] = [tuple(d) for d in grid_block["degrees"]]
    if "max_interaction" in grid_block:
        kwargs["grid_max_interaction"] = [int(k)
                                          for k in grid_block["max_interaction"]]
    if "expansion" in grid_block:
        kwargs["grid_expansion"] = [float(e) for e in grid_block["expansion"]]
    kwargs.update(overrides)
    return RunConfig(**kwargs)
