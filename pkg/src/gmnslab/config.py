"""Run configuration: a single human-editable JSON file per experiment.

The resolved configuration round-trips losslessly, every run directory keeps
the exact copy that produced it, and the pair (config, seed) determines all
outputs byte-for-byte.  Validation failures carry the offending field name.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .experiments import stability_threshold
from .integrate import SimParams
from .noise import MIN_REGULARITY

EXPERIMENTS = ("check", "simulate", "contract", "pullback", "nse-limit", "measure")

PARAM_DEFAULTS = {
    "nu": 1.0,
    "level": 1.0,
    "chi": 0.0,
    "lambda_p": 1.0,
    "dt": 1.0 / 256,
    "t_final": 1.0,
    "kmax": 2,
    "dt_path": None,
    "instability_factor": 1e6,
    "noise": {"s": 1.0, "amplitude": 1.0, "delta": 0.25, "allow_rough": False},
    "forcing": None,
}


class ConfigError(ValueError):
    """Invalid configuration; message names the offending field."""


@dataclass
class RunConfig:
    experiment: str
    seed: int = 0
    ensemble: int = 64
    threads: int = 1
    assertion_mode: str = "strict"
    out: str | None = None
    params: SimParams = None
    options: dict = field(default_factory=dict)

    @property
    def strict(self) -> bool:
        return self.assertion_mode == "strict"

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "seed": self.seed,
            "ensemble": self.ensemble,
            "threads": self.threads,
            "assertion_mode": self.assertion_mode,
            "params": self.params.to_dict(),
            "options": self.options,
        }

    def canonical_json(self) -> str:
        """Deterministic serialization; excludes out/threads, which must not
        influence artifact bytes."""
        d = self.to_dict()
        d.pop("threads")
        return json.dumps(d, sort_keys=True, separators=(",", ":"))


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ConfigError(message)


def resolve_config(raw: dict) -> RunConfig:
    """Fill defaults, cross-validate, and build the typed configuration."""
    unknown = set(raw) - {
        "experiment", "seed", "ensemble", "threads", "assertion_mode",
        "out", "params", "options",
    }
    _require(not unknown, f"unknown top-level field(s): {sorted(unknown)}")
    experiment = raw.get("experiment")
    _require(
        experiment in EXPERIMENTS,
        f"field 'experiment' must be one of {EXPERIMENTS}, got {experiment!r}",
    )
    seed = raw.get("seed", 0)
    _require(isinstance(seed, int) and 0 <= seed < 2**64,
             f"field 'seed' must be a 64-bit unsigned integer, got {seed!r}")
    ensemble = raw.get("ensemble", 64)
    _require(isinstance(ensemble, int) and ensemble >= 1,
             f"field 'ensemble' must be a positive integer, got {ensemble!r}")
    threads = raw.get("threads", 1)
    _require(isinstance(threads, int) and threads >= 1,
             f"field 'threads' must be a positive integer, got {threads!r}")
    mode = raw.get("assertion_mode", "strict")
    _require(mode in ("strict", "exploratory"),
             f"field 'assertion_mode' must be 'strict' or 'exploratory', got {mode!r}")

    pd = dict(PARAM_DEFAULTS)
    pd["noise"] = dict(PARAM_DEFAULTS["noise"])
    if experiment in ("contract", "measure") and "nu" not in raw.get("params", {}):
        # default viscosity above the stability threshold of the default
        # cutoff level, so the strict variants of these experiments run
        pd["nu"] = 4.0
    for key, value in raw.get("params", {}).items():
        _require(key in pd, f"unknown field 'params.{key}'")
        if key == "noise":
            for nk, nv in value.items():
                _require(nk in pd["noise"], f"unknown field 'params.noise.{nk}'")
                pd["noise"][nk] = nv
        else:
            pd[key] = value

    noise = pd["noise"]
    if noise["s"] <= MIN_REGULARITY and not noise["allow_rough"]:
        raise ConfigError(
            f"field 'params.noise.s' = {noise['s']} violates the regularity "
            f"requirement s > {MIN_REGULARITY}; set params.noise.allow_rough "
            "to override at finite truncation"
        )
    dt, dt_path = pd["dt"], pd["dt_path"]
    if dt_path is not None:
        m = dt / dt_path
        if not (m >= 1 and abs(m - round(m)) <= 1e-9):
            raise ConfigError(
                f"field 'params.dt' = {dt} is not a positive integer multiple "
                f"of 'params.dt_path' = {dt_path}"
            )
    if pd["level"] == "inf":
        pd["level"] = math.inf
    try:
        params = SimParams.from_dict(
            {k: v for k, v in pd.items()} | {"level": pd["level"] if pd["level"] != math.inf else "inf"}
        )
    except ValueError as exc:
        raise ConfigError(f"invalid params: {exc}") from exc

    options = raw.get("options", {})
    _require(isinstance(options, dict), "field 'options' must be an object")

    cfg = RunConfig(
        experiment=experiment, seed=seed, ensemble=ensemble, threads=threads,
        assertion_mode=mode, out=raw.get("out"), params=params, options=options,
    )
    _validate_experiment(cfg)
    return cfg


def _validate_experiment(cfg: RunConfig) -> None:
    p = cfg.params
    if cfg.experiment in ("contract", "measure") and cfg.strict:
        thr = stability_threshold(p.level, p.lambda_p)
        _require(
            p.nu > thr,
            f"field 'params.nu' = {p.nu} must exceed the stability threshold "
            f"{thr:.6g} for the strict '{cfg.experiment}' experiment "
            "(use assertion_mode 'exploratory' to explore below threshold)",
        )
    if cfg.experiment == "contract" and cfg.strict:
        _require(
            cfg.ensemble >= 32,
            f"field 'ensemble' = {cfg.ensemble} must be >= 32 for strict "
            "contraction statistics",
        )


def parse_config(path: str) -> RunConfig:
    """Read and validate a configuration file."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not well-formed JSON: {exc}") from exc
    _require(isinstance(raw, dict), "config root must be a JSON object")
    return resolve_config(raw)


def default_config(experiment: str) -> RunConfig:
    return resolve_config({"experiment": experiment})
