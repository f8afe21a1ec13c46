"""Experiment configuration: flat key = value files plus CLI overrides.

Config files are INI-style with one section per experiment:

    [gaussian-sweep]
    samplers = MPMC, SVE, MABMC
    iterations = 20000
    seeds = 1, 2, 3, 4, 5
    grid = 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0

Every knob has a documented default; file values override defaults and
command-line overrides win over both.  The default output directory can be
set with the MABMC_OUTPUT_DIR environment variable.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, fields, replace

EXPERIMENTS = ("toy1", "toy2", "gaussian-sweep", "ising-sweep", "oracle-check")
ALL_SAMPLERS = ("MH", "PMC", "MPMC", "SVE", "MABMC")

OUTPUT_DIR_ENV = "MABMC_OUTPUT_DIR"


class ConfigError(ValueError):
    """Invalid experiment configuration; message names the offending field."""


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    samplers: tuple = ("MPMC", "SVE", "MABMC")
    iterations: int = 20000
    seeds: tuple = (1, 2, 3, 4, 5)
    grid: tuple = ()
    output_dir: str = ""
    oracle_check: bool = False
    workers: int = 0  # 0 = one per CPU
    write_traces: bool = True
    burn_fraction: float = 0.25
    # gaussian knobs
    observation: float = 1.0
    proposal_sd: float = 1.0
    aux_offset: float = 1.0 / 3.0
    # ising knobs
    lattice_size: int = 10
    coupling: float = 0.1
    dataset_size: int = 10
    prior_mean: float = 0.0
    prior_sd: float = 1.0
    ising_proposal_sd: float = 0.05
    wolff_burn_in: int = 200
    data_seed: int = 986960
    boundary: str = "open"

    @property
    def grid_label(self) -> str:
        return {"gaussian-sweep": "sigma2", "ising-sweep": "beta"}.get(self.experiment, "")


_DEFAULT_GRIDS = {
    "gaussian-sweep": tuple(round(0.1 * k, 10) for k in range(1, 11)),
    "ising-sweep": tuple(round(0.1 * k, 10) for k in range(1, 11)),
}

_DEFAULT_SAMPLERS = {
    "toy1": ("MH", "PMC", "MPMC", "SVE", "MABMC"),
    "toy2": ("MH", "PMC", "MPMC", "SVE", "MABMC"),
    "gaussian-sweep": ("MPMC", "SVE", "MABMC"),
    "ising-sweep": ("MPMC", "SVE", "MABMC"),
    "oracle-check": (),
}

_LIST_KEYS = {"samplers", "seeds", "grid"}
_INT_KEYS = {"iterations", "workers", "lattice_size", "dataset_size", "wolff_burn_in", "data_seed"}
_FLOAT_KEYS = {
    "burn_fraction", "observation", "proposal_sd", "aux_offset",
    "coupling", "prior_mean", "prior_sd", "ising_proposal_sd",
}
_BOOL_KEYS = {"oracle_check", "write_traces"}
_STR_KEYS = {"output_dir", "boundary"}


def default_config(experiment: str) -> ExperimentConfig:
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"experiment: unknown experiment {experiment!r}")
    return ExperimentConfig(
        experiment=experiment,
        samplers=_DEFAULT_SAMPLERS[experiment],
        grid=_DEFAULT_GRIDS.get(experiment, (0.0,)),
        output_dir=os.environ.get(OUTPUT_DIR_ENV, "mabmc-out"),
        oracle_check=experiment == "oracle-check",
    )


def _parse_value(key: str, raw: str):
    raw = raw.strip()
    try:
        if key in _LIST_KEYS:
            parts = [p.strip() for p in raw.split(",") if p.strip()]
            if key == "samplers":
                return tuple(parts)
            if key == "seeds":
                return tuple(int(p) for p in parts)
            return tuple(float(p) for p in parts)
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
        if key in _BOOL_KEYS:
            lowered = raw.lower()
            if lowered in ("true", "yes", "1", "on"):
                return True
            if lowered in ("false", "no", "0", "off"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if key in _STR_KEYS:
            return raw
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{key.replace('_', '-')}: {exc}") from exc
    raise ConfigError(f"unknown configuration key {key.replace('_', '-')!r}")


def load_config(path, experiment: str, overrides: dict | None = None) -> ExperimentConfig:
    """Read one experiment section from an INI file and apply overrides."""
    config = default_config(experiment)
    if path is not None:
        parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        try:
            with open(path, "r", encoding="utf-8") as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"config file: {exc}") from exc
        except configparser.Error as exc:
            raise ConfigError(f"config file: {exc}") from exc
        if parser.has_section(experiment):
            updates = {}
            for raw_key, raw_value in parser.items(experiment):
                key = raw_key.replace("-", "_")
                updates[key] = _parse_value(key, raw_value)
            config = replace(config, **updates)
    if overrides:
        known = {f.name for f in fields(ExperimentConfig)}
        for key, value in overrides.items():
            if value is None:
                continue
            if key not in known:
                raise ConfigError(f"unknown configuration key {key!r}")
            config = replace(config, **{key: value})
    validate_config(config)
    return config


def validate_config(config: ExperimentConfig) -> None:
    if config.experiment not in EXPERIMENTS:
        raise ConfigError(f"experiment: unknown experiment {config.experiment!r}")
    if config.experiment == "oracle-check":
        return
    if not config.samplers:
        raise ConfigError("samplers: must not be empty")
    for s in config.samplers:
        if s not in ALL_SAMPLERS:
            raise ConfigError(f"samplers: unknown sampler {s!r}; choose from {ALL_SAMPLERS}")
    if len(set(config.samplers)) != len(config.samplers):
        raise ConfigError("samplers: duplicate entries")
    if config.experiment == "ising-sweep" and "MH" in config.samplers:
        raise ConfigError("samplers: MH needs a tractable likelihood, unavailable for ising-sweep")
    if config.iterations < 1:
        raise ConfigError("iterations: must be >= 1")
    if not config.seeds:
        raise ConfigError("seeds: must not be empty")
    if len(set(config.seeds)) != len(config.seeds):
        raise ConfigError("seeds: duplicate entries")
    if config.experiment in ("gaussian-sweep", "ising-sweep"):
        if not config.grid:
            raise ConfigError("grid: must not be empty for sweep experiments")
        if config.experiment == "gaussian-sweep" and any(g <= 0 for g in config.grid):
            raise ConfigError("grid: sigma2 values must be positive")
    elif config.grid != (0.0,):
        raise ConfigError("grid: only sweep experiments take a grid")
    if not 0.0 <= config.burn_fraction < 1.0:
        raise ConfigError("burn-fraction: must be in [0, 1)")
    if config.workers < 0:
        raise ConfigError("workers: must be >= 0")
    if config.lattice_size < 2:
        raise ConfigError("lattice-size: must be >= 2")
    if config.dataset_size < 1:
        raise ConfigError("dataset-size: must be >= 1")
    if config.wolff_burn_in < 1:
        raise ConfigError("wolff-burn-in: must be >= 1")
    if config.prior_sd <= 0 or config.ising_proposal_sd <= 0 or config.proposal_sd <= 0:
        raise ConfigError("prior-sd / proposal-sd: must be positive")
    if config.boundary != "open":
        raise ConfigError("boundary: only 'open' is supported")
