"""Experiment execution: chains over (grid point, sampler, seed) with artifacts.

Chains are addressed by deterministic streams derived from (seed, grid index,
sampler index), so results do not depend on scheduling and a rerun with the
same configuration reproduces every output file byte for byte.  Grid points,
samplers, and seeds are dispatched to a process pool; each worker owns its
chain and writes only that chain's trace file, while the shared summary, plot,
and oracle artifacts are written by the parent once all chains finish.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional

from .. import oracle
from ..model import Model
from ..models import GaussianModel, IsingModel, build_toy_1, build_toy_2
from ..models.ising import generate_dataset, save_dataset
from ..rng import RandomStream
from ..samplers import run_chain
from .config import ConfigError, ExperimentConfig, validate_config
from .report import emit_plot_png, emit_plot_svg, emit_summary_csv, write_trace_csv

F = Fraction


class OracleMismatchError(RuntimeError):
    """An enumerated probability disagrees with its stored reference value."""


@dataclass
class ChainRun:
    """Aggregates of one finished chain; thetas kept for posterior checks."""

    grid_value: float
    sampler: str
    seed: int
    iterations: int
    mean_accept: float
    accept_sum: float
    sampler_calls: int
    decision_mpmc: int
    decision_sve: int
    thetas: list
    trace_path: Optional[str]


@dataclass
class SummaryRow:
    grid_value: float
    sampler: str
    avg_accept: float
    se: float
    accept_per_draw: Optional[float]
    decision_mpmc_frac: Optional[float]
    decision_sve_frac: Optional[float]
    seed_count: int


@dataclass
class SweepSummary:
    experiment: str
    grid_label: str
    rows: list
    runs: list


# Exact transition probabilities for the built-in finite problems, derived by
# rational enumeration; tests/test_oracle.py re-derives each one from the
# model tables and first principles.
REFERENCE_TRANSITIONS = {
    ("toy1", "SVE", "a", "b"): F(3, 7),
    ("toy1", "SVE", "b", "a"): F(1, 2),
    ("toy1", "MPMC", "a", "b"): F(53, 140),
    ("toy1", "MPMC", "b", "a"): F(53, 120),
    ("toy2", "SVE", "a", "b"): F(3, 20),
    ("toy2", "SVE", "b", "a"): F(3, 20),
    ("toy2", "MPMC", "a", "b"): F(4, 15),
    ("toy2", "MPMC", "b", "a"): F(4, 15),
}

_TOY_BUILDERS = {"toy1": build_toy_1, "toy2": build_toy_2}


def _build_model(config: ExperimentConfig, grid_value: float) -> Model:
    if config.experiment in _TOY_BUILDERS:
        return _TOY_BUILDERS[config.experiment]()
    if config.experiment == "gaussian-sweep":
        return GaussianModel(
            sigma2=grid_value,
            observation=config.observation,
            proposal_sd=config.proposal_sd,
            aux_offset=config.aux_offset,
        )
    if config.experiment == "ising-sweep":
        data_gen = RandomStream(config.data_seed).child(
            int(round(grid_value * 10**9))
        ).generator()
        dataset = generate_dataset(
            config.lattice_size, grid_value, config.coupling,
            config.dataset_size, data_gen, config.wolff_burn_in,
        )
        return IsingModel(
            dataset,
            coupling=config.coupling,
            prior_mean=config.prior_mean,
            prior_sd=config.prior_sd,
            proposal_sd=config.ising_proposal_sd,
            wolff_burn_in=config.wolff_burn_in,
            boundary=config.boundary,
        )
    raise ConfigError(f"experiment: {config.experiment!r} does not run chains")


def _chain_stream(seed: int, grid_index: int, sampler_index: int) -> RandomStream:
    return RandomStream(seed).child(grid_index + 1, sampler_index + 1)


def _run_one(task) -> ChainRun:
    model, config, grid_index, grid_value, sampler, seed, trace_path = task
    stream = _chain_stream(seed, grid_index, config.samplers.index(sampler))
    trace = run_chain(model, sampler, config.iterations, stream)
    if trace_path is not None:
        write_trace_csv(trace, trace_path)
    n_m = sum(1 for r in trace.records if r.decision == "MPMC")
    n_s = sum(1 for r in trace.records if r.decision == "SVE")
    return ChainRun(
        grid_value=grid_value,
        sampler=sampler,
        seed=seed,
        iterations=config.iterations,
        mean_accept=trace.mean_accept_prob(),
        accept_sum=sum(r.accept_prob for r in trace.records),
        sampler_calls=trace.total_sampler_calls(),
        decision_mpmc=n_m,
        decision_sve=n_s,
        thetas=trace.thetas(),
        trace_path=str(trace_path) if trace_path is not None else None,
    )


def _grid_tag(value: float) -> str:
    return format(value, "g").replace(".", "p").replace("-", "m")


def run_experiment(config: ExperimentConfig, quiet: bool = True) -> SweepSummary:
    """Run every (grid point, sampler, seed) chain and write the artifacts.

    Writes per-chain trace CSVs (unless disabled), summary.csv, and an
    acceptance plot as both a self-contained SVG and a rendered PNG.  Toy
    experiments with oracle_check also verify the enumerated transition
    probabilities against stored references and write oracle reports.
    """
    validate_config(config)
    if config.experiment == "oracle-check":
        run_oracle_check(config.output_dir, quiet=False)
        return SweepSummary(config.experiment, "", [], [])

    out_dir = Path(config.output_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        if config.write_traces:
            (out_dir / "traces").mkdir(exist_ok=True)
    except OSError as exc:
        raise RuntimeError(f"cannot create output directory {out_dir}: {exc}") from exc

    tasks = []
    for grid_index, grid_value in enumerate(config.grid):
        model = _build_model(config, grid_value)
        if config.experiment == "ising-sweep":
            save_dataset(
                out_dir / f"dataset_{config.grid_label}{_grid_tag(grid_value)}.txt",
                list(model.observed.configs), config.coupling,
            )
        for sampler in config.samplers:
            for seed in config.seeds:
                trace_path = None
                if config.write_traces:
                    trace_path = out_dir / "traces" / (
                        f"{config.experiment}_{config.grid_label or 'run'}"
                        f"{_grid_tag(grid_value)}_{sampler}_s{seed}.csv"
                    )
                tasks.append((model, config, grid_index, grid_value, sampler, seed, trace_path))

    workers = config.workers or os.cpu_count() or 1
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(_run_one, tasks, chunksize=1))
    else:
        runs = [_run_one(t) for t in tasks]

    rows = _summarize(config, runs)
    summary = SweepSummary(config.experiment, config.grid_label, rows, runs)

    emit_summary_csv(summary, out_dir / "summary.csv")
    emit_plot_svg(summary, out_dir / "acceptance.svg")
    emit_plot_png(summary, out_dir / "acceptance.png")

    if config.oracle_check and config.experiment in _TOY_BUILDERS:
        run_oracle_check(out_dir, only=config.experiment, quiet=False)
    if not quiet:
        for row in rows:
            print(
                f"{config.grid_label or 'run'}={row.grid_value:g} {row.sampler}: "
                f"avg_accept={row.avg_accept:.6f} (se {row.se:.2g}, {row.seed_count} seeds)"
            )
    return summary


def _summarize(config: ExperimentConfig, runs: list) -> list:
    rows = []
    for grid_value in config.grid:
        for sampler in config.samplers:
            group = [r for r in runs if r.grid_value == grid_value and r.sampler == sampler]
            if not group:
                continue
            n = len(group)
            accepts = [r.mean_accept for r in group]
            avg = sum(accepts) / n
            if n > 1:
                var = sum((a - avg) ** 2 for a in accepts) / (n - 1)
                se = (var / n) ** 0.5
            else:
                se = 0.0
            total_calls = sum(r.sampler_calls for r in group)
            per_draw = (
                sum(r.accept_sum for r in group) / total_calls if total_calls else None
            )
            if sampler == "MABMC":
                decided = sum(r.decision_mpmc + r.decision_sve for r in group)
                frac_m = sum(r.decision_mpmc for r in group) / decided if decided else 0.0
                frac_s = 1.0 - frac_m if decided else 0.0
            else:
                frac_m = frac_s = None
            rows.append(
                SummaryRow(grid_value, sampler, avg, se, per_draw, frac_m, frac_s, n)
            )
    return rows


def run_oracle_check(out_dir, only: Optional[str] = None, quiet: bool = False) -> list:
    """Verify enumerated toy probabilities and detailed balance; write reports.

    Raises OracleMismatchError when any enumerated value differs from its
    reference or a detailed-balance certification fails.  Returns the printed
    report lines.
    """
    from ..samplers import constant_rule, invalid_max_rule, max_min_rule

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = []
    failures = []
    toys = {name: builder() for name, builder in _TOY_BUILDERS.items() if only in (None, name)}

    for name, model in toys.items():
        post = model.posterior()
        for kind in ("SVE", "MPMC"):
            tm = oracle.enumerate_transition_matrix(model, kind)
            oracle.write_transition_csv(tm, out_dir / f"oracle_{name}_{kind}_transitions.csv")
            for t in model.parameters:
                for t2 in model.parameters:
                    if t == t2:
                        continue
                    ref = REFERENCE_TRANSITIONS[(name, kind, t, t2)]
                    got = tm.entry(t, t2)
                    ok = got == ref
                    lines.append(
                        f"{name} {kind} {t}->{t2}: oracle {got} reference {ref} "
                        f"{'MATCH' if ok else 'MISMATCH'}"
                    )
                    if not ok:
                        failures.append(lines[-1])
            report = oracle.check_detailed_balance(tm, post)
            oracle.write_balance_report(report, out_dir / f"oracle_{name}_{kind}_balance.txt")
            lines.append(f"{name} {kind} detailed-balance residual: {report.max_residual:.3e}")
            if report.max_residual != 0.0:
                failures.append(lines[-1])
        for rule in (max_min_rule(), constant_rule(1), constant_rule(2)):
            tm = oracle.enumerate_transition_matrix(model, "MABMC", rule)
            report = oracle.check_detailed_balance(tm, post)
            lines.append(
                f"{name} MABMC({rule.kind}) detailed-balance residual: {report.max_residual:.3e}"
            )
            if report.max_residual != 0.0:
                failures.append(lines[-1])
        tm = oracle.enumerate_transition_matrix(model, "MABMC", invalid_max_rule())
        report = oracle.check_detailed_balance(tm, post)
        oracle.write_balance_report(report, out_dir / f"oracle_{name}_invalid_max_balance.txt")
        lines.append(
            f"{name} MABMC(invalid-max) detailed-balance residual: {report.max_residual:.3e}"
            " (negative control; nonzero expected on toy1)"
        )

    if not quiet:
        for line in lines:
            print(line)
    if failures:
        raise OracleMismatchError("; ".join(failures))
    return lines
