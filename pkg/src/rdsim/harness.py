"""Replicated bias experiments: parameter sweeps and the cohort-mimic study.

For every cell of a target grid the harness generates a population
network, records the realized statistics as the truth, draws a recruitment
sample, computes the sample estimates, and reports the relative bias of
each estimator against the realized truth (never against the targets).
Cells with mathematically unreachable targets are recorded as named skip
rows instead of being dropped.

Reproducibility: every replicate derives its random streams from entropy
tuples built out of the master seed, a stream tag, the cell's parameter
content, and the replicate index. Streams therefore do not depend on cell
order or worker scheduling, and runs are byte-identical for a given master
seed at any worker count.
"""

from __future__ import annotations

import csv
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from itertools import product

import numpy as np

from .covariates import CovariateSpec, LatentBinaryModel, binary_sampler
from .errors import FitConvergenceError, InfeasibleTargetsError, UndefinedEstimandError
from .estimators import relative_bias, sample_estimates
from .graph import (
    differential_activity,
    homophily_ratio,
    mean_degree,
    mixing_counts,
    newman_assortativity,
    prevalence,
)
from .netgen import (
    AttributeTargets,
    GENERATION_MODES,
    NetworkTargets,
    fit_dyad_model,
    generate_network,
    simulate_from_model,
    solve_dyad_classes,
)
from .sampler import SamplerConfig, run_rds

__all__ = [
    "ExperimentPlan",
    "EngageScenario",
    "Cell",
    "run_experiment",
    "run_engage_mimic",
    "summarize_replicates",
    "write_rows",
    "EXPERIMENT_COLUMNS",
    "EXPERIMENT_GROUP_COLUMNS",
    "RB_COLUMNS",
]

# Stream tags keep network generation, recruitment, and covariate draws on
# disjoint streams even within one replicate.
_TAG_NETWORK = 1
_TAG_RDS = 2
_TAG_COVARIATES = 3

_MODE_CODES = {mode: i for i, mode in enumerate(GENERATION_MODES)}
_SEED_SELECTION_CODES = {"uniform": 0, "degree": 1}


def _scaled(x: float) -> int:
    """Nonnegative integer image of a parameter for entropy tuples."""
    value = int(round(x * 1_000_000_000))
    if value < 0:
        raise ValueError("stream-entropy parameters must be nonnegative")
    return value


def _rng(*entropy: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(list(entropy)))


@dataclass(frozen=True)
class Cell:
    """One grid cell: swept parameters plus its position in the sweep."""

    index: int
    prevalence: float
    diff_activity: float
    homophily_ratio: float
    sample_size: int


@dataclass(frozen=True)
class ExperimentPlan:
    """Cross-product sweep over network targets and sample sizes.

    The grid crosses ``prevalences x diff_activities x homophily_ratios x
    sample_sizes`` at fixed population size, mean degree, and sampler
    settings, with ``replicates`` runs per cell.
    """

    node_count: int
    mean_degree: float
    prevalences: tuple[float, ...]
    diff_activities: tuple[float, ...]
    homophily_ratios: tuple[float, ...]
    sample_sizes: tuple[int, ...]
    num_seeds: int
    coupons_per_node: int
    replicates: int
    master_seed: int
    mode: str = "bernoulli"
    seed_selection: str = "uniform"
    regenerate_network: bool = True

    def __post_init__(self):
        object.__setattr__(self, "prevalences", tuple(float(v) for v in self.prevalences))
        object.__setattr__(self, "diff_activities", tuple(float(v) for v in self.diff_activities))
        object.__setattr__(self, "homophily_ratios", tuple(float(v) for v in self.homophily_ratios))
        object.__setattr__(self, "sample_sizes", tuple(int(v) for v in self.sample_sizes))
        if not (self.prevalences and self.diff_activities and self.homophily_ratios and self.sample_sizes):
            raise ValueError("every swept parameter list must be non-empty")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if self.master_seed < 0:
            raise ValueError("master_seed must be nonnegative")
        if self.mode not in GENERATION_MODES:
            raise ValueError(f"mode must be one of {GENERATION_MODES}")
        if max(self.sample_sizes) > self.node_count:
            raise ValueError("sample sizes cannot exceed the population size")
        # validates num_seeds/coupons against the smallest sample size
        SamplerConfig(self.num_seeds, self.coupons_per_node, min(self.sample_sizes), self.seed_selection)

    def cells(self) -> list[Cell]:
        combos = product(self.prevalences, self.diff_activities, self.homophily_ratios, self.sample_sizes)
        return [
            Cell(index, p, da, r, n)
            for index, (p, da, r, n) in enumerate(combos)
        ]

    def sampler_config(self, cell: Cell) -> SamplerConfig:
        return SamplerConfig(
            num_seeds=self.num_seeds,
            coupons_per_node=self.coupons_per_node,
            target_sample_size=cell.sample_size,
            seed_selection=self.seed_selection,
        )

    def network_targets(self, cell: Cell) -> NetworkTargets:
        return NetworkTargets(
            node_count=self.node_count,
            prevalence=cell.prevalence,
            mean_degree=self.mean_degree,
            diff_activity=cell.diff_activity,
            homophily_ratio=cell.homophily_ratio,
        )

    def _entropy(self, tag: int, cell: Cell, replicate: int) -> tuple[int, ...]:
        return (
            self.master_seed,
            tag,
            self.node_count,
            _scaled(self.mean_degree),
            self.num_seeds,
            self.coupons_per_node,
            _MODE_CODES[self.mode],
            _SEED_SELECTION_CODES[self.seed_selection],
            _scaled(cell.prevalence),
            _scaled(cell.diff_activity),
            _scaled(cell.homophily_ratio),
            cell.sample_size,
            replicate,
        )


EXPERIMENT_GROUP_COLUMNS = ["cell", "prevalence", "diff_activity", "homophily_ratio", "sample_size"]

RB_COLUMNS = [
    "rb_diff_activity",
    "rb_homophily",
    "rb_homophily_ratio",
    "rb_induced_homophily",
    "rb_rds2_prevalence",
]

EXPERIMENT_COLUMNS = EXPERIMENT_GROUP_COLUMNS + [
    "replicate",
    "status",
    "reason",
    "truth_prevalence",
    "truth_mean_degree",
    "truth_diff_activity",
    "truth_homophily",
    "truth_homophily_ratio",
    "est_diff_activity",
    "est_homophily",
    "est_homophily_ratio",
    "est_induced_homophily",
    "est_rds2_prevalence",
    "est_crude_prevalence",
    *RB_COLUMNS,
    "reseed_count",
    "max_wave",
    "truncated",
]


def _cell_key(cell: Cell) -> dict:
    return {
        "cell": cell.index,
        "prevalence": cell.prevalence,
        "diff_activity": cell.diff_activity,
        "homophily_ratio": cell.homophily_ratio,
        "sample_size": cell.sample_size,
    }


def _realized_truth(graph, z) -> dict:
    counts = mixing_counts(graph, z)
    try:
        truth_h = newman_assortativity(counts)
    except UndefinedEstimandError:
        truth_h = None
    try:
        truth_r = homophily_ratio(counts)
    except UndefinedEstimandError:
        truth_r = None
    try:
        truth_da = differential_activity(graph, z)
    except UndefinedEstimandError:
        truth_da = None
    return {
        "prevalence": prevalence(z),
        "mean_degree": mean_degree(graph),
        "diff_activity": truth_da,
        "homophily": truth_h,
        "homophily_ratio": truth_r,
    }


# Per-process cache for fixed-network runs: every replicate of a cell
# regenerates the same network, so workers keep the last few around.
_NETWORK_CACHE: dict[tuple, tuple] = {}


def _experiment_network(plan: ExperimentPlan, cell: Cell, replicate: int):
    net_rep = replicate if plan.regenerate_network else 0
    entropy = plan._entropy(_TAG_NETWORK, cell, net_rep)
    if not plan.regenerate_network:
        cached = _NETWORK_CACHE.get(entropy)
        if cached is not None:
            return cached
    graph_z = generate_network(plan.network_targets(cell), _rng(*entropy), plan.mode)
    if not plan.regenerate_network:
        if len(_NETWORK_CACHE) > 8:
            _NETWORK_CACHE.clear()
        _NETWORK_CACHE[entropy] = graph_z
    return graph_z


def _experiment_task(args: tuple[ExperimentPlan, Cell, int]) -> dict:
    plan, cell, replicate = args
    graph, z = _experiment_network(plan, cell, replicate)
    truth = _realized_truth(graph, z)
    forest = run_rds(graph, z, plan.sampler_config(cell), _rng(*plan._entropy(_TAG_RDS, cell, replicate)))
    est = sample_estimates(forest, graph)

    row = _cell_key(cell)
    row.update(
        replicate=replicate,
        status="ok",
        reason=None,
        truth_prevalence=truth["prevalence"],
        truth_mean_degree=truth["mean_degree"],
        truth_diff_activity=truth["diff_activity"],
        truth_homophily=truth["homophily"],
        truth_homophily_ratio=truth["homophily_ratio"],
        est_diff_activity=est.diff_activity[0],
        est_homophily=est.homophily[0],
        est_homophily_ratio=est.homophily_ratio[0],
        est_induced_homophily=est.induced_homophily[0],
        est_rds2_prevalence=est.rds2_prevalence[0],
        est_crude_prevalence=est.crude_prevalence[0],
        rb_diff_activity=relative_bias(est.diff_activity[0], truth["diff_activity"]),
        rb_homophily=relative_bias(est.homophily[0], truth["homophily"]),
        rb_homophily_ratio=relative_bias(est.homophily_ratio[0], truth["homophily_ratio"]),
        rb_induced_homophily=relative_bias(est.induced_homophily[0], truth["homophily"]),
        rb_rds2_prevalence=relative_bias(est.rds2_prevalence[0], truth["prevalence"]),
        reseed_count=forest.reseed_count,
        max_wave=forest.max_wave,
        truncated=forest.truncated,
    )
    return row


def _skip_row(key: dict, replicate: int, reason: str, columns: list[str]) -> dict:
    row = {column: None for column in columns}
    row.update(key)
    row.update(replicate=replicate, status="skipped", reason=reason)
    return row


def _run_tasks(tasks: list, worker, threads: int) -> list[dict]:
    if threads <= 1 or len(tasks) <= 1:
        return [worker(task) for task in tasks]
    chunksize = max(1, len(tasks) // (threads * 8))
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(worker, tasks, chunksize=chunksize))


def run_experiment(
    plan: ExperimentPlan, threads: int = 1, out_dir=None
) -> tuple[list[dict], list[dict]]:
    """Run the grid sweep and summarize the relative-bias distributions.

    Every (cell, replicate) pair yields exactly one row: ``ok`` rows with
    realized truth, estimates, and relative biases, or ``skipped`` rows
    naming why the cell's targets are infeasible. Deterministic for a
    given plan at any thread count.

    Args:
        plan: Sweep description.
        threads: Process workers; 1 runs inline.
        out_dir: When given, write ``replicates.csv`` and ``summary.csv``
            there.

    Returns:
        (replicate rows, summary rows).
    """
    tasks = []
    rows: list[dict | None] = []
    row_slots: list[tuple[int, int]] = []
    for cell in plan.cells():
        try:
            solve_dyad_classes(plan.network_targets(cell))
        except InfeasibleTargetsError as exc:
            key = _cell_key(cell)
            rows.extend(
                _skip_row(key, rep, str(exc), EXPERIMENT_COLUMNS) for rep in range(plan.replicates)
            )
            continue
        for rep in range(plan.replicates):
            tasks.append((plan, cell, rep))
            row_slots.append(len(rows))
            rows.append(None)

    computed = _run_tasks(tasks, _experiment_task, threads)
    for slot, row in zip(row_slots, computed):
        rows[slot] = row
    assert all(row is not None for row in rows)

    summary = summarize_replicates(rows, EXPERIMENT_GROUP_COLUMNS, RB_COLUMNS, plan.replicates)
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        write_rows(os.path.join(out_dir, "replicates.csv"), EXPERIMENT_COLUMNS, rows)
        summary_columns = EXPERIMENT_GROUP_COLUMNS + _SUMMARY_STAT_COLUMNS
        write_rows(os.path.join(out_dir, "summary.csv"), summary_columns, summary)
    return rows, summary


# ---------------------------------------------------------------------------
# Cohort-mimic scenario: several correlated attributes per network
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EngageScenario:
    """Multi-attribute scenario mimicking an observed recruitment study.

    Each replicate draws correlated binary covariates, fits the dyad model
    to the per-covariate activity/homophily targets at the realized group
    sizes, simulates the population network, and runs one recruitment
    sample over it.
    """

    node_count: int
    mean_degree: float
    covariates: tuple[AttributeTargets, ...]
    correlations: tuple[tuple[float, ...], ...]
    num_seeds: int
    coupons_per_node: int
    sample_size: int
    replicates: int
    master_seed: int
    mode: str = "bernoulli"

    def __post_init__(self):
        object.__setattr__(self, "covariates", tuple(self.covariates))
        object.__setattr__(
            self, "correlations", tuple(tuple(float(v) for v in row) for row in self.correlations)
        )
        if not self.covariates:
            raise ValueError("need at least one covariate")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if self.master_seed < 0:
            raise ValueError("master_seed must be nonnegative")
        if self.sample_size > self.node_count:
            raise ValueError("sample_size cannot exceed the population size")
        SamplerConfig(self.num_seeds, self.coupons_per_node, self.sample_size)
        self.covariate_spec()  # validates marginals/correlations

    @property
    def covariate_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.covariates)

    def covariate_spec(self) -> CovariateSpec:
        return CovariateSpec(
            names=self.covariate_names,
            marginals=np.array([c.prevalence for c in self.covariates]),
            correlations=np.array(self.correlations, dtype=float),
        )

    def desk_scaled(self, divisor: int = 10) -> "EngageScenario":
        """Scaled-down copy: population and sample shrink by ``divisor``.

        Prevalences, mean degree, activity/homophily targets, seed and
        coupon counts, and the sampling fraction are preserved.
        """
        return replace(
            self,
            node_count=int(round(self.node_count / divisor)),
            sample_size=int(round(self.sample_size / divisor)),
        )

    def sampler_config(self) -> SamplerConfig:
        return SamplerConfig(self.num_seeds, self.coupons_per_node, self.sample_size)

    def _entropy(self, tag: int, replicate: int) -> tuple[int, ...]:
        return (
            self.master_seed,
            tag,
            self.node_count,
            _scaled(self.mean_degree),
            self.num_seeds,
            self.coupons_per_node,
            _MODE_CODES[self.mode],
            self.sample_size,
            len(self.covariates),
            replicate,
        )


def engage_columns(names: tuple[str, ...]) -> list[str]:
    """Replicate-table column order for a covariate name tuple."""
    columns = ["replicate", "status", "reason", "truth_mean_degree"]
    for name in names:
        columns.extend(
            [
                f"truth_prevalence_{name}",
                f"truth_diff_activity_{name}",
                f"truth_homophily_{name}",
                f"truth_homophily_ratio_{name}",
                f"est_diff_activity_{name}",
                f"est_homophily_{name}",
                f"est_homophily_ratio_{name}",
                f"est_rds2_prevalence_{name}",
                f"est_crude_prevalence_{name}",
                f"rb_diff_activity_{name}",
                f"rb_homophily_{name}",
                f"rb_homophily_ratio_{name}",
                f"rb_rds2_prevalence_{name}",
            ]
        )
    columns.extend(["reseed_count", "max_wave", "truncated"])
    return columns


def _engage_task(args: tuple[EngageScenario, LatentBinaryModel, int]) -> dict:
    scenario, sampler_model, replicate = args
    names = scenario.covariate_names
    columns = engage_columns(names)
    z = sampler_model.sample(scenario.node_count, _rng(*scenario._entropy(_TAG_COVARIATES, replicate)))
    try:
        model = fit_dyad_model(scenario.covariates, scenario.mean_degree, z)
    except (InfeasibleTargetsError, FitConvergenceError) as exc:
        return _skip_row({}, replicate, f"fit failed: {exc}", columns)
    graph = simulate_from_model(model, z, _rng(*scenario._entropy(_TAG_NETWORK, replicate)))
    forest = run_rds(
        graph, z, scenario.sampler_config(), _rng(*scenario._entropy(_TAG_RDS, replicate)), names
    )
    est = sample_estimates(forest)

    row: dict = {"replicate": replicate, "status": "ok", "reason": None}
    row["truth_mean_degree"] = mean_degree(graph)
    for k, name in enumerate(names):
        truth = _realized_truth(graph, z[:, k])
        row[f"truth_prevalence_{name}"] = truth["prevalence"]
        row[f"truth_diff_activity_{name}"] = truth["diff_activity"]
        row[f"truth_homophily_{name}"] = truth["homophily"]
        row[f"truth_homophily_ratio_{name}"] = truth["homophily_ratio"]
        row[f"est_diff_activity_{name}"] = est.diff_activity[k]
        row[f"est_homophily_{name}"] = est.homophily[k]
        row[f"est_homophily_ratio_{name}"] = est.homophily_ratio[k]
        row[f"est_rds2_prevalence_{name}"] = est.rds2_prevalence[k]
        row[f"est_crude_prevalence_{name}"] = est.crude_prevalence[k]
        row[f"rb_diff_activity_{name}"] = relative_bias(est.diff_activity[k], truth["diff_activity"])
        row[f"rb_homophily_{name}"] = relative_bias(est.homophily[k], truth["homophily"])
        row[f"rb_homophily_ratio_{name}"] = relative_bias(
            est.homophily_ratio[k], truth["homophily_ratio"]
        )
        row[f"rb_rds2_prevalence_{name}"] = relative_bias(est.rds2_prevalence[k], truth["prevalence"])
    row.update(reseed_count=forest.reseed_count, max_wave=forest.max_wave, truncated=forest.truncated)
    return row


def run_engage_mimic(
    scenario: EngageScenario, threads: int = 1, out_dir=None
) -> tuple[list[dict], list[dict]]:
    """Run the multi-attribute scenario; one row per replicate.

    Replicates whose dyad-model fit does not converge are recorded as
    skipped rows. Summary rows aggregate relative bias per covariate and
    estimand.
    """
    sampler_model = binary_sampler(scenario.covariate_spec())
    tasks = [(scenario, sampler_model, rep) for rep in range(scenario.replicates)]
    rows = _run_tasks(tasks, _engage_task, threads)

    names = scenario.covariate_names
    summary: list[dict] = []
    for name in names:
        per_cov = []
        for row in rows:
            flat = {"covariate": name, "status": row["status"]}
            for kind in ("rb_diff_activity", "rb_homophily", "rb_homophily_ratio", "rb_rds2_prevalence"):
                flat[kind] = row.get(f"{kind}_{name}")
            per_cov.append(flat)
        summary.extend(
            summarize_replicates(
                per_cov,
                ["covariate"],
                ["rb_diff_activity", "rb_homophily", "rb_homophily_ratio", "rb_rds2_prevalence"],
                scenario.replicates,
            )
        )
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        write_rows(os.path.join(out_dir, "replicates.csv"), engage_columns(names), rows)
        write_rows(os.path.join(out_dir, "summary.csv"), ["covariate"] + _SUMMARY_STAT_COLUMNS, summary)
    return rows, summary


# ---------------------------------------------------------------------------
# Summaries and CSV output
# ---------------------------------------------------------------------------

_SUMMARY_STAT_COLUMNS = [
    "estimand",
    "count",
    "undefined",
    "undefined_rate",
    "mean",
    "min",
    "q25",
    "median",
    "q75",
    "max",
]


def summarize_replicates(
    rows: list[dict], group_columns: list[str], value_columns: list[str], replicates: int
) -> list[dict]:
    """Distribution summary per (group, estimand) over replicate rows.

    Quartiles use linear interpolation between order statistics. Undefined
    entries (missing estimates, zero truth, skipped replicates) are
    excluded from the statistics and counted, so
    ``count + undefined == replicates`` per group and estimand.
    """
    groups: dict[tuple, list[dict]] = {}
    order: list[tuple] = []
    for row in rows:
        key = tuple(row[c] for c in group_columns)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(row)

    summary = []
    for key in order:
        members = groups[key]
        if len(members) != replicates:
            raise ValueError(
                f"group {key} has {len(members)} rows; expected {replicates} replicates"
            )
        for column in value_columns:
            values = np.array(
                [row[column] for row in members if row.get(column) is not None], dtype=float
            )
            entry = dict(zip(group_columns, key))
            entry["estimand"] = column.removeprefix("rb_")
            entry["count"] = int(values.size)
            entry["undefined"] = replicates - int(values.size)
            entry["undefined_rate"] = (replicates - int(values.size)) / replicates
            if values.size:
                q25, median, q75 = np.percentile(values, [25.0, 50.0, 75.0])
                entry.update(
                    mean=float(values.mean()),
                    min=float(values.min()),
                    q25=float(q25),
                    median=float(median),
                    q75=float(q75),
                    max=float(values.max()),
                )
            else:
                entry.update(mean=None, min=None, q25=None, median=None, q75=None, max=None)
            summary.append(entry)
    return summary


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def write_rows(path, columns: list[str], rows: list[dict]) -> None:
    """Write rows as CSV in the given column order; None becomes empty."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_format_cell(row.get(column)) for column in columns])
