"""Command-line front end.

Subcommands: ``netgen`` (one population network), ``covgen`` (correlated
binary covariates), ``rds`` (one recruitment run over a stored network),
``estimate`` (estimates from stored forests), ``experiment`` (the grid
sweep), and ``engage-mimic`` (the multi-attribute scenario). Every run
writes a manifest echoing the effective config and master seed, so any
output can be reproduced exactly.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__
from .config import (
    covariate_spec_from_config,
    engage_scenario_from_config,
    experiment_plan_from_config,
    has_covariate_sections,
    load_config,
    multi_network_run_from_config,
    network_run_from_config,
    sampler_config_from_config,
    serialize_config,
)
from .covariates import CovariateSpec, generate_binary_covariates
from .errors import ConfigError, RdsimError
from .estimators import sample_estimates
from .graph import (
    AttributeVector,
    differential_activity,
    homophily_ratio,
    mean_degree,
    mixing_counts,
    newman_assortativity,
    prevalence,
    read_attributes,
    read_edge_list,
    write_attributes,
    write_edge_list,
)
from .harness import run_engage_mimic, run_experiment, write_rows
from .netgen import fit_dyad_model, generate_network, simulate_from_model
from .sampler import read_forest, run_rds, write_forest


def _rng(seed: int, stream: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, stream]))


def _say(args, message: str) -> None:
    if not getattr(args, "quiet", False):
        print(message)


def _write_manifest(out_dir: str, command: str, seed: int | None, cfg) -> None:
    path = os.path.join(out_dir, "manifest.txt")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"rdsim-version = {__version__}\n")
        fh.write(f"command = {command}\n")
        if seed is not None:
            fh.write(f"master-seed = {seed}\n")
        fh.write("\n")
        fh.write(serialize_config(cfg))


def _ensure_out(args) -> str:
    os.makedirs(args.out, exist_ok=True)
    return args.out


def _attribute_stats(graph, values) -> list[str]:
    stats = [f"prevalence={prevalence(values):.4g}"]
    counts = mixing_counts(graph, values)
    try:
        stats.append(f"diff_activity={differential_activity(graph, values):.4g}")
    except RdsimError:
        stats.append("diff_activity=undefined")
    try:
        stats.append(f"homophily={newman_assortativity(counts):.4g}")
        stats.append(f"homophily_ratio={homophily_ratio(counts):.4g}")
    except RdsimError:
        stats.append("homophily=undefined")
    return stats


def cmd_netgen(args) -> int:
    cfg = load_config(args.config)
    out = _ensure_out(args)
    if has_covariate_sections(cfg):
        n, mean_deg, _, targets, matrix = multi_network_run_from_config(cfg, source=args.config)
        spec = CovariateSpec(
            names=tuple(t.name for t in targets),
            marginals=np.array([t.prevalence for t in targets]),
            correlations=matrix,
        )
        z = generate_binary_covariates(spec, n, _rng(args.seed, 0))
        model = fit_dyad_model(targets, mean_deg, z)
        graph = simulate_from_model(model, z, _rng(args.seed, 1))
        attributes = [AttributeVector(name, z[:, k]) for k, name in enumerate(spec.names)]
        per_attr = [
            f"{name}: " + " ".join(_attribute_stats(graph, z[:, k]))
            for k, name in enumerate(spec.names)
        ]
        summary = " | ".join(per_attr)
    else:
        targets, mode = network_run_from_config(cfg, source=args.config)
        graph, z = generate_network(targets, _rng(args.seed), mode)
        attributes = [AttributeVector("z", z)]
        summary = " ".join(_attribute_stats(graph, z))
    write_edge_list(graph, os.path.join(out, "edges.csv"))
    write_attributes(os.path.join(out, "attributes.csv"), attributes)
    _write_manifest(out, "netgen", args.seed, cfg)
    _say(
        args,
        f"netgen: wrote edges.csv attributes.csv | n={graph.node_count} "
        f"edges={graph.edge_count} mean_degree={mean_degree(graph):.4g} | {summary}",
    )
    return 0


def cmd_covgen(args) -> int:
    cfg = load_config(args.config)
    spec, n, seed = covariate_spec_from_config(cfg, source=args.config)
    if args.seed is not None:
        seed = args.seed
    out = _ensure_out(args)
    values = generate_binary_covariates(spec, n, _rng(seed))
    write_attributes(
        os.path.join(out, "attributes.csv"),
        [AttributeVector(name, values[:, k]) for k, name in enumerate(spec.names)],
    )
    _write_manifest(out, "covgen", seed, cfg)
    marginals = ", ".join(f"{name}={values[:, k].mean():.4g}" for k, name in enumerate(spec.names))
    _say(args, f"covgen: wrote attributes.csv | n={n} {marginals}")
    return 0


def cmd_rds(args) -> int:
    cfg = load_config(args.config)
    sampler_config = sampler_config_from_config(cfg, source=args.config)
    attributes = read_attributes(args.attributes)
    node_count = attributes[0].values.size
    graph = read_edge_list(args.edges, node_count=node_count)
    out = _ensure_out(args)
    forest = run_rds(
        graph,
        np.column_stack([a.values for a in attributes]),
        sampler_config,
        _rng(args.seed),
        tuple(a.name for a in attributes),
    )
    write_forest(forest, os.path.join(out, "forest.csv"))
    _write_manifest(out, "rds", args.seed, cfg)
    _say(
        args,
        f"rds: wrote forest.csv | sampled={forest.size} max_wave={forest.max_wave} "
        f"reseeds={forest.reseed_count} truncated={str(forest.truncated).lower()}",
    )
    return 0


def cmd_estimate(args) -> int:
    graph = None
    if args.edges is not None:
        forests = [read_forest(path) for path in args.forest]
        node_count = max(int(f.nodes.max()) + 1 for f in forests)
        graph = read_edge_list(args.edges, node_count=node_count)
    out = _ensure_out(args)
    rows = []
    columns: list[str] = []
    for path in args.forest:
        forest = read_forest(path)
        est = sample_estimates(forest, graph)
        row = {"forest": path, "sample_size": est.sample_size, "max_wave": est.max_wave}
        for k, name in enumerate(est.attribute_names):
            row[f"est_diff_activity_{name}"] = est.diff_activity[k]
            row[f"est_homophily_{name}"] = est.homophily[k]
            row[f"est_homophily_ratio_{name}"] = est.homophily_ratio[k]
            row[f"est_rds2_prevalence_{name}"] = est.rds2_prevalence[k]
            row[f"est_crude_prevalence_{name}"] = est.crude_prevalence[k]
            if est.induced_homophily is not None:
                row[f"est_induced_homophily_{name}"] = est.induced_homophily[k]
        if not columns:
            columns = list(row)
        rows.append(row)
        _say(args, f"estimate: {path} sampled={est.sample_size} max_wave={est.max_wave}")
    write_rows(os.path.join(out, "estimates.csv"), columns, rows)
    inputs = {f"forest{i}": path for i, path in enumerate(args.forest)}
    if args.edges is not None:
        inputs["edges"] = args.edges
    _write_manifest(out, "estimate", None, {"inputs": inputs})
    _say(args, f"estimate: wrote estimates.csv ({len(rows)} rows)")
    return 0


def _apply_seed_override(cfg, section: str, seed: int | None) -> None:
    if seed is not None:
        cfg.setdefault(section, {})["seed"] = str(seed)


def cmd_experiment(args) -> int:
    cfg = load_config(args.config)
    _apply_seed_override(cfg, "experiment", args.seed)
    if args.desk_scale:
        cfg.setdefault("network", {})["mean_degree"] = "20"
        raw = cfg.setdefault("experiment", {}).setdefault("replicates", "100")
        try:
            cfg["experiment"]["replicates"] = str(min(int(raw), 100))
        except ValueError:
            pass  # the plan builder reports the malformed value with context
    plan = experiment_plan_from_config(cfg, source=args.config)
    out = _ensure_out(args)
    _say(
        args,
        f"experiment: {len(plan.cells())} cells x {plan.replicates} replicates "
        f"(N={plan.node_count}, mean_degree={plan.mean_degree}, threads={args.threads})",
    )
    rows, summary = run_experiment(plan, threads=args.threads, out_dir=out)
    _write_manifest(out, "experiment", plan.master_seed, cfg)
    skipped = {}
    for row in rows:
        if row["status"] == "skipped":
            skipped[row["cell"]] = row["reason"]
    for cell_index, reason in sorted(skipped.items()):
        print(f"warning: cell {cell_index} skipped: {reason}", file=sys.stderr)
    _say(
        args,
        f"experiment: wrote replicates.csv summary.csv "
        f"({len(rows)} rows, {len(skipped)} skipped cells)",
    )
    return 0


def cmd_engage(args) -> int:
    cfg = load_config(args.config)
    _apply_seed_override(cfg, "engage", args.seed)
    scenario = engage_scenario_from_config(cfg, source=args.config)
    if args.desk_scale:
        scenario = scenario.desk_scaled()
        cfg["engage"]["n"] = str(scenario.node_count)
        cfg["engage"]["sample_size"] = str(scenario.sample_size)
    out = _ensure_out(args)
    _say(
        args,
        f"engage-mimic: N={scenario.node_count} sample={scenario.sample_size} "
        f"replicates={scenario.replicates} covariates={','.join(scenario.covariate_names)} "
        f"(threads={args.threads})",
    )
    rows, summary = run_engage_mimic(scenario, threads=args.threads, out_dir=out)
    _write_manifest(out, "engage-mimic", scenario.master_seed, cfg)
    skipped = sum(1 for row in rows if row["status"] == "skipped")
    if skipped:
        print(f"warning: {skipped} replicates skipped (fit failures)", file=sys.stderr)
    for entry in summary:
        if entry["estimand"] == "diff_activity" and entry["mean"] is not None:
            _say(
                args,
                f"engage-mimic: {entry['covariate']}: mean RB(diff_activity) = {entry['mean']:+.4f}",
            )
    _say(args, f"engage-mimic: wrote replicates.csv summary.csv ({len(rows)} rows)")
    return 0


def _add_common(parser, config=True, seed_default=0, threads=False, desk=False):
    if config:
        parser.add_argument("--config", required=True, help="config file path")
    parser.add_argument("--out", default=".", help="output directory (default: current)")
    parser.add_argument("-q", "--quiet", action="store_true", help="suppress informational output")
    parser.add_argument(
        "--seed",
        type=int,
        default=seed_default,
        help="master seed" + (" (overrides the config)" if seed_default is None else ""),
    )
    if threads:
        parser.add_argument("--threads", type=int, default=1, help="worker processes (default 1)")
    if desk:
        parser.add_argument(
            "--desk-scale",
            action="store_true",
            help="shrink the run to desk scale (experiment: mean_degree=20, <=100 replicates; "
            "engage-mimic: population and sample divided by 10)",
        )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rdsim",
        description="Simulate recruitment sampling over generated social networks "
        "and measure how well network estimands are recovered.",
    )
    parser.add_argument("--version", action="version", version=f"rdsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("netgen", help="generate one population network from [network] targets")
    _add_common(p)
    p.set_defaults(handler=cmd_netgen)

    p = sub.add_parser("covgen", help="generate correlated binary covariates")
    _add_common(p, seed_default=None)
    p.set_defaults(handler=cmd_covgen)

    p = sub.add_parser("rds", help="run one recruitment sample over a stored network")
    _add_common(p)
    p.add_argument("--edges", required=True, help="edge-list CSV")
    p.add_argument("--attributes", required=True, help="attribute CSV")
    p.set_defaults(handler=cmd_rds)

    p = sub.add_parser("estimate", help="compute estimates from stored forests")
    p.add_argument("--forest", required=True, nargs="+", help="forest CSV path(s)")
    p.add_argument("--edges", help="edge-list CSV enabling the induced-subgraph oracle")
    p.add_argument("--out", default=".", help="output directory (default: current)")
    p.add_argument("-q", "--quiet", action="store_true", help="suppress informational output")
    p.set_defaults(handler=cmd_estimate)

    p = sub.add_parser("experiment", help="run the replicated grid sweep")
    _add_common(p, seed_default=None, threads=True, desk=True)
    p.set_defaults(handler=cmd_experiment)

    p = sub.add_parser("engage-mimic", help="run the multi-attribute cohort-mimic scenario")
    _add_common(p, seed_default=None, threads=True, desk=True)
    p.set_defaults(handler=cmd_engage)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (RdsimError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry_point() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
