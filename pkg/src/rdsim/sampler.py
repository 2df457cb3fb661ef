"""Respondent-driven sampling over a population graph.

Recruitment walks the graph edges: a fixed number of seeds is drawn, each
sampled node may recruit up to a coupon-limited number of its not-yet-
sampled neighbors (chosen uniformly, attribute-blind), and recruitment
proceeds first-in-first-out by coupon issuance until the target sample
size is reached. Nobody is sampled twice. If every chain dies out early,
the run either reseeds uniformly among the unsampled (default) or returns
a truncated sample flagged as such.
"""

from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass

import numpy as np

from .graph import Graph

__all__ = [
    "SamplerConfig",
    "RecruitmentForest",
    "select_seeds",
    "run_rds",
    "read_forest",
    "write_forest",
]

SEED_SELECTION_MODES = ("uniform", "degree")


@dataclass(frozen=True)
class SamplerConfig:
    """Parameters of one recruitment run.

    Attributes:
        num_seeds: Initial seed count s (>= 1).
        coupons_per_node: Maximum recruits per sampled node c (>= 1).
        target_sample_size: Total nodes to sample n (>= num_seeds).
        seed_selection: "uniform" (attribute- and degree-blind) or
            "degree" (sequentially weighted by degree, without replacement).
        reseed_on_death: Add a fresh uniform seed whenever the recruitment
            queue empties before reaching the target size.
    """

    num_seeds: int
    coupons_per_node: int
    target_sample_size: int
    seed_selection: str = "uniform"
    reseed_on_death: bool = True

    def __post_init__(self):
        if self.num_seeds < 1:
            raise ValueError("num_seeds must be >= 1")
        if self.coupons_per_node < 1:
            raise ValueError("coupons_per_node must be >= 1")
        if self.target_sample_size < self.num_seeds:
            raise ValueError("target_sample_size must be >= num_seeds")
        if self.seed_selection not in SEED_SELECTION_MODES:
            raise ValueError(f"seed_selection must be one of {SEED_SELECTION_MODES}")


@dataclass(frozen=True)
class RecruitmentForest:
    """Observed outcome of one recruitment run.

    Entries are ordered by sampling time. Seeds (including reseeds) carry
    recruiter and coupon_index -1 and wave 0; every recruit's wave is its
    recruiter's wave plus one, and recruiter-recruit pairs are edges of the
    population graph. ``degrees`` holds the reported network size of each
    entry (equal to the true graph degree here).
    """

    nodes: np.ndarray
    recruiters: np.ndarray
    waves: np.ndarray
    seed_ids: np.ndarray
    coupon_indices: np.ndarray
    degrees: np.ndarray
    attributes: np.ndarray
    attribute_names: tuple[str, ...]
    truncated: bool = False
    reseed_count: int = 0

    def __post_init__(self):
        arrays = {}
        for name in ("nodes", "recruiters", "waves", "seed_ids", "coupon_indices", "degrees"):
            arr = np.asarray(getattr(self, name), dtype=np.int64).ravel()
            arr.flags.writeable = False
            arrays[name] = arr
        size = arrays["nodes"].size
        if any(arr.size != size for arr in arrays.values()):
            raise ValueError("forest columns must have equal length")
        attrs = np.asarray(self.attributes, dtype=np.int8)
        if attrs.ndim == 1:
            attrs = attrs[:, None]
        if attrs.shape != (size, len(self.attribute_names)):
            raise ValueError("attribute matrix must be (entries, len(attribute_names))")
        attrs = attrs.copy()
        attrs.flags.writeable = False
        for name, arr in arrays.items():
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "attributes", attrs)
        object.__setattr__(self, "attribute_names", tuple(self.attribute_names))

    @property
    def size(self) -> int:
        return int(self.nodes.size)

    @property
    def max_wave(self) -> int:
        return int(self.waves.max()) if self.size else 0

    def is_seed(self) -> np.ndarray:
        return self.recruiters < 0

    def recruitment_edges(self) -> tuple[np.ndarray, np.ndarray]:
        """(recruiter, recruit) node pairs, one per recruitment."""
        mask = self.recruiters >= 0
        return self.recruiters[mask], self.nodes[mask]

    def attribute_column(self, attribute: int | str = 0) -> np.ndarray:
        if isinstance(attribute, str):
            attribute = self.attribute_names.index(attribute)
        return self.attributes[:, attribute]


def select_seeds(graph: Graph, config: SamplerConfig, rng: np.random.Generator) -> np.ndarray:
    """Draw ``config.num_seeds`` distinct seed nodes, in recruitment order.

    Uniform mode ignores attributes and degrees; degree mode samples
    sequentially without replacement with probability proportional to
    degree.
    """
    n = graph.node_count
    s = config.num_seeds
    if s > n:
        raise ValueError(f"cannot select {s} seeds from {n} nodes")
    if config.seed_selection == "uniform":
        return rng.choice(n, size=s, replace=False).astype(np.int64)
    weights = graph.degrees.astype(np.float64).copy()
    available = np.ones(n, dtype=bool)
    seeds = np.empty(s, dtype=np.int64)
    for i in range(s):
        total = weights.sum()
        if total > 0.0:
            pick = int(rng.choice(n, p=weights / total))
        else:
            # only isolated nodes left; degree weighting degenerates to uniform
            remaining = np.flatnonzero(available)
            pick = int(remaining[rng.integers(remaining.size)])
        seeds[i] = pick
        weights[pick] = 0.0
        available[pick] = False
    return seeds


def run_rds(
    graph: Graph,
    attributes: np.ndarray,
    config: SamplerConfig,
    rng: np.random.Generator,
    attribute_names: tuple[str, ...] | None = None,
    seeds=None,
) -> RecruitmentForest:
    """Simulate one recruitment run over ``graph``.

    Breadth-first by coupon issuance: sampled nodes enter a FIFO queue;
    each dequeued node recruits ``min(coupons, unsampled neighbors,
    remaining budget)`` recruits chosen uniformly without replacement among
    its currently unsampled neighbors. The run halts at exactly
    ``target_sample_size`` nodes. If the queue empties first, a fresh
    uniform seed is added when ``reseed_on_death`` is set; otherwise the
    partial sample is returned with ``truncated=True``.

    Args:
        graph: Population graph (shared read-only).
        attributes: Binary attribute matrix (n,) or (n, m).
        config: Sampler parameters; ``target_sample_size`` must not exceed
            the population size.
        rng: Random stream for this run.
        attribute_names: Labels for the attribute columns; defaults to
            "z" or "z0", "z1", ...
        seeds: Optional explicit seed nodes (distinct, length
            ``config.num_seeds``), overriding seed selection.

    Returns:
        The recruitment forest, with all invariants holding.
    """
    z = np.asarray(attributes, dtype=np.int8)
    if z.ndim == 1:
        z = z[:, None]
    if z.shape[0] != graph.node_count:
        raise ValueError("attribute matrix length must equal the node count")
    if attribute_names is None:
        attribute_names = ("z",) if z.shape[1] == 1 else tuple(f"z{k}" for k in range(z.shape[1]))
    n_target = config.target_sample_size
    if n_target > graph.node_count:
        raise ValueError("target_sample_size exceeds the population size")

    sampled = np.zeros(graph.node_count, dtype=bool)
    wave_of = np.zeros(graph.node_count, dtype=np.int64)
    seed_of = np.zeros(graph.node_count, dtype=np.int64)

    nodes: list[int] = []
    recruiters: list[int] = []
    waves: list[int] = []
    seed_ids: list[int] = []
    coupon_indices: list[int] = []

    def admit(node: int, recruiter: int, wave: int, seed_id: int, coupon: int) -> None:
        sampled[node] = True
        wave_of[node] = wave
        seed_of[node] = seed_id
        nodes.append(node)
        recruiters.append(recruiter)
        waves.append(wave)
        seed_ids.append(seed_id)
        coupon_indices.append(coupon)

    if seeds is None:
        seeds = select_seeds(graph, config, rng)
    else:
        seeds = np.asarray(seeds, dtype=np.int64)
        if seeds.size != config.num_seeds or np.unique(seeds).size != seeds.size:
            raise ValueError("explicit seeds must be num_seeds distinct nodes")

    queue: deque[int] = deque()
    for seed_id, seed in enumerate(seeds):
        admit(int(seed), -1, 0, seed_id, -1)
        queue.append(int(seed))
    next_seed_id = config.num_seeds
    reseed_count = 0
    truncated = False
    coupons = config.coupons_per_node

    while len(nodes) < n_target:
        if not queue:
            unsampled = np.flatnonzero(~sampled)
            if not config.reseed_on_death or unsampled.size == 0:
                truncated = True
                break
            fresh = int(unsampled[rng.integers(unsampled.size)])
            admit(fresh, -1, 0, next_seed_id, -1)
            queue.append(fresh)
            next_seed_id += 1
            reseed_count += 1
            continue
        recruiter = queue.popleft()
        neighbors = graph.neighbors(recruiter)
        open_neighbors = neighbors[~sampled[neighbors]]
        budget = min(coupons, open_neighbors.size, n_target - len(nodes))
        if budget <= 0:
            continue
        if budget == open_neighbors.size:
            picks = rng.permutation(open_neighbors)
        else:
            picks = open_neighbors[rng.choice(open_neighbors.size, size=budget, replace=False)]
        wave = int(wave_of[recruiter]) + 1
        seed_id = int(seed_of[recruiter])
        for coupon, recruit in enumerate(picks):
            admit(int(recruit), recruiter, wave, seed_id, coupon)
            queue.append(int(recruit))

    node_arr = np.asarray(nodes, dtype=np.int64)
    return RecruitmentForest(
        nodes=node_arr,
        recruiters=np.asarray(recruiters, dtype=np.int64),
        waves=np.asarray(waves, dtype=np.int64),
        seed_ids=np.asarray(seed_ids, dtype=np.int64),
        coupon_indices=np.asarray(coupon_indices, dtype=np.int64),
        degrees=graph.degrees[node_arr],
        attributes=z[node_arr],
        attribute_names=attribute_names,
        truncated=truncated,
        reseed_count=reseed_count,
    )


def write_forest(forest: RecruitmentForest, path) -> None:
    """Write a forest as CSV: ``node,recruiter,wave,seed_id,coupon_index,degree,<attrs>``.

    Recruiter and coupon_index cells are empty for seeds.
    """
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["node", "recruiter", "wave", "seed_id", "coupon_index", "degree", *forest.attribute_names]
        )
        for i in range(forest.size):
            recruiter = forest.recruiters[i]
            writer.writerow(
                [
                    int(forest.nodes[i]),
                    "" if recruiter < 0 else int(recruiter),
                    int(forest.waves[i]),
                    int(forest.seed_ids[i]),
                    "" if recruiter < 0 else int(forest.coupon_indices[i]),
                    int(forest.degrees[i]),
                    *(int(v) for v in forest.attributes[i]),
                ]
            )


def read_forest(path) -> RecruitmentForest:
    """Read a forest CSV written by :func:`write_forest`.

    Run metadata that is not part of the file format (truncation flag,
    reseed count) resets to its defaults.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        fixed = ["node", "recruiter", "wave", "seed_id", "coupon_index", "degree"]
        if header is None or [h.strip() for h in header[: len(fixed)]] != fixed:
            raise ValueError(f"{path}: expected header starting with {','.join(fixed)}")
        names = tuple(h.strip() for h in header[len(fixed):])
        if not names:
            raise ValueError(f"{path}: forest file must carry at least one attribute column")
        rows = [row for row in reader if row]
    size = len(rows)
    nodes = np.empty(size, dtype=np.int64)
    recruiters = np.empty(size, dtype=np.int64)
    waves = np.empty(size, dtype=np.int64)
    seed_ids = np.empty(size, dtype=np.int64)
    coupons = np.empty(size, dtype=np.int64)
    degrees = np.empty(size, dtype=np.int64)
    attrs = np.empty((size, len(names)), dtype=np.int8)
    for i, row in enumerate(rows):
        nodes[i] = int(row[0])
        recruiters[i] = int(row[1]) if row[1] != "" else -1
        waves[i] = int(row[2])
        seed_ids[i] = int(row[3])
        coupons[i] = int(row[4]) if row[4] != "" else -1
        degrees[i] = int(row[5])
        attrs[i] = [int(v) for v in row[6:]]
    return RecruitmentForest(
        nodes=nodes,
        recruiters=recruiters,
        waves=waves,
        seed_ids=seed_ids,
        coupon_indices=coupons,
        degrees=degrees,
        attributes=attrs,
        attribute_names=names,
    )
