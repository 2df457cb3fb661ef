"""Estimators of network quantities from an observed recruitment forest.

The forest is all the network data a recruitment survey reveals: reported
degrees, attributes of the sampled, and the recruiter-recruit ties. Sample
homophily is therefore computed on the recruitment edges (the default
here); the induced-subgraph variant, which additionally needs the
unobserved population graph, is provided for oracle comparisons only.
Estimates that are undefined on a given sample (missing group, no cross
edges, zero truth) are returned as ``None`` rather than sentinel numbers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UndefinedEstimandError
from .graph import Graph, MixingCounts, homophily_ratio, newman_assortativity
from .sampler import RecruitmentForest

__all__ = [
    "SampleEstimates",
    "estimate_differential_activity",
    "estimate_homophily",
    "induced_homophily",
    "rds2_prevalence",
    "crude_prevalence",
    "relative_bias",
    "sample_estimates",
]


def estimate_differential_activity(
    forest: RecruitmentForest, attribute: int | str = 0
) -> float | None:
    """Ratio of mean reported degrees, attribute-present over absent.

    Returns None when either group is absent from the sample or the
    value-0 group reports zero total degree.
    """
    z = forest.attribute_column(attribute)
    mask = z == 1
    n1 = int(mask.sum())
    n0 = z.size - n1
    if n1 == 0 or n0 == 0:
        return None
    degrees = forest.degrees
    total0 = int(degrees[~mask].sum())
    if total0 == 0:
        return None
    total1 = int(degrees[mask].sum())
    return (total1 / n1) / (total0 / n0)


def _forest_mixing(forest: RecruitmentForest, attribute: int | str) -> MixingCounts:
    z = forest.attribute_column(attribute)
    z_by_node = np.zeros(int(forest.nodes.max()) + 1, dtype=np.int64)
    z_by_node[forest.nodes] = z
    recruiters, recruits = forest.recruitment_edges()
    za = z_by_node[recruiters]
    zb = z_by_node[recruits]
    within_1 = int(np.sum((za == 1) & (zb == 1)))
    within_0 = int(np.sum((za == 0) & (zb == 0)))
    return MixingCounts(within_1=within_1, within_0=within_0, cross=int(za.size) - within_1 - within_0)


def estimate_homophily(
    forest: RecruitmentForest, attribute: int | str = 0
) -> tuple[float | None, float | None]:
    """Sample homophily from the recruitment edges only.

    Classifies each recruiter-recruit tie by endpoint attributes and
    applies the population homophily metrics to those counts.

    Returns:
        (assortativity, within/cross ratio); either entry is None when
        undefined (no recruitment edges, single-class edge ends, or no
        cross edges for the ratio).
    """
    counts = _forest_mixing(forest, attribute)
    if counts.total == 0:
        return None, None
    try:
        assortativity = newman_assortativity(counts)
    except UndefinedEstimandError:
        assortativity = None
    try:
        ratio = homophily_ratio(counts)
    except UndefinedEstimandError:
        ratio = None
    return assortativity, ratio


def induced_homophily(
    forest: RecruitmentForest, graph: Graph, attribute: int | str = 0
) -> tuple[float | None, float | None]:
    """Oracle-only homophily over the induced subgraph of the sampled nodes.

    Uses every population edge whose two endpoints were both sampled;
    such edges are unobservable in a real recruitment survey, so this is
    for bias diagnostics, not estimation.
    """
    z = forest.attribute_column(attribute)
    in_sample = np.zeros(graph.node_count, dtype=bool)
    in_sample[forest.nodes] = True
    keep = in_sample[graph.src] & in_sample[graph.dst]
    z_full = np.zeros(graph.node_count, dtype=np.int64)
    z_full[forest.nodes] = z
    za = z_full[graph.src[keep]]
    zb = z_full[graph.dst[keep]]
    within_1 = int(np.sum((za == 1) & (zb == 1)))
    within_0 = int(np.sum((za == 0) & (zb == 0)))
    counts = MixingCounts(within_1, within_0, int(za.size) - within_1 - within_0)
    if counts.total == 0:
        return None, None
    try:
        assortativity = newman_assortativity(counts)
    except UndefinedEstimandError:
        assortativity = None
    try:
        ratio = homophily_ratio(counts)
    except UndefinedEstimandError:
        ratio = None
    return assortativity, ratio


def rds2_prevalence(forest: RecruitmentForest, attribute: int | str = 0) -> float:
    """Inverse-degree-weighted prevalence of the attribute.

    ``sum(1/d_i over attribute carriers) / sum(1/d_i over the sample)``,
    which corrects for the degree-proportional inclusion tendency of
    recruitment sampling.

    Raises:
        ValueError: If any reported degree is nonpositive; an isolated
            node cannot be recruited, so this flags corrupt input.
    """
    z = forest.attribute_column(attribute)
    degrees = forest.degrees
    if np.any(degrees <= 0):
        raise ValueError("reported degrees must be positive; degree-0 entries signal corrupt input")
    weights = 1.0 / degrees
    return float(weights[z == 1].sum() / weights.sum())


def crude_prevalence(forest: RecruitmentForest, attribute: int | str = 0) -> float:
    """Unweighted sample proportion carrying the attribute."""
    z = forest.attribute_column(attribute)
    return float(z.sum() / z.size)


def relative_bias(estimate: float | None, truth: float | None) -> float | None:
    """(estimate - truth) / truth, or None when either side is unusable.

    None is returned when the estimate is undefined, the truth is
    undefined, or the truth is zero (callers count such replicates rather
    than substituting a sentinel).
    """
    if estimate is None or truth is None or truth == 0.0:
        return None
    return (estimate - truth) / truth


@dataclass(frozen=True)
class SampleEstimates:
    """All per-attribute estimates computed from one forest.

    Tuple fields hold one entry per attribute column, in forest order.
    ``induced_*`` fields are None unless the population graph was supplied.
    """

    attribute_names: tuple[str, ...]
    sample_size: int
    max_wave: int
    diff_activity: tuple[float | None, ...]
    homophily: tuple[float | None, ...]
    homophily_ratio: tuple[float | None, ...]
    rds2_prevalence: tuple[float | None, ...]
    crude_prevalence: tuple[float, ...]
    induced_homophily: tuple[float | None, ...] | None = None
    induced_homophily_ratio: tuple[float | None, ...] | None = None


def sample_estimates(forest: RecruitmentForest, graph: Graph | None = None) -> SampleEstimates:
    """Compute every estimator for every attribute column of ``forest``.

    Args:
        forest: Observed recruitment forest.
        graph: Optional population graph; enables the oracle-only
            induced-subgraph homophily fields.
    """
    m = len(forest.attribute_names)
    da = []
    hom = []
    ratio = []
    rds2 = []
    crude = []
    ind_h: list[float | None] = []
    ind_r: list[float | None] = []
    # An isolated node can enter the sample as a seed, in which case the
    # inverse-degree weights are undefined; record a marker, not a crash.
    degrees_ok = bool(np.all(forest.degrees > 0))
    for k in range(m):
        da.append(estimate_differential_activity(forest, k))
        h_k, r_k = estimate_homophily(forest, k)
        hom.append(h_k)
        ratio.append(r_k)
        rds2.append(rds2_prevalence(forest, k) if degrees_ok else None)
        crude.append(crude_prevalence(forest, k))
        if graph is not None:
            ih, ir = induced_homophily(forest, graph, k)
            ind_h.append(ih)
            ind_r.append(ir)
    return SampleEstimates(
        attribute_names=forest.attribute_names,
        sample_size=forest.size,
        max_wave=forest.max_wave,
        diff_activity=tuple(da),
        homophily=tuple(hom),
        homophily_ratio=tuple(ratio),
        rds2_prevalence=tuple(rds2),
        crude_prevalence=tuple(crude),
        induced_homophily=tuple(ind_h) if graph is not None else None,
        induced_homophily_ratio=tuple(ind_r) if graph is not None else None,
    )
