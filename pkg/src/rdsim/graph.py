"""Undirected population networks with binary node attributes.

Immutable graph container plus the exact population-level statistics used
as estimands throughout the package: mean degree, attribute prevalence,
differential activity, attribute mixing counts, and two homophily metrics
(Newman's assortativity coefficient and the within/cross edge ratio),
together with the analytic bridge between those two metrics.

Two interchange file formats live here as well: an edge-list CSV
(``src,dst`` with 0-based indices, ``src < dst``) and an attribute CSV
(``node,<name1>,...`` with 0/1 values).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import UndefinedEstimandError

__all__ = [
    "Graph",
    "AttributeVector",
    "DegreeDistribution",
    "MixingCounts",
    "mean_degree",
    "prevalence",
    "degree_distribution",
    "differential_activity",
    "mixing_counts",
    "newman_assortativity",
    "homophily_ratio",
    "assortativity_from_ratio",
    "ratio_from_assortativity",
    "read_edge_list",
    "write_edge_list",
    "read_attributes",
    "write_attributes",
]


class Graph:
    """Immutable undirected simple graph on nodes ``0 .. node_count-1``.

    Edges are stored once in canonical order (``src < dst``, sorted), with a
    CSR-style adjacency (sorted neighbor array per node) built alongside.
    Self-loops and parallel edges are rejected. All arrays are frozen after
    construction, so instances are safe to share across workers.
    """

    __slots__ = ("_n", "_src", "_dst", "_indptr", "_indices", "_degrees")

    def __init__(self, node_count: int, src, dst):
        n = int(node_count)
        if n < 1:
            raise ValueError("node_count must be >= 1")
        src = np.asarray(src, dtype=np.int64).ravel()
        dst = np.asarray(dst, dtype=np.int64).ravel()
        if src.shape != dst.shape:
            raise ValueError("src and dst must have equal length")
        if src.size:
            if src.min() < 0 or dst.min() < 0 or src.max() >= n or dst.max() >= n:
                raise ValueError("edge endpoint out of range")
        lo = np.minimum(src, dst)
        hi = np.maximum(src, dst)
        if np.any(lo == hi):
            raise ValueError("self-loops are not allowed")
        order = np.lexsort((hi, lo))
        lo, hi = lo[order], hi[order]
        if lo.size > 1:
            dup = (lo[1:] == lo[:-1]) & (hi[1:] == hi[:-1])
            if np.any(dup):
                raise ValueError("parallel edges are not allowed")

        ends = np.concatenate([lo, hi])
        other = np.concatenate([hi, lo])
        degrees = np.bincount(ends, minlength=n)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(degrees, out=indptr[1:])
        adj_order = np.lexsort((other, ends))
        indices = other[adj_order]

        for arr in (lo, hi, indptr, indices, degrees):
            arr.flags.writeable = False
        self._n = n
        self._src = lo
        self._dst = hi
        self._indptr = indptr
        self._indices = indices
        self._degrees = degrees

    @property
    def node_count(self) -> int:
        return self._n

    @property
    def edge_count(self) -> int:
        return int(self._src.size)

    @property
    def src(self) -> np.ndarray:
        """Lower endpoints of the canonical edge list (read-only)."""
        return self._src

    @property
    def dst(self) -> np.ndarray:
        """Upper endpoints of the canonical edge list (read-only)."""
        return self._dst

    @property
    def degrees(self) -> np.ndarray:
        """Degree of every node (read-only, sums to 2 * edge_count)."""
        return self._degrees

    def neighbors(self, node: int) -> np.ndarray:
        """Sorted neighbor array of ``node`` (read-only view)."""
        return self._indices[self._indptr[node]:self._indptr[node + 1]]

    def __repr__(self) -> str:
        return f"Graph(node_count={self._n}, edge_count={self.edge_count})"


@dataclass(frozen=True)
class AttributeVector:
    """Named binary attribute, one value per node."""

    name: str
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.int8).ravel()
        if values.size < 1:
            raise ValueError("attribute vector must be non-empty")
        if not np.isin(values, (0, 1)).all():
            raise ValueError(f"attribute {self.name!r} has values outside {{0, 1}}")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class DegreeDistribution:
    """Frequency table of node degrees: ``counts[k]`` nodes have degree k."""

    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64).ravel()
        if counts.size < 1 or counts.min() < 0:
            raise ValueError("degree counts must be a non-empty nonnegative table")
        counts.flags.writeable = False
        object.__setattr__(self, "counts", counts)

    @property
    def max_degree(self) -> int:
        return int(self.counts.size - 1)

    @property
    def node_count(self) -> int:
        return int(self.counts.sum())

    @property
    def total_degree(self) -> int:
        """Sum of k * counts[k]; equals twice the edge count."""
        return int(np.arange(self.counts.size) @ self.counts)


@dataclass(frozen=True)
class MixingCounts:
    """Edge counts classified by endpoint attributes (each edge once)."""

    within_1: int
    within_0: int
    cross: int

    def __post_init__(self):
        if min(self.within_1, self.within_0, self.cross) < 0:
            raise ValueError("mixing counts must be nonnegative")

    @property
    def total(self) -> int:
        return self.within_1 + self.within_0 + self.cross


def _as_attribute(values, node_count: int | None = None) -> np.ndarray:
    z = np.asarray(values, dtype=np.int64).ravel()
    if z.size < 1:
        raise ValueError("attribute vector must be non-empty")
    if node_count is not None and z.size != node_count:
        raise ValueError(f"attribute length {z.size} != node count {node_count}")
    if not np.isin(z, (0, 1)).all():
        raise ValueError("attribute values must be 0 or 1")
    return z


def mean_degree(graph: Graph) -> float:
    """Average degree, ``2 * edge_count / node_count``."""
    return 2.0 * graph.edge_count / graph.node_count


def prevalence(values) -> float:
    """Proportion of nodes carrying the attribute (value 1)."""
    z = _as_attribute(values)
    return float(z.sum() / z.size)


def degree_distribution(graph: Graph) -> DegreeDistribution:
    """Degree frequency table of ``graph``."""
    counts = np.bincount(graph.degrees, minlength=1)
    return DegreeDistribution(counts)


def differential_activity(graph: Graph, values) -> float:
    """Ratio of mean degrees: attribute-present group over attribute-absent.

    Args:
        graph: Population graph.
        values: Binary attribute vector, one value per node.

    Returns:
        Mean degree of the value-1 group divided by mean degree of the
        value-0 group.

    Raises:
        UndefinedEstimandError: If either group is empty, or the value-0
            group has no edge ends (zero total degree).
    """
    z = _as_attribute(values, graph.node_count)
    mask = z == 1
    n1 = int(mask.sum())
    n0 = z.size - n1
    if n1 == 0 or n0 == 0:
        raise UndefinedEstimandError("differential activity needs both attribute groups present")
    deg = graph.degrees
    total0 = int(deg[~mask].sum())
    if total0 == 0:
        raise UndefinedEstimandError("differential activity undefined: value-0 group has no edge ends")
    total1 = int(deg[mask].sum())
    return (total1 / n1) / (total0 / n0)


def mixing_counts(graph: Graph, values) -> MixingCounts:
    """Exact edge counts by endpoint-attribute class (each edge once)."""
    z = _as_attribute(values, graph.node_count)
    za = z[graph.src]
    zb = z[graph.dst]
    within_1 = int(np.sum((za == 1) & (zb == 1)))
    within_0 = int(np.sum((za == 0) & (zb == 0)))
    cross = graph.edge_count - within_1 - within_0
    return MixingCounts(within_1=within_1, within_0=within_0, cross=cross)


def newman_assortativity(counts: MixingCounts) -> float:
    """Newman's assortativity coefficient for a binary attribute.

    Uses the symmetric undirected convention: cross edges contribute half
    their share to each off-diagonal cell of the mixing matrix.

    Args:
        counts: Edge mixing counts.

    Returns:
        Coefficient in [-1, 1]; 1 iff no cross edges (given both groups own
        edges), -1 iff no within edges.

    Raises:
        UndefinedEstimandError: If there are no edges, or all edge ends fall
            in a single attribute class (zero denominator).
    """
    total = counts.total
    if total == 0:
        raise UndefinedEstimandError("assortativity undefined on an empty edge set")
    e11 = counts.within_1 / total
    e00 = counts.within_0 / total
    half_cross = counts.cross / (2.0 * total)
    a1 = e11 + half_cross
    a0 = e00 + half_cross
    denom = 1.0 - (a1 * a1 + a0 * a0)
    if denom == 0.0:
        raise UndefinedEstimandError("assortativity undefined: all edge ends in one attribute class")
    return (e11 + e00 - a1 * a1 - a0 * a0) / denom


def homophily_ratio(counts: MixingCounts) -> float:
    """Within-group-1 over cross edge count ratio.

    Raises:
        UndefinedEstimandError: If there are no cross edges.
    """
    if counts.cross == 0:
        raise UndefinedEstimandError("homophily ratio undefined: no cross-group edges")
    return counts.within_1 / counts.cross


def assortativity_from_ratio(ratio: float, prevalence: float, diff_activity: float) -> float:
    """Map the within/cross edge ratio to the assortativity scale.

    Evaluates ``R/(1+R) - 2/(1 + eta*(1+2R))`` with
    ``eta = (1/D_a) * (1-p)/p``. The map is strictly increasing in the
    ratio and tends to 1 as the ratio grows. Note this analytic bridge
    assumes an idealized mixing structure; on a realized finite network it
    generally differs from :func:`newman_assortativity` of that network.

    Args:
        ratio: Within-1/cross edge ratio (>= 0).
        prevalence: Attribute prevalence p, strictly inside (0, 1).
        diff_activity: Differential activity D_a (> 0).
    """
    if not 0.0 < prevalence < 1.0:
        raise ValueError("prevalence must be strictly inside (0, 1)")
    if diff_activity <= 0.0:
        raise ValueError("differential activity must be positive")
    if ratio < 0.0:
        raise ValueError("homophily ratio must be nonnegative")
    eta = (1.0 / diff_activity) * (1.0 - prevalence) / prevalence
    return ratio / (1.0 + ratio) - 2.0 / (1.0 + eta * (1.0 + 2.0 * ratio))


def ratio_from_assortativity(
    assortativity: float,
    prevalence: float,
    diff_activity: float,
    tol: float = 1e-10,
) -> float:
    """Invert :func:`assortativity_from_ratio` by bisection.

    Args:
        assortativity: Target value; must lie strictly between the value at
            ratio 0 and the limit 1.
        prevalence: Attribute prevalence p in (0, 1).
        diff_activity: Differential activity (> 0).
        tol: Absolute tolerance on the returned ratio.

    Returns:
        The unique nonnegative ratio mapping to ``assortativity``.

    Raises:
        ValueError: If the target is outside the attainable open interval.
    """
    lo_value = assortativity_from_ratio(0.0, prevalence, diff_activity)
    if not lo_value < assortativity < 1.0:
        raise ValueError(
            f"assortativity {assortativity} not attainable: must be in ({lo_value:.6g}, 1)"
        )
    lo, hi = 0.0, 1.0
    while assortativity_from_ratio(hi, prevalence, diff_activity) < assortativity:
        hi *= 2.0
        if hi > 1e15:
            raise ValueError(f"assortativity {assortativity} too close to the limit 1")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if assortativity_from_ratio(mid, prevalence, diff_activity) < assortativity:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def write_edge_list(graph: Graph, path) -> None:
    """Write ``graph`` as CSV with header ``src,dst`` (0-based, src < dst)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["src", "dst"])
        writer.writerows(zip(graph.src.tolist(), graph.dst.tolist()))


def read_edge_list(path, node_count: int | None = None) -> Graph:
    """Read an edge-list CSV written by :func:`write_edge_list`.

    Args:
        path: CSV file with header ``src,dst``.
        node_count: Total number of nodes. When omitted, inferred as
            ``max index + 1``, which silently drops trailing isolated nodes;
            pass it explicitly whenever those matter.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["src", "dst"]:
            raise ValueError(f"{path}: expected header 'src,dst'")
        pairs = [(int(row[0]), int(row[1])) for row in reader if row]
    if node_count is None:
        if not pairs:
            raise ValueError(f"{path}: empty edge list; node_count is required")
        node_count = max(max(a, b) for a, b in pairs) + 1
    arr = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    return Graph(node_count, arr[:, 0], arr[:, 1])


def write_attributes(path, attributes: Sequence[AttributeVector]) -> None:
    """Write attribute CSV with header ``node,<name1>,...``."""
    attrs = list(attributes)
    if not attrs:
        raise ValueError("need at least one attribute vector")
    n = attrs[0].values.size
    for a in attrs:
        if a.values.size != n:
            raise ValueError("attribute vectors must have equal length")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["node"] + [a.name for a in attrs])
        columns = [a.values for a in attrs]
        for i in range(n):
            writer.writerow([i] + [int(col[i]) for col in columns])


def read_attributes(path) -> list[AttributeVector]:
    """Read an attribute CSV written by :func:`write_attributes`.

    Rows must cover nodes 0..n-1 in order.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0].strip() != "node" or len(header) < 2:
            raise ValueError(f"{path}: expected header 'node,<name>,...'")
        names = [h.strip() for h in header[1:]]
        rows = [row for row in reader if row]
    values = np.empty((len(rows), len(names)), dtype=np.int8)
    for i, row in enumerate(rows):
        if int(row[0]) != i:
            raise ValueError(f"{path}: node column must be 0..n-1 in order (row {i})")
        values[i] = [int(v) for v in row[1:]]
    return [AttributeVector(name, values[:, k]) for k, name in enumerate(names)]
