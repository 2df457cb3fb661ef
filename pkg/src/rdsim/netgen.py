"""Population network generation by dyad-class moment matching.

Networks with prescribed prevalence, mean degree, differential activity,
and homophily are generated from dyad-independent tie models. With a
single binary attribute the dyads fall into three classes (both ends
carrying the attribute, mixed, neither) and the target moments pin down
one Bernoulli probability per class in closed form, so simulation is exact
with no MCMC. With several attributes, a logistic dyad model with one
intercept plus per-attribute match and activity coefficients is fitted by
Newton moment matching over the joint attribute-pattern classes, and
simulation again draws each dyad class independently.

Only the edge count of each class is random; given the count, the edges
are a uniform subset of the class's dyads, which is distribution-identical
to independent per-dyad Bernoulli draws and scales to populations where
enumerating all dyads is impractical.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import log

import numpy as np
from scipy.special import expit

from .errors import FitConvergenceError, InfeasibleTargetsError
from .graph import Graph, ratio_from_assortativity

__all__ = [
    "NetworkTargets",
    "DyadClassSolution",
    "AttributeTargets",
    "DyadModel",
    "solve_dyad_classes",
    "generate_network",
    "expected_statistics",
    "fit_dyad_model",
    "simulate_from_model",
]

GENERATION_MODES = ("bernoulli", "exact-count")


@dataclass(frozen=True)
class NetworkTargets:
    """Desired population-network characteristics for one binary attribute.

    Attributes:
        node_count: Population size N.
        prevalence: Attribute prevalence p; both groups must round to at
            least one node.
        mean_degree: Target average degree, in (0, N-1).
        diff_activity: Target ratio of group mean degrees (value-1 over
            value-0), positive.
        homophily_ratio: Target within-1/cross edge ratio, nonnegative.
    """

    node_count: int
    prevalence: float
    mean_degree: float
    diff_activity: float
    homophily_ratio: float

    def __post_init__(self):
        if self.node_count < 2:
            raise ValueError("node_count must be >= 2")
        if not 0.0 < self.prevalence < 1.0:
            raise ValueError("prevalence must be strictly inside (0, 1)")
        n1 = int(round(self.prevalence * self.node_count))
        if n1 < 1 or n1 > self.node_count - 1:
            raise ValueError("both attribute groups must round to at least one node")
        # mean_degree = n-1 is allowed: it forces the complete graph
        if not 0.0 < self.mean_degree <= self.node_count - 1:
            raise ValueError("mean_degree must be in (0, node_count - 1]")
        if self.diff_activity <= 0.0:
            raise ValueError("diff_activity must be positive")
        if self.homophily_ratio < 0.0:
            raise ValueError("homophily_ratio must be nonnegative")

    @classmethod
    def with_assortativity(
        cls,
        node_count: int,
        prevalence: float,
        mean_degree: float,
        diff_activity: float,
        assortativity: float,
    ) -> "NetworkTargets":
        """Build targets from an assortativity-scale homophily value."""
        ratio = ratio_from_assortativity(assortativity, prevalence, diff_activity)
        return cls(node_count, prevalence, mean_degree, diff_activity, ratio)

    @property
    def group_sizes(self) -> tuple[int, int]:
        """(n1, n0): attribute-present and attribute-absent group sizes."""
        n1 = int(round(self.prevalence * self.node_count))
        return n1, self.node_count - n1


@dataclass(frozen=True)
class DyadClassSolution:
    """Expected edge counts and per-dyad probabilities per attribute class.

    ``e11/e10/e00`` are expected edge counts for within-group-1, cross, and
    within-group-0 dyads; ``q11/q10/q00`` the matching Bernoulli
    probabilities given group sizes ``n1``/``n0``.
    """

    n1: int
    n0: int
    e11: float
    e10: float
    e00: float
    q11: float
    q10: float
    q00: float

    @property
    def total_edges(self) -> float:
        return self.e11 + self.e10 + self.e00


def _probability(count: float, dyads: int, label: str) -> float:
    if count == 0.0:
        return 0.0
    if dyads == 0:
        raise InfeasibleTargetsError(
            f"infeasible targets: {label} requires {count:.6g} edges but the class has no dyads"
        )
    q = count / dyads
    if q > 1.0 + 1e-12:
        raise InfeasibleTargetsError(
            f"infeasible targets: dyad probability {label} = {count:.6g}/{dyads} = {q:.6g} exceeds 1"
        )
    return min(q, 1.0)


def solve_dyad_classes(targets: NetworkTargets) -> DyadClassSolution:
    """Solve the three dyad-class moments implied by ``targets``.

    The expected counts are the unique solution of
      (i)   e11 + e10 + e00 = N * mean_degree / 2
      (ii)  e11 = homophily_ratio * e10
      (iii) (2 e11 + e10)/n1 = diff_activity * (2 e00 + e10)/n0
    with n1 = round(p*N). Residuals are exact up to floating point.

    Raises:
        InfeasibleTargetsError: If any expected count is negative or any
            per-dyad probability exceeds 1; the message names the violated
            bound.
    """
    n1, n0 = targets.group_sizes
    total = targets.node_count * targets.mean_degree / 2.0
    ratio = targets.homophily_ratio
    activity = targets.diff_activity

    e10 = 2.0 * total * activity * n1 / ((2.0 * ratio + 1.0) * (n0 + activity * n1))
    e11 = ratio * e10
    e00 = total - e11 - e10

    slack = 1e-9 * max(total, 1.0)
    if e00 < -slack:
        raise InfeasibleTargetsError(
            f"infeasible targets: expected within-group-0 edge count e00 = {e00:.6g} < 0 "
            f"(cross-group demand e10 = {e10:.6g} exceeds the group-0 edge ends)"
        )
    e00 = max(e00, 0.0)

    return DyadClassSolution(
        n1=n1,
        n0=n0,
        e11=e11,
        e10=e10,
        e00=e00,
        q11=_probability(e11, n1 * (n1 - 1) // 2, "q11"),
        q10=_probability(e10, n1 * n0, "q10"),
        q00=_probability(e00, n0 * (n0 - 1) // 2, "q00"),
    )


# ---------------------------------------------------------------------------
# Dyad-class sampling machinery
# ---------------------------------------------------------------------------


def _decode_triangular(t: np.ndarray, size: int) -> tuple[np.ndarray, np.ndarray]:
    """Map linear dyad indices to (i, j), i < j, within a ``size``-node group.

    Dyads are enumerated row-major: index = i*(2*size-i-1)/2 + (j-i-1).
    The float inversion can be off by one near row boundaries, so it is
    followed by integer corrections.
    """
    b = 2 * size - 1

    def row_offset(i: np.ndarray) -> np.ndarray:
        return i * (2 * size - i - 1) // 2

    i = np.floor((b - np.sqrt(b * b - 8.0 * t.astype(np.float64))) / 2.0).astype(np.int64)
    for _ in range(2):
        i = np.where(row_offset(i + 1) <= t, i + 1, i)
    for _ in range(2):
        i = np.where((i > 0) & (row_offset(i) > t), i - 1, i)
    j = t - row_offset(i) + i + 1
    return i, j


def _sample_class_dyads(
    group_a: np.ndarray, group_b: np.ndarray | None, k: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``k`` distinct dyads uniformly from one dyad class.

    ``group_b is None`` means the within-group class of ``group_a``.
    """
    if group_b is None:
        size = group_a.size
        population = size * (size - 1) // 2
    else:
        population = group_a.size * group_b.size
    if k == 0:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty.copy()
    if k > population:
        raise ValueError("cannot draw more dyads than the class contains")
    if k == population:
        chosen = np.arange(population, dtype=np.int64)
    else:
        chosen = rng.choice(population, size=k, replace=False).astype(np.int64)
    if group_b is None:
        i, j = _decode_triangular(chosen, group_a.size)
        return group_a[i], group_a[j]
    return group_a[chosen // group_b.size], group_b[chosen % group_b.size]


def _apportion_counts(expected: list[float], capacities: list[int], total: int) -> list[int]:
    """Split ``total`` edges over classes, nearest to their expected counts.

    Largest-remainder apportionment: floors first, leftover edges assigned
    by descending fractional part, never exceeding a class capacity. Keeps
    the grand total exact and every class within one of round(expected).
    """
    floors = [min(int(np.floor(e)), cap) for e, cap in zip(expected, capacities)]
    remainder = total - sum(floors)
    if remainder < 0:
        raise ValueError("total below the summed floors")
    fractions = [e - f for e, f in zip(expected, floors)]
    order = sorted(range(len(expected)), key=lambda idx: -fractions[idx])
    counts = list(floors)
    pos = 0
    while remainder > 0:
        idx = order[pos % len(order)]
        if counts[idx] < capacities[idx]:
            counts[idx] += 1
            remainder -= 1
        pos += 1
        if pos > 4 * len(order) and remainder > 0:
            raise InfeasibleTargetsError(
                "infeasible targets: total edge count exceeds the dyad capacity of all classes"
            )
    return counts


def generate_network(
    targets: NetworkTargets, rng: np.random.Generator, mode: str = "bernoulli"
) -> tuple[Graph, np.ndarray]:
    """Generate a network realizing ``targets`` plus its attribute vector.

    Exactly ``n1 = round(p*N)`` nodes (indices 0..n1-1) carry the
    attribute. In ``bernoulli`` mode each dyad class draws a binomial edge
    count at its class probability; in ``exact-count`` mode the class
    counts are fixed so the realized edge total equals
    ``round(N * mean_degree / 2)`` exactly. Either way the chosen edges are
    a uniform subset of the class dyads.

    Returns:
        (graph, attribute values) with the graph simple and undirected.
    """
    if mode not in GENERATION_MODES:
        raise ValueError(f"mode must be one of {GENERATION_MODES}")
    solution = solve_dyad_classes(targets)
    n = targets.node_count
    n1 = solution.n1
    z = np.zeros(n, dtype=np.int8)
    z[:n1] = 1

    ones = np.arange(n1, dtype=np.int64)
    zeros = np.arange(n1, n, dtype=np.int64)
    classes = [
        (ones, None, solution.e11, solution.q11),
        (ones, zeros, solution.e10, solution.q10),
        (zeros, None, solution.e00, solution.q00),
    ]
    capacities = [n1 * (n1 - 1) // 2, n1 * (n - n1), (n - n1) * (n - n1 - 1) // 2]

    if mode == "exact-count":
        total = int(round(solution.total_edges))
        counts = _apportion_counts([c[2] for c in classes], capacities, total)
    else:
        counts = [
            int(rng.binomial(cap, q)) if cap > 0 else 0
            for (_, _, _, q), cap in zip(classes, capacities)
        ]

    src_parts = []
    dst_parts = []
    for (group_a, group_b, _, _), k in zip(classes, counts):
        a, b = _sample_class_dyads(group_a, group_b, k, rng)
        src_parts.append(a)
        dst_parts.append(b)
    graph = Graph(n, np.concatenate(src_parts), np.concatenate(dst_parts))
    z.flags.writeable = False
    return graph, z


# ---------------------------------------------------------------------------
# Multi-attribute dyad models
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AttributeTargets:
    """Per-attribute targets for a multi-attribute dyad model.

    Homophily is given either on the within/cross-ratio scale
    (``homophily_ratio``) or the assortativity scale (``assortativity``),
    exactly one of the two.
    """

    name: str
    prevalence: float
    diff_activity: float
    homophily_ratio: float | None = None
    assortativity: float | None = None

    def __post_init__(self):
        if (self.homophily_ratio is None) == (self.assortativity is None):
            raise ValueError(
                f"attribute {self.name!r}: give exactly one of homophily_ratio or assortativity"
            )
        if not 0.0 < self.prevalence < 1.0:
            raise ValueError(f"attribute {self.name!r}: prevalence must be inside (0, 1)")
        if self.diff_activity <= 0.0:
            raise ValueError(f"attribute {self.name!r}: diff_activity must be positive")
        if self.homophily_ratio is not None and self.homophily_ratio < 0.0:
            raise ValueError(f"attribute {self.name!r}: homophily_ratio must be nonnegative")

    def resolve_ratio(self, prevalence: float | None = None) -> float:
        """Homophily on the ratio scale, converting from assortativity if needed.

        Args:
            prevalence: Prevalence to use for the conversion (e.g. the
                realized one); defaults to the declared target.
        """
        if self.homophily_ratio is not None:
            return self.homophily_ratio
        p = self.prevalence if prevalence is None else prevalence
        return ratio_from_assortativity(self.assortativity, p, self.diff_activity)


@dataclass(frozen=True)
class DyadModel:
    """Dyad-independent logistic tie model over binary attribute patterns.

    The log-odds of a tie between nodes with attribute rows ``a`` and ``b``
    is ``theta[0] + sum_k theta[1+2k]*[a_k == b_k] + theta[2+2k]*(a_k+b_k)``:
    an edge intercept plus per-attribute homophily-match and activity
    terms. The statistic vector follows the same layout: total edges, then
    per attribute the matched-edge count and the group-1 edge-end count.
    """

    theta: np.ndarray
    covariate_names: tuple[str, ...]

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float).ravel()
        if theta.size != 1 + 2 * len(self.covariate_names):
            raise ValueError("theta must have 1 + 2*len(covariate_names) entries")
        if not np.all(np.isfinite(theta)):
            raise ValueError("theta must be finite")
        theta = theta.copy()
        theta.flags.writeable = False
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "covariate_names", tuple(self.covariate_names))

    def tie_probability(self, pattern_a, pattern_b) -> float:
        """Tie probability for one dyad given the endpoint attribute rows."""
        a = np.asarray(pattern_a, dtype=np.int64)
        b = np.asarray(pattern_b, dtype=np.int64)
        stats = np.concatenate([[1.0], np.stack([(a == b).astype(float), (a + b).astype(float)], axis=1).ravel()])
        return float(expit(stats @ self.theta))

    @staticmethod
    def statistic_labels(names: tuple[str, ...]) -> list[str]:
        labels = ["edges"]
        for name in names:
            labels.extend([f"match[{name}]", f"group1_ends[{name}]"])
        return labels


class _PatternClasses:
    """Dyads grouped by the unordered pair of endpoint attribute patterns."""

    def __init__(self, z: np.ndarray):
        z = np.asarray(z)
        if z.ndim == 1:
            z = z[:, None]
        if z.ndim != 2 or z.shape[0] < 2:
            raise ValueError("attribute matrix must be (n >= 2, m)")
        if not np.isin(z, (0, 1)).all():
            raise ValueError("attribute values must be 0 or 1")
        self.n, self.m = z.shape
        patterns, inverse = np.unique(z, axis=0, return_inverse=True)
        inverse = inverse.ravel()
        sizes = np.bincount(inverse, minlength=patterns.shape[0])
        order = np.argsort(inverse, kind="stable")
        bounds = np.cumsum(sizes)
        self.patterns = patterns.astype(np.int64)
        self.members = [order[start:stop] for start, stop in zip(np.r_[0, bounds[:-1]], bounds)]

        n_patterns = patterns.shape[0]
        ai, bi = np.triu_indices(n_patterns)
        counts = np.where(
            ai == bi,
            sizes[ai] * (sizes[ai] - 1) // 2,
            sizes[ai] * sizes[bi],
        ).astype(np.float64)
        keep = counts > 0
        self.class_a = ai[keep]
        self.class_b = bi[keep]
        self.dyad_counts = counts[keep]

        pa = self.patterns[self.class_a]
        pb = self.patterns[self.class_b]
        stats = np.empty((self.class_a.size, 1 + 2 * self.m), dtype=np.float64)
        stats[:, 0] = 1.0
        stats[:, 1::2] = (pa == pb).astype(np.float64)
        stats[:, 2::2] = (pa + pb).astype(np.float64)
        self.statistics = stats

    def probabilities(self, theta: np.ndarray) -> np.ndarray:
        return expit(self.statistics @ theta)

    def expected(self, theta: np.ndarray) -> np.ndarray:
        return self.statistics.T @ (self.dyad_counts * self.probabilities(theta))


def expected_statistics(model: DyadModel, z: np.ndarray) -> np.ndarray:
    """Exact expected statistic vector of ``model`` on attribute matrix ``z``.

    Sums class probability times class count over joint-pattern dyad
    classes, so cost grows with the number of distinct attribute patterns,
    not with the number of node pairs. Layout: total edges, then per
    attribute the matched-edge count and the group-1 edge-end count.
    """
    classes = _PatternClasses(z)
    if 1 + 2 * classes.m != model.theta.size:
        raise ValueError("model and attribute matrix disagree on attribute count")
    return classes.expected(model.theta)


def _target_statistics(
    attribute_targets: list[AttributeTargets], mean_degree: float, classes: _PatternClasses
) -> np.ndarray:
    n = classes.n
    total = n * mean_degree / 2.0
    goal = np.empty(1 + 2 * classes.m)
    goal[0] = total
    sizes = np.array([members.size for members in classes.members], dtype=np.int64)
    z_counts = sizes @ classes.patterns
    for k, target in enumerate(attribute_targets):
        n1 = int(z_counts[k])
        if n1 < 1 or n1 > n - 1:
            raise InfeasibleTargetsError(
                f"attribute {target.name!r}: realized group sizes ({n1}, {n - n1}) are degenerate"
            )
        realized_p = n1 / n
        ratio = target.resolve_ratio(prevalence=realized_p)
        solution = solve_dyad_classes(
            NetworkTargets(
                node_count=n,
                prevalence=realized_p,
                mean_degree=mean_degree,
                diff_activity=target.diff_activity,
                homophily_ratio=ratio,
            )
        )
        goal[1 + 2 * k] = solution.e11 + solution.e00
        goal[2 + 2 * k] = 2.0 * solution.e11 + solution.e10
    return goal


def fit_dyad_model(
    attribute_targets,
    mean_degree: float,
    z: np.ndarray,
    tol: float = 1e-6,
    max_iter: int = 100,
) -> DyadModel:
    """Fit dyad-model coefficients so expected statistics hit their targets.

    Per-attribute moment targets (matched edges, group-1 edge ends) are
    derived from each attribute's realized group sizes in ``z`` combined
    with its target differential activity and homophily; the total edge
    target is ``n * mean_degree / 2``. Damped Newton iteration on the
    exponential-family moment map, with the analytic Jacobian
    ``sum_class count * pi * (1 - pi) * g g^T``.

    Args:
        attribute_targets: One :class:`AttributeTargets` per column of ``z``.
        mean_degree: Target average degree.
        z: Binary attribute matrix, shape (n, m).
        tol: Maximum relative moment residual accepted.
        max_iter: Newton iteration cap.

    Returns:
        Fitted :class:`DyadModel`.

    Raises:
        InfeasibleTargetsError: If any per-attribute moment solve fails.
        FitConvergenceError: If the residual tolerance is not met; carries
            the final residual vector.
    """
    attribute_targets = list(attribute_targets)
    z = np.asarray(z)
    if z.ndim == 1:
        z = z[:, None]
    if len(attribute_targets) != z.shape[1]:
        raise ValueError("need exactly one AttributeTargets per attribute column")
    classes = _PatternClasses(z)
    goal = _target_statistics(attribute_targets, mean_degree, classes)
    scale = np.maximum(np.abs(goal), 1.0)

    n = classes.n
    theta = np.zeros(1 + 2 * classes.m)
    density = min(max(mean_degree / (n - 1), 1e-12), 1.0 - 1e-9)
    theta[0] = log(density / (1.0 - density))

    def residual(vec: np.ndarray) -> np.ndarray:
        return classes.expected(vec) - goal

    res = residual(theta)
    best = np.max(np.abs(res) / scale)
    for _ in range(max_iter):
        if best <= tol:
            break
        pi = classes.probabilities(theta)
        weights = classes.dyad_counts * pi * (1.0 - pi)
        jacobian = classes.statistics.T @ (classes.statistics * weights[:, None])
        try:
            step = np.linalg.solve(jacobian, res)
        except np.linalg.LinAlgError as exc:
            raise FitConvergenceError(
                f"singular Jacobian at residual {best:.3g}", residuals=res
            ) from exc
        damping = 1.0
        for _ in range(20):
            candidate = theta - damping * step
            cand_res = residual(candidate)
            cand_norm = np.max(np.abs(cand_res) / scale)
            if cand_norm < best:
                theta, res, best = candidate, cand_res, cand_norm
                break
            damping *= 0.5
        else:
            raise FitConvergenceError(
                f"no descent found at residual {best:.3g}", residuals=res
            )
    if best > tol:
        raise FitConvergenceError(
            f"residual {best:.3g} above tolerance {tol} after {max_iter} iterations",
            residuals=res,
        )
    return DyadModel(theta=theta, covariate_names=tuple(t.name for t in attribute_targets))


def simulate_from_model(model: DyadModel, z: np.ndarray, rng: np.random.Generator) -> Graph:
    """Draw one network from a fitted dyad model given attributes ``z``.

    Each joint-pattern dyad class draws a binomial edge count at its tie
    probability, then places the edges on a uniform subset of the class
    dyads (exactly the independent-Bernoulli law).
    """
    z = np.asarray(z)
    if z.ndim == 1:
        z = z[:, None]
    classes = _PatternClasses(z)
    if 1 + 2 * classes.m != model.theta.size:
        raise ValueError("model and attribute matrix disagree on attribute count")
    pi = classes.probabilities(model.theta)
    src_parts = []
    dst_parts = []
    for a, b, count, prob in zip(classes.class_a, classes.class_b, classes.dyad_counts, pi):
        k = int(rng.binomial(int(count), prob))
        group_a = classes.members[a]
        group_b = None if a == b else classes.members[b]
        sa, sb = _sample_class_dyads(group_a, group_b, k, rng)
        src_parts.append(sa)
        dst_parts.append(sb)
    return Graph(classes.n, np.concatenate(src_parts), np.concatenate(dst_parts))
