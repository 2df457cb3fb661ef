"""Strict sectioned key/value config files and plan builders.

Format: ``[section]`` headers, ``key = value`` lines, ``#`` comment lines,
blank lines ignored. Unknown sections, unknown keys, and duplicate
sections/keys are hard errors so a typo in a sweep definition cannot
silently vanish. Covariates get one section each (``[covariate NAME]``)
plus an optional ``[correlations]`` section with ``NAME:NAME = r`` pairs.
"""

from __future__ import annotations

import numpy as np

from .covariates import CovariateSpec
from .errors import ConfigError
from .harness import EngageScenario, ExperimentPlan
from .netgen import AttributeTargets, GENERATION_MODES, NetworkTargets
from .sampler import SEED_SELECTION_MODES, SamplerConfig

__all__ = [
    "parse_config",
    "load_config",
    "serialize_config",
    "network_run_from_config",
    "sampler_config_from_config",
    "experiment_plan_from_config",
    "engage_scenario_from_config",
    "covariate_spec_from_config",
]

_SECTION_KEYS = {
    "network": {"n", "p", "mean_degree", "diff_activity", "homophily_r", "homophily_h", "mode"},
    "rds": {"seeds", "coupons", "sample_size", "seed_selection", "reseed"},
    "experiment": {"replicates", "seed", "fixed_network"},
    "engage": {"n", "mean_degree", "seeds", "coupons", "sample_size", "replicates", "seed", "mode"},
    "covgen": {"n", "seed"},
    "covariate": {"prevalence", "diff_activity", "homophily_r", "homophily_h"},
    # [correlations] keys are NAME:NAME pairs, validated against the covariates
}


def parse_config(text: str, source: str = "<config>") -> dict[str, dict[str, str]]:
    """Parse config text into ``{section: {key: value}}`` preserving order."""
    sections: dict[str, dict[str, str]] = {}
    current: str | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if not name:
                raise ConfigError(f"{source}:{lineno}: empty section name")
            if name in sections:
                raise ConfigError(f"{source}:{lineno}: duplicate section [{name}]")
            sections[name] = {}
            current = name
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value' or '[section]'")
        if current is None:
            raise ConfigError(f"{source}:{lineno}: key/value line before any [section]")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        if key in sections[current]:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r} in [{current}]")
        sections[current][key] = value
    return sections


def load_config(path) -> dict[str, dict[str, str]]:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), source=str(path))


def serialize_config(sections: dict[str, dict[str, str]]) -> str:
    """Render sections back into config text (used for run manifests)."""
    chunks = []
    for name, body in sections.items():
        lines = [f"[{name}]"]
        lines.extend(f"{key} = {value}" for key, value in body.items())
        chunks.append("\n".join(lines))
    return "\n\n".join(chunks) + "\n"


def _check_sections(cfg, required: set[str], optional: set[str], allow_covariates: bool, source: str):
    seen = set()
    for name in cfg:
        base = "covariate" if name.startswith("covariate ") else name
        if allow_covariates and base in ("covariate", "correlations"):
            continue
        if name not in required and name not in optional:
            raise ConfigError(f"{source}: unknown section [{name}] for this command")
        seen.add(name)
    missing = required - seen
    if missing:
        raise ConfigError(f"{source}: missing required section(s): {', '.join(sorted(missing))}")


def _check_keys(cfg, section: str, source: str, schema: str | None = None):
    known = _SECTION_KEYS[schema or section]
    for key in cfg[section]:
        if key not in known:
            raise ConfigError(
                f"{source}: unknown key {key!r} in [{section}] (known: {', '.join(sorted(known))})"
            )


def _get(cfg, section: str, key: str, source: str, default: str | None = None) -> str:
    body = cfg.get(section, {})
    if key not in body:
        if default is not None:
            return default
        raise ConfigError(f"{source}: missing key {key!r} in [{section}]")
    return body[key]


def _parse_scalar(value: str, kind, section: str, key: str, source: str):
    try:
        return kind(value)
    except ValueError:
        raise ConfigError(f"{source}: [{section}] {key} = {value!r} is not a valid {kind.__name__}")


def _parse_list(value: str, kind, section: str, key: str, source: str) -> list:
    parts = [part.strip() for part in value.split(",")]
    if any(not part for part in parts):
        raise ConfigError(f"{source}: [{section}] {key} has an empty list entry")
    return [_parse_scalar(part, kind, section, key, source) for part in parts]


def _parse_bool(value: str, section: str, key: str, source: str) -> bool:
    lowered = value.lower()
    if lowered in ("true", "yes", "1", "on"):
        return True
    if lowered in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"{source}: [{section}] {key} = {value!r} is not a boolean")


def _parse_choice(value: str, choices, section: str, key: str, source: str) -> str:
    if value not in choices:
        raise ConfigError(f"{source}: [{section}] {key} must be one of {', '.join(choices)}")
    return value


def _network_values(cfg, source: str, scalar: bool):
    _check_keys(cfg, "network", source)
    n = _parse_scalar(_get(cfg, "network", "n", source), int, "network", "n", source)
    mean_deg = _parse_scalar(
        _get(cfg, "network", "mean_degree", source), float, "network", "mean_degree", source
    )
    mode = _parse_choice(
        _get(cfg, "network", "mode", source, default="bernoulli"),
        GENERATION_MODES, "network", "mode", source,
    )
    has_r = "homophily_r" in cfg["network"]
    has_h = "homophily_h" in cfg["network"]
    if has_r == has_h:
        raise ConfigError(f"{source}: [network] needs exactly one of homophily_r or homophily_h")
    if scalar:
        p = _parse_scalar(_get(cfg, "network", "p", source), float, "network", "p", source)
        da = _parse_scalar(
            _get(cfg, "network", "diff_activity", source), float, "network", "diff_activity", source
        )
        if has_r:
            r = _parse_scalar(cfg["network"]["homophily_r"], float, "network", "homophily_r", source)
            targets = NetworkTargets(n, p, mean_deg, da, r)
        else:
            h = _parse_scalar(cfg["network"]["homophily_h"], float, "network", "homophily_h", source)
            targets = NetworkTargets.with_assortativity(n, p, mean_deg, da, h)
        return targets, mode
    if not has_r:
        raise ConfigError(
            f"{source}: sweeps are defined on the ratio scale; use homophily_r in [network]"
        )
    ps = _parse_list(_get(cfg, "network", "p", source), float, "network", "p", source)
    das = _parse_list(
        _get(cfg, "network", "diff_activity", source), float, "network", "diff_activity", source
    )
    rs = _parse_list(cfg["network"]["homophily_r"], float, "network", "homophily_r", source)
    return n, mean_deg, ps, das, rs, mode


def network_run_from_config(cfg, source: str = "<config>"):
    """[network] with scalar values -> (NetworkTargets, mode)."""
    _check_sections(cfg, {"network"}, set(), False, source)
    return _network_values(cfg, source, scalar=True)


def multi_network_run_from_config(cfg, source: str = "<config>"):
    """[network] (n, mean_degree, mode) + covariate sections -> generation inputs.

    Returns (node_count, mean_degree, mode, attribute targets tuple,
    correlation matrix). Used when a network is generated over several
    correlated attributes instead of a single one.
    """
    _check_sections(cfg, {"network"}, set(), True, source)
    allowed = {"n", "mean_degree", "mode"}
    for key in cfg["network"]:
        if key not in allowed:
            raise ConfigError(
                f"{source}: [network] key {key!r} not allowed with covariate sections "
                f"(use per-covariate blocks for targets)"
            )
    n = _parse_scalar(_get(cfg, "network", "n", source), int, "network", "n", source)
    mean_deg = _parse_scalar(
        _get(cfg, "network", "mean_degree", source), float, "network", "mean_degree", source
    )
    mode = _parse_choice(
        _get(cfg, "network", "mode", source, default="bernoulli"),
        GENERATION_MODES, "network", "mode", source,
    )
    if mode != "bernoulli":
        raise ConfigError(
            f"{source}: [network] mode {mode!r} applies to single-attribute generation only"
        )
    covs = _covariate_sections(cfg, source)
    targets = tuple(_attribute_targets(name, body, source) for name, body in covs)
    matrix = _correlation_matrix(cfg, [name for name, _ in covs], source)
    return n, mean_deg, mode, targets, matrix


def has_covariate_sections(cfg) -> bool:
    return any(section.startswith("covariate ") for section in cfg)


def sampler_config_from_config(cfg, source: str = "<config>") -> SamplerConfig:
    """[rds] with a scalar sample size -> SamplerConfig."""
    _check_sections(cfg, {"rds"}, set(), False, source)
    _check_keys(cfg, "rds", source)
    try:
        return SamplerConfig(
            num_seeds=_parse_scalar(_get(cfg, "rds", "seeds", source), int, "rds", "seeds", source),
            coupons_per_node=_parse_scalar(
                _get(cfg, "rds", "coupons", source), int, "rds", "coupons", source
            ),
            target_sample_size=_parse_scalar(
                _get(cfg, "rds", "sample_size", source), int, "rds", "sample_size", source
            ),
            seed_selection=_parse_choice(
                _get(cfg, "rds", "seed_selection", source, default="uniform"),
                SEED_SELECTION_MODES, "rds", "seed_selection", source,
            ),
            reseed_on_death=_parse_bool(
                _get(cfg, "rds", "reseed", source, default="true"), "rds", "reseed", source
            ),
        )
    except ValueError as exc:
        raise ConfigError(f"{source}: [rds] {exc}")


def experiment_plan_from_config(cfg, source: str = "<config>") -> ExperimentPlan:
    """[network] + [rds] + [experiment] -> ExperimentPlan."""
    _check_sections(cfg, {"network", "rds", "experiment"}, set(), False, source)
    _check_keys(cfg, "rds", source)
    _check_keys(cfg, "experiment", source)
    n, mean_deg, ps, das, rs, mode = _network_values(cfg, source, scalar=False)
    try:
        return ExperimentPlan(
            node_count=n,
            mean_degree=mean_deg,
            prevalences=tuple(ps),
            diff_activities=tuple(das),
            homophily_ratios=tuple(rs),
            sample_sizes=tuple(
                _parse_list(_get(cfg, "rds", "sample_size", source), int, "rds", "sample_size", source)
            ),
            num_seeds=_parse_scalar(_get(cfg, "rds", "seeds", source), int, "rds", "seeds", source),
            coupons_per_node=_parse_scalar(
                _get(cfg, "rds", "coupons", source), int, "rds", "coupons", source
            ),
            replicates=_parse_scalar(
                _get(cfg, "experiment", "replicates", source), int, "experiment", "replicates", source
            ),
            master_seed=_parse_scalar(
                _get(cfg, "experiment", "seed", source), int, "experiment", "seed", source
            ),
            mode=mode,
            seed_selection=_parse_choice(
                _get(cfg, "rds", "seed_selection", source, default="uniform"),
                SEED_SELECTION_MODES, "rds", "seed_selection", source,
            ),
            regenerate_network=not _parse_bool(
                _get(cfg, "experiment", "fixed_network", source, default="false"),
                "experiment", "fixed_network", source,
            ),
        )
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}")


def _covariate_sections(cfg, source: str) -> list[tuple[str, dict[str, str]]]:
    out = []
    for section, body in cfg.items():
        if section.startswith("covariate "):
            name = section[len("covariate "):].strip()
            if not name:
                raise ConfigError(f"{source}: covariate section needs a name: [covariate NAME]")
            _check_keys(cfg, section, source, schema="covariate")
            out.append((name, body))
    if not out:
        raise ConfigError(f"{source}: need at least one [covariate NAME] section")
    names = [name for name, _ in out]
    if len(set(names)) != len(names):
        raise ConfigError(f"{source}: duplicate covariate names")
    return out


def _require(body: dict[str, str], key: str, section: str, source: str) -> str:
    if key not in body:
        raise ConfigError(f"{source}: missing key {key!r} in [{section}]")
    return body[key]


def _attribute_targets(name: str, body: dict[str, str], source: str) -> AttributeTargets:
    section = f"covariate {name}"
    has_r = "homophily_r" in body
    has_h = "homophily_h" in body
    if has_r == has_h:
        raise ConfigError(f"{source}: [{section}] needs exactly one of homophily_r or homophily_h")
    prevalence = _parse_scalar(
        _require(body, "prevalence", section, source), float, section, "prevalence", source
    )
    diff_activity = _parse_scalar(
        _require(body, "diff_activity", section, source), float, section, "diff_activity", source
    )
    try:
        if has_r:
            ratio = _parse_scalar(body["homophily_r"], float, section, "homophily_r", source)
            return AttributeTargets(name, prevalence, diff_activity, homophily_ratio=ratio)
        h = _parse_scalar(body["homophily_h"], float, section, "homophily_h", source)
        return AttributeTargets(name, prevalence, diff_activity, assortativity=h)
    except ValueError as exc:
        raise ConfigError(f"{source}: [{section}] {exc}")


def _correlation_matrix(cfg, names: list[str], source: str) -> np.ndarray:
    matrix = np.eye(len(names))
    body = cfg.get("correlations", {})
    index = {name: i for i, name in enumerate(names)}
    seen: set[frozenset] = set()
    for key, value in body.items():
        left, sep, right = key.partition(":")
        left, right = left.strip(), right.strip()
        if not sep or left not in index or right not in index or left == right:
            raise ConfigError(
                f"{source}: [correlations] key {key!r} must be 'NAME:NAME' over distinct covariates"
            )
        pair = frozenset((left, right))
        if pair in seen:
            raise ConfigError(f"{source}: [correlations] duplicate pair {key!r}")
        seen.add(pair)
        r = _parse_scalar(value, float, "correlations", key, source)
        matrix[index[left], index[right]] = matrix[index[right], index[left]] = r
    return matrix


def covariate_spec_from_config(cfg, source: str = "<config>") -> tuple[CovariateSpec, int, int]:
    """Covariate sections (+ [covgen], [correlations]) -> (spec, n, seed)."""
    _check_sections(cfg, {"covgen"}, set(), True, source)
    _check_keys(cfg, "covgen", source)
    covs = _covariate_sections(cfg, source)
    names = [name for name, _ in covs]
    marginals = [
        _parse_scalar(
            _require(body, "prevalence", f"covariate {name}", source),
            float, f"covariate {name}", "prevalence", source,
        )
        for name, body in covs
    ]
    try:
        spec = CovariateSpec(tuple(names), np.array(marginals), _correlation_matrix(cfg, names, source))
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}")
    n = _parse_scalar(_get(cfg, "covgen", "n", source), int, "covgen", "n", source)
    seed = _parse_scalar(_get(cfg, "covgen", "seed", source, default="0"), int, "covgen", "seed", source)
    return spec, n, seed


def engage_scenario_from_config(cfg, source: str = "<config>") -> EngageScenario:
    """[engage] + covariate sections (+ [correlations]) -> EngageScenario."""
    _check_sections(cfg, {"engage"}, set(), True, source)
    _check_keys(cfg, "engage", source)
    covs = _covariate_sections(cfg, source)
    targets = tuple(_attribute_targets(name, body, source) for name, body in covs)
    matrix = _correlation_matrix(cfg, [name for name, _ in covs], source)
    try:
        return EngageScenario(
            node_count=_parse_scalar(_get(cfg, "engage", "n", source), int, "engage", "n", source),
            mean_degree=_parse_scalar(
                _get(cfg, "engage", "mean_degree", source), float, "engage", "mean_degree", source
            ),
            covariates=targets,
            correlations=tuple(tuple(row) for row in matrix),
            num_seeds=_parse_scalar(_get(cfg, "engage", "seeds", source), int, "engage", "seeds", source),
            coupons_per_node=_parse_scalar(
                _get(cfg, "engage", "coupons", source), int, "engage", "coupons", source
            ),
            sample_size=_parse_scalar(
                _get(cfg, "engage", "sample_size", source), int, "engage", "sample_size", source
            ),
            replicates=_parse_scalar(
                _get(cfg, "engage", "replicates", source), int, "engage", "replicates", source
            ),
            master_seed=_parse_scalar(
                _get(cfg, "engage", "seed", source), int, "engage", "seed", source
            ),
            mode=_parse_choice(
                _get(cfg, "engage", "mode", source, default="bernoulli"),
                GENERATION_MODES, "engage", "mode", source,
            ),
        )
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}")
