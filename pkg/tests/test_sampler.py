import numpy as np
import pytest

from rdsim import (
    Graph,
    RecruitmentForest,
    SamplerConfig,
    read_forest,
    run_rds,
    select_seeds,
    write_forest,
)
from conftest import complete_graph, path_graph, random_graph, star_graph


def forest_invariants(forest: RecruitmentForest, graph: Graph, config: SamplerConfig):
    """Assert every structural invariant of a recruitment forest."""
    nodes = forest.nodes
    assert np.unique(nodes).size == nodes.size, "a node was sampled twice"
    assert forest.size <= config.target_sample_size

    edge_set = set(zip(graph.src.tolist(), graph.dst.tolist()))
    wave_of = dict(zip(nodes.tolist(), forest.waves.tolist()))
    seed_of = dict(zip(nodes.tolist(), forest.seed_ids.tolist()))
    recruits_per_node: dict[int, int] = {}
    for i in range(forest.size):
        node = int(forest.nodes[i])
        recruiter = int(forest.recruiters[i])
        wave = int(forest.waves[i])
        assert forest.degrees[i] == graph.degrees[node]
        if recruiter < 0:
            assert wave == 0
            assert forest.coupon_indices[i] == -1
        else:
            pair = (min(recruiter, node), max(recruiter, node))
            assert pair in edge_set, "recruitment crossed a non-edge"
            assert wave == wave_of[recruiter] + 1
            assert seed_of[node] == seed_of[recruiter]
            assert 0 <= forest.coupon_indices[i] < config.coupons_per_node
            recruits_per_node[recruiter] = recruits_per_node.get(recruiter, 0) + 1
    assert all(count <= config.coupons_per_node for count in recruits_per_node.values())


class TestSelectSeeds:
    def test_all_nodes_any_mode(self):
        graph = star_graph(4)
        for mode in ("uniform", "degree"):
            config = SamplerConfig(5, 2, 5, seed_selection=mode)
            seeds = select_seeds(graph, config, np.random.default_rng(0))
            assert sorted(seeds.tolist()) == [0, 1, 2, 3, 4]

    def test_uniform_frequencies(self):
        graph = path_graph(10)
        config = SamplerConfig(1, 2, 5)
        rng = np.random.default_rng(42)
        hits = np.zeros(10)
        draws = 100_000
        for _ in range(draws):
            hits[select_seeds(graph, config, rng)[0]] += 1
        assert np.all(np.abs(hits / draws - 0.1) <= 0.01)

    def test_degree_proportional_star(self):
        graph = star_graph(4)  # center degree 4, leaves degree 1
        config = SamplerConfig(1, 2, 5, seed_selection="degree")
        rng = np.random.default_rng(43)
        center = 0
        draws = 100_000
        for _ in range(draws):
            center += select_seeds(graph, config, rng)[0] == 0
        assert center / draws == pytest.approx(0.5, abs=0.01)

    def test_too_many_seeds(self):
        with pytest.raises(ValueError):
            select_seeds(path_graph(3), SamplerConfig(4, 1, 4), np.random.default_rng(0))


class TestRunRds:
    def test_star_center_seed(self):
        graph = star_graph(4)
        z = np.zeros(5, dtype=np.int8)
        config = SamplerConfig(1, 2, 3)
        forest = run_rds(graph, z, config, np.random.default_rng(1), seeds=[0])
        assert forest.size == 3
        assert forest.max_wave == 1
        recruiters, recruits = forest.recruitment_edges()
        assert recruiters.tolist() == [0, 0]
        assert set(recruits.tolist()) <= {1, 2, 3, 4}

    def test_forced_chain_on_path(self):
        graph = path_graph(8)
        z = np.zeros(8, dtype=np.int8)
        config = SamplerConfig(1, 2, 8)
        forest = run_rds(graph, z, config, np.random.default_rng(2), seeds=[0])
        assert forest.nodes.tolist() == list(range(8))
        assert forest.waves.tolist() == list(range(8))
        assert forest.max_wave == 7

    def test_capacity_bound_on_waves(self):
        # one seed and two coupons cannot reach 8 nodes in fewer than 3 waves
        graph = complete_graph(8)
        z = np.zeros(8, dtype=np.int8)
        config = SamplerConfig(1, 2, 8)
        forest = run_rds(graph, z, config, np.random.default_rng(3), seeds=[0])
        assert forest.size == 8
        assert forest.max_wave >= 3

    def test_invariants_random(self):
        rng = np.random.default_rng(7)
        for trial in range(40):
            n = int(rng.integers(6, 30))
            graph, edges, z = random_graph(n, float(rng.uniform(0.1, 0.6)), rng)
            config = SamplerConfig(
                num_seeds=int(rng.integers(1, 4)),
                coupons_per_node=int(rng.integers(1, 4)),
                target_sample_size=int(rng.integers(4, n + 1)),
                reseed_on_death=bool(rng.integers(0, 2)),
            )
            if config.target_sample_size < config.num_seeds:
                continue
            forest = run_rds(graph, z, config, rng)
            forest_invariants(forest, graph, config)
            if config.reseed_on_death:
                assert forest.size == config.target_sample_size
                assert not forest.truncated
            else:
                assert forest.truncated == (forest.size < config.target_sample_size)

    def test_unbounded_coupons_is_breadth_first(self):
        rng = np.random.default_rng(11)
        graph = complete_graph(3)  # placeholder replaced below
        # build a connected random graph
        while True:
            graph, edges, _ = random_graph(14, 0.25, rng)
            # connectivity check by BFS from 0
            seen = {0}
            frontier = [0]
            while frontier:
                nxt = []
                for v in frontier:
                    for u in graph.neighbors(v).tolist():
                        if u not in seen:
                            seen.add(u)
                            nxt.append(u)
                frontier = nxt
            if len(seen) == 14:
                break
        z = np.zeros(14, dtype=np.int8)
        config = SamplerConfig(1, 14, 10)
        forest = run_rds(graph, z, config, np.random.default_rng(5), seeds=[0])
        # independent BFS distances from node 0
        dist = {0: 0}
        frontier = [0]
        while frontier:
            nxt = []
            for v in frontier:
                for u in graph.neighbors(v).tolist():
                    if u not in dist:
                        dist[u] = dist[v] + 1
                        nxt.append(u)
            frontier = nxt
        for node, wave in zip(forest.nodes.tolist(), forest.waves.tolist()):
            assert wave == dist[node]
        # prefix property: every node strictly closer than the deepest sampled wave is sampled
        max_wave = forest.max_wave
        sampled = set(forest.nodes.tolist())
        for node, d in dist.items():
            if d < max_wave:
                assert node in sampled

    def test_determinism(self):
        rng_graph = np.random.default_rng(13)
        graph, _, z = random_graph(25, 0.3, rng_graph)
        config = SamplerConfig(2, 2, 15)
        a = run_rds(graph, z, config, np.random.default_rng(99))
        b = run_rds(graph, z, config, np.random.default_rng(99))
        assert a.nodes.tolist() == b.nodes.tolist()
        assert a.recruiters.tolist() == b.recruiters.tolist()
        assert a.waves.tolist() == b.waves.tolist()
        assert a.coupon_indices.tolist() == b.coupon_indices.tolist()

    def test_reseeding_crosses_components(self):
        # two disjoint triangles: a single seed can reach at most 3 nodes
        edges = [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)]
        graph = Graph(6, [e[0] for e in edges], [e[1] for e in edges])
        z = np.zeros(6, dtype=np.int8)
        config = SamplerConfig(1, 2, 6, reseed_on_death=True)
        forest = run_rds(graph, z, config, np.random.default_rng(21), seeds=[0])
        assert forest.size == 6
        assert forest.reseed_count >= 1
        reseed_rows = np.flatnonzero(forest.recruiters < 0)
        assert np.all(forest.waves[reseed_rows] == 0)
        assert np.unique(forest.seed_ids[reseed_rows]).size == reseed_rows.size

    def test_truncation_without_reseeding(self):
        edges = [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)]
        graph = Graph(6, [e[0] for e in edges], [e[1] for e in edges])
        z = np.zeros(6, dtype=np.int8)
        config = SamplerConfig(1, 2, 6, reseed_on_death=False)
        forest = run_rds(graph, z, config, np.random.default_rng(22), seeds=[0])
        assert forest.truncated
        assert forest.size == 3

    def test_sample_size_validation(self):
        graph = path_graph(4)
        config = SamplerConfig(1, 2, 5)
        with pytest.raises(ValueError, match="exceeds"):
            run_rds(graph, np.zeros(4, dtype=np.int8), config, np.random.default_rng(0))

    def test_multi_attribute_columns(self):
        graph = complete_graph(6)
        z = np.array([[1, 0], [0, 1], [1, 1], [0, 0], [1, 0], [0, 1]], dtype=np.int8)
        config = SamplerConfig(1, 3, 6)
        forest = run_rds(graph, z, config, np.random.default_rng(31), ("first", "second"))
        assert forest.attribute_names == ("first", "second")
        for i, node in enumerate(forest.nodes.tolist()):
            assert forest.attributes[i].tolist() == z[node].tolist()


class TestForestFile:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(17)
        graph, _, z = random_graph(20, 0.3, rng)
        config = SamplerConfig(2, 2, 12)
        forest = run_rds(graph, z, config, rng)
        path = tmp_path / "forest.csv"
        write_forest(forest, path)
        header = path.read_text().splitlines()[0]
        assert header == "node,recruiter,wave,seed_id,coupon_index,degree,z"
        back = read_forest(path)
        for field in ("nodes", "recruiters", "waves", "seed_ids", "coupon_indices", "degrees"):
            assert getattr(back, field).tolist() == getattr(forest, field).tolist()
        assert np.array_equal(back.attributes, forest.attributes)

    def test_seed_cells_empty(self, tmp_path):
        graph = star_graph(3)
        config = SamplerConfig(1, 2, 3)
        forest = run_rds(graph, np.zeros(4, dtype=np.int8), config, np.random.default_rng(3), seeds=[0])
        path = tmp_path / "forest.csv"
        write_forest(forest, path)
        seed_line = path.read_text().splitlines()[1]
        fields = seed_line.split(",")
        assert fields[0] == "0"
        assert fields[1] == ""  # recruiter
        assert fields[4] == ""  # coupon index

    def test_bad_header(self, tmp_path):
        path = tmp_path / "forest.csv"
        path.write_text("node,wave\n0,0\n")
        with pytest.raises(ValueError, match="header"):
            read_forest(path)
