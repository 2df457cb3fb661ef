import numpy as np
import pytest

from rdsim import ConfigError
from rdsim.cli import main
from rdsim.config import (
    engage_scenario_from_config,
    experiment_plan_from_config,
    network_run_from_config,
    parse_config,
    sampler_config_from_config,
)

EXPERIMENT_CFG = """\
# sweep definition
[network]
n = 300
p = 0.5, 0.8
mean_degree = 10
diff_activity = 1, 4
homophily_r = 1
mode = bernoulli

[rds]
seeds = 3
coupons = 2
sample_size = 40, 60

[experiment]
replicates = 2
seed = 77
"""

ENGAGE_CFG = """\
[engage]
n = 1010
mean_degree = 10
seeds = 4
coupons = 3
sample_size = 80
replicates = 2
seed = 5

[covariate A]
prevalence = 0.5
diff_activity = 1.2
homophily_h = 0.1

[covariate B]
prevalence = 0.3
diff_activity = 0.9
homophily_r = 0.5

[correlations]
A:B = 0.08
"""

FIG_NETWORK_CFG = """\
[network]
n = 12
p = 0.33
mean_degree = 2.16
diff_activity = 1.16
homophily_r = 0.40
"""


class TestParser:
    def test_comments_blanks_and_order(self):
        cfg = parse_config("# top\n\n[a]\nx = 1\n# mid\ny = 2\n\n[b]\nz = 3\n")
        assert list(cfg) == ["a", "b"]
        assert cfg["a"] == {"x": "1", "y": "2"}

    def test_duplicate_key_rejected(self):
        with pytest.raises(ConfigError, match="duplicate key"):
            parse_config("[a]\nx = 1\nx = 2\n")

    def test_duplicate_section_rejected(self):
        with pytest.raises(ConfigError, match="duplicate section"):
            parse_config("[a]\nx = 1\n[a]\ny = 2\n")

    def test_key_before_section_rejected(self):
        with pytest.raises(ConfigError, match="before any"):
            parse_config("x = 1\n[a]\n")

    def test_garbage_line_rejected(self):
        with pytest.raises(ConfigError, match="expected"):
            parse_config("[a]\nnot a key value\n")


class TestSchemas:
    def test_unknown_key_is_hard_error(self):
        text = EXPERIMENT_CFG.replace("mode = bernoulli", "moed = bernoulli")
        with pytest.raises(ConfigError, match="unknown key 'moed'"):
            experiment_plan_from_config(parse_config(text))

    def test_unknown_section_is_hard_error(self):
        with pytest.raises(ConfigError, match="unknown section"):
            experiment_plan_from_config(parse_config(EXPERIMENT_CFG + "\n[extra]\nx = 1\n"))

    def test_missing_section(self):
        with pytest.raises(ConfigError, match="missing required section"):
            experiment_plan_from_config(parse_config("[network]\nn = 10\n"))

    def test_homophily_exactly_one_scale(self):
        text = FIG_NETWORK_CFG + "homophily_h = -0.2\n"
        with pytest.raises(ConfigError, match="exactly one"):
            network_run_from_config(parse_config(text))

    def test_experiment_plan_values(self):
        plan = experiment_plan_from_config(parse_config(EXPERIMENT_CFG))
        assert plan.node_count == 300
        assert plan.prevalences == (0.5, 0.8)
        assert plan.diff_activities == (1.0, 4.0)
        assert plan.homophily_ratios == (1.0,)
        assert plan.sample_sizes == (40, 60)
        assert plan.replicates == 2
        assert plan.master_seed == 77
        assert plan.regenerate_network

    def test_sweep_requires_ratio_scale(self):
        text = EXPERIMENT_CFG.replace("homophily_r = 1", "homophily_h = 0.1")
        with pytest.raises(ConfigError, match="ratio scale"):
            experiment_plan_from_config(parse_config(text))

    def test_network_scalar_values(self):
        targets, mode = network_run_from_config(parse_config(FIG_NETWORK_CFG))
        assert targets.node_count == 12
        assert targets.homophily_ratio == 0.40
        assert mode == "bernoulli"

    def test_sampler_config(self):
        cfg = parse_config("[rds]\nseeds = 2\ncoupons = 3\nsample_size = 10\nreseed = false\n")
        sampler = sampler_config_from_config(cfg)
        assert sampler.num_seeds == 2
        assert not sampler.reseed_on_death

    def test_engage_scenario(self):
        scenario = engage_scenario_from_config(parse_config(ENGAGE_CFG))
        assert scenario.covariate_names == ("A", "B")
        assert scenario.correlations[0][1] == 0.08
        assert scenario.covariates[0].assortativity == 0.1
        assert scenario.covariates[1].homophily_ratio == 0.5

    def test_correlation_key_validation(self):
        bad = ENGAGE_CFG.replace("A:B = 0.08", "A:C = 0.08")
        with pytest.raises(ConfigError, match="NAME:NAME"):
            engage_scenario_from_config(parse_config(bad))
        dup = ENGAGE_CFG.replace("A:B = 0.08", "A:B = 0.08\nB:A = 0.08")
        with pytest.raises(ConfigError, match="duplicate pair"):
            engage_scenario_from_config(parse_config(dup))


class TestCliNetgen:
    def test_fig_style_run_writes_artifacts(self, tmp_path, capsys):
        cfg = tmp_path / "net.cfg"
        cfg.write_text(FIG_NETWORK_CFG)
        out = tmp_path / "out"
        code = main(["netgen", "--config", str(cfg), "--out", str(out), "--seed", "3"])
        assert code == 0
        assert (out / "edges.csv").exists()
        assert (out / "attributes.csv").exists()
        manifest = (out / "manifest.txt").read_text()
        assert "command = netgen" in manifest
        assert "master-seed = 3" in manifest
        assert "homophily_r = 0.40" in manifest
        printed = capsys.readouterr().out
        assert "mean_degree=" in printed and "prevalence=" in printed

    def test_infeasible_targets_fail_naming_bound(self, tmp_path, capsys):
        cfg = tmp_path / "net.cfg"
        cfg.write_text(
            "[network]\nn = 100\np = 0.8\nmean_degree = 10\ndiff_activity = 4\nhomophily_r = 1\n"
        )
        code = main(["netgen", "--config", str(cfg), "--out", str(tmp_path / "o")])
        assert code == 1
        assert "e00" in capsys.readouterr().err

    def test_config_error_exit_code(self, tmp_path, capsys):
        cfg = tmp_path / "net.cfg"
        cfg.write_text("[network]\nn = 12\nbogus = 1\n")
        code = main(["netgen", "--config", str(cfg), "--out", str(tmp_path / "o")])
        assert code == 2
        assert "unknown key" in capsys.readouterr().err

    def test_multi_attribute_generation(self, tmp_path, capsys):
        cfg = tmp_path / "multi.cfg"
        cfg.write_text(
            "[network]\nn = 600\nmean_degree = 8\n\n"
            "[covariate A]\nprevalence = 0.5\ndiff_activity = 1.2\nhomophily_h = 0.1\n\n"
            "[covariate B]\nprevalence = 0.3\ndiff_activity = 0.9\nhomophily_r = 0.5\n\n"
            "[correlations]\nA:B = 0.1\n"
        )
        out = tmp_path / "out"
        assert main(["netgen", "--config", str(cfg), "--out", str(out), "--seed", "6"]) == 0
        attrs = (out / "attributes.csv").read_text().splitlines()
        assert attrs[0] == "node,A,B"
        assert len(attrs) == 601
        printed = capsys.readouterr().out
        assert "A: " in printed and "B: " in printed

    def test_multi_attribute_rejects_single_target_keys(self, tmp_path, capsys):
        cfg = tmp_path / "multi.cfg"
        cfg.write_text(
            "[network]\nn = 100\nmean_degree = 5\np = 0.5\n\n"
            "[covariate A]\nprevalence = 0.5\ndiff_activity = 1.0\nhomophily_r = 1\n"
        )
        assert main(["netgen", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
        assert "not allowed with covariate sections" in capsys.readouterr().err

    def test_quiet_flag(self, tmp_path, capsys):
        cfg = tmp_path / "net.cfg"
        cfg.write_text(FIG_NETWORK_CFG)
        code = main(["netgen", "--config", str(cfg), "--out", str(tmp_path / "o"), "--quiet"])
        assert code == 0
        assert capsys.readouterr().out == ""


class TestCliPipeline:
    def test_rds_then_estimate(self, tmp_path, capsys):
        net_cfg = tmp_path / "net.cfg"
        net_cfg.write_text(
            "[network]\nn = 60\np = 0.5\nmean_degree = 6\ndiff_activity = 1\nhomophily_r = 1\n"
        )
        net_out = tmp_path / "net"
        assert main(["netgen", "--config", str(net_cfg), "--out", str(net_out), "--seed", "1"]) == 0

        rds_cfg = tmp_path / "rds.cfg"
        rds_cfg.write_text("[rds]\nseeds = 2\ncoupons = 2\nsample_size = 30\n")
        rds_out = tmp_path / "rds"
        assert (
            main(
                [
                    "rds",
                    "--config", str(rds_cfg),
                    "--edges", str(net_out / "edges.csv"),
                    "--attributes", str(net_out / "attributes.csv"),
                    "--out", str(rds_out),
                    "--seed", "2",
                ]
            )
            == 0
        )
        assert (rds_out / "forest.csv").exists()

        est_out = tmp_path / "est"
        assert (
            main(
                [
                    "estimate",
                    "--forest", str(rds_out / "forest.csv"),
                    "--edges", str(net_out / "edges.csv"),
                    "--out", str(est_out),
                ]
            )
            == 0
        )
        text = (est_out / "estimates.csv").read_text().splitlines()
        assert text[0].startswith("forest,sample_size,max_wave,est_diff_activity_z")
        assert "est_induced_homophily_z" in text[0]

    def test_estimate_equal_degrees_rds2_equals_crude(self, tmp_path):
        # a 6-cycle: every degree is 2, so the weighting cancels
        edges = "src,dst\n0,1\n1,2\n2,3\n3,4\n4,5\n0,5\n"
        attrs = "node,z\n0,1\n1,0\n2,1\n3,0\n4,1\n5,0\n"
        (tmp_path / "edges.csv").write_text(edges)
        (tmp_path / "attributes.csv").write_text(attrs)
        rds_cfg = tmp_path / "rds.cfg"
        rds_cfg.write_text("[rds]\nseeds = 1\ncoupons = 2\nsample_size = 4\n")
        rds_out = tmp_path / "rds"
        assert (
            main(
                [
                    "rds",
                    "--config", str(rds_cfg),
                    "--edges", str(tmp_path / "edges.csv"),
                    "--attributes", str(tmp_path / "attributes.csv"),
                    "--out", str(rds_out),
                    "--seed", "9",
                ]
            )
            == 0
        )
        est_out = tmp_path / "est"
        assert main(["estimate", "--forest", str(rds_out / "forest.csv"), "--out", str(est_out)]) == 0
        import csv as csv_mod

        with open(est_out / "estimates.csv", newline="") as fh:
            row = next(csv_mod.DictReader(fh))
        assert float(row["est_rds2_prevalence_z"]) == float(row["est_crude_prevalence_z"])


class TestCliExperiment:
    def test_same_seed_same_bytes_across_threads(self, tmp_path):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text(EXPERIMENT_CFG)
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        assert main(["experiment", "--config", str(cfg), "--out", str(out_a), "--threads", "1"]) == 0
        assert main(["experiment", "--config", str(cfg), "--out", str(out_b), "--threads", "2"]) == 0
        for name in ("replicates.csv", "summary.csv"):
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()

    def test_seed_override_changes_outputs_and_manifest(self, tmp_path):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text(EXPERIMENT_CFG)
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        assert main(["experiment", "--config", str(cfg), "--out", str(out_a)]) == 0
        assert main(["experiment", "--config", str(cfg), "--out", str(out_b), "--seed", "78"]) == 0
        assert (out_a / "replicates.csv").read_bytes() != (out_b / "replicates.csv").read_bytes()
        assert "master-seed = 78" in (out_b / "manifest.txt").read_text()
        assert "seed = 78" in (out_b / "manifest.txt").read_text()

    def test_desk_scale_flag(self, tmp_path, capsys):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text(EXPERIMENT_CFG.replace("mean_degree = 10", "mean_degree = 99.9"))
        out = tmp_path / "desk"
        assert main(["experiment", "--config", str(cfg), "--out", str(out), "--desk-scale"]) == 0
        manifest = (out / "manifest.txt").read_text()
        assert "mean_degree = 20" in manifest

    def test_skipped_cells_warn_but_exit_zero(self, tmp_path, capsys):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text(EXPERIMENT_CFG)
        out = tmp_path / "out"
        code = main(["experiment", "--config", str(cfg), "--out", str(out)])
        assert code == 0
        err = capsys.readouterr().err
        assert "skipped" in err  # the p=0.8/Da=4 and related cells


class TestCliEngage:
    def test_desk_scale_and_manifest(self, tmp_path):
        cfg = tmp_path / "engage.cfg"
        cfg.write_text(ENGAGE_CFG.replace("n = 1010", "n = 10100").replace("sample_size = 80", "sample_size = 800"))
        out = tmp_path / "out"
        code = main(["engage-mimic", "--config", str(cfg), "--out", str(out), "--desk-scale"])
        assert code == 0
        manifest = (out / "manifest.txt").read_text()
        assert "n = 1010" in manifest
        assert "sample_size = 80" in manifest
        assert (out / "replicates.csv").exists()
        assert (out / "summary.csv").exists()


class TestCliCovgen:
    def test_writes_attributes(self, tmp_path, capsys):
        cfg = tmp_path / "cov.cfg"
        cfg.write_text(
            "[covgen]\nn = 2000\nseed = 4\n\n"
            "[covariate left]\nprevalence = 0.3\ndiff_activity = 1.0\nhomophily_r = 1\n\n"
            "[covariate right]\nprevalence = 0.7\ndiff_activity = 1.0\nhomophily_r = 1\n\n"
            "[correlations]\nleft:right = 0.2\n"
        )
        out = tmp_path / "out"
        assert main(["covgen", "--config", str(cfg), "--out", str(out)]) == 0
        lines = (out / "attributes.csv").read_text().splitlines()
        assert lines[0] == "node,left,right"
        assert len(lines) == 2001
        values = np.array([[int(v) for v in line.split(",")[1:]] for line in lines[1:]])
        assert abs(values[:, 0].mean() - 0.3) < 0.05
        assert abs(values[:, 1].mean() - 0.7) < 0.05
