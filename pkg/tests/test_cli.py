"""Runner contracts: exit codes, artifact files, determinism, overrides.

End-to-end runs use shrunk grids (short wires, few points) so the whole
module stays fast; the full-size defaults are exercised by the
acceptance suite.
"""

import json

import pytest

from topobus import cli

# a cheap but non-trivial run: short wire, coarse Zeeman grid
FAST_FIG2A = ["--experiment", "fig2a", "--set", "length_nm=800",
              "--set", "h_min_mev=0.4", "--set", "h_max_mev=2.0",
              "--set", "h_points=17"]


def run_cli(args, tmp_path, sub="out"):
    out = tmp_path / sub
    code = cli.main(args + ["--out", str(out)])
    return code, out


class TestListing:
    def test_list_exits_clean(self, capsys):
        assert cli.main(["--list"]) == 0
        text = capsys.readouterr().out
        for name in ("fig2a", "fig2b", "fig2c", "fig3-mu", "fig3-phase",
                     "perturb-check", "bus-params", "rwa-check", "fig4",
                     "ghz", "fig5-n4", "fig5-n8"):
            assert name in text

    def test_listing_is_stable(self):
        assert cli.list_experiments() == cli.list_experiments()

    def test_long_running_flagged(self):
        assert "long-running" in cli.list_experiments().split("fig5-n8")[1]

    def test_registry_has_twelve_experiments(self):
        assert len(cli.EXPERIMENTS) == 12


class TestUsageErrors:
    def test_unknown_experiment_exits_2(self, tmp_path, capsys):
        code = cli.main(["--experiment", "nope", "--out", str(tmp_path)])
        assert code == 2
        assert "unknown experiment" in capsys.readouterr().err

    def test_unknown_override_key_exits_2(self, tmp_path, capsys):
        code = cli.main(["--experiment", "fig2a", "--set", "bogus=1",
                         "--out", str(tmp_path)])
        assert code == 2
        assert "unknown override" in capsys.readouterr().err

    def test_bad_override_value_exits_2(self, tmp_path, capsys):
        code = cli.main(["--experiment", "fig2a", "--set", "h_points=few",
                         "--out", str(tmp_path)])
        assert code == 2

    def test_malformed_set_exits_2(self, tmp_path):
        code = cli.main(["--experiment", "fig2a", "--set", "h_points",
                         "--out", str(tmp_path)])
        assert code == 2

    def test_missing_experiment_exits_2(self, tmp_path):
        assert cli.main(["--out", str(tmp_path)]) == 2

    def test_missing_out_exits_2(self):
        assert cli.main(["--experiment", "fig2a"]) == 2

    def test_missing_config_file_exits_2(self, tmp_path):
        code = cli.main(["--experiment", "fig2a", "--out", str(tmp_path),
                         "--config", str(tmp_path / "absent.toml")])
        assert code == 2

    def test_nested_config_rejected(self, tmp_path):
        cfg = tmp_path / "c.toml"
        cfg.write_text("[table]\nkey = 1\n")
        code = cli.main(["--experiment", "fig2a", "--out", str(tmp_path),
                         "--config", str(cfg)])
        assert code == 2


class TestEndToEnd:
    def test_artifact_files_and_exit_code(self, tmp_path):
        code, out = run_cli(FAST_FIG2A, tmp_path)
        assert code in (0, 1)  # shrunk grid may miss a threshold
        assert (out / "fig2a.csv").exists()
        assert (out / "manifest.json").exists()
        assert (out / "verdict.txt").exists()
        verdict = (out / "verdict.txt").read_text()
        assert verdict.rstrip().splitlines()[-1].startswith("VERDICT: ")

    def test_manifest_records_resolved_run(self, tmp_path):
        code, out = run_cli(FAST_FIG2A + ["--seed", "7"], tmp_path)
        m = json.loads((out / "manifest.json").read_text())
        assert m["experiment"] == "fig2a"
        assert m["parameters"]["length_nm"] == 800.0
        assert m["parameters"]["h_points"] == 17
        assert m["seed"] == 7
        assert m["library_version"]
        assert m["defaults_version"]
        assert m["wall_time_s"] >= 0.0
        assert "summary" in m

    def test_csv_is_crlf_with_header(self, tmp_path):
        _, out = run_cli(FAST_FIG2A, tmp_path)
        raw = (out / "fig2a.csv").read_bytes()
        assert raw.startswith(b"h_meV,eps1_meV,eps2_meV\r\n")
        assert raw.endswith(b"\r\n")
        assert b"\r\n" in raw and b"np.float64" not in raw

    def test_failing_threshold_exits_1(self, tmp_path):
        # a window that misses the transition puts h_c at the grid edge
        args = ["--experiment", "fig2a", "--set", "length_nm=800",
                "--set", "h_min_mev=1.3", "--set", "h_max_mev=1.7",
                "--set", "h_points=5"]
        code, out = run_cli(args, tmp_path)
        assert code == 1
        assert "FAIL" in (out / "verdict.txt").read_text()

    def test_reruns_are_byte_identical(self, tmp_path):
        args = ["--experiment", "fig3-mu", "--set", "length_nm=600",
                "--set", "n_realizations=3", "--set", "w_points=2",
                "--set", "w_min=0.1", "--set", "w_max=0.2", "--seed", "11"]
        _, out_a = run_cli(args, tmp_path, "a")
        _, out_b = run_cli(args, tmp_path, "b")
        assert (out_a / "fig3_mu.csv").read_bytes() == \
            (out_b / "fig3_mu.csv").read_bytes()

    def test_seed_changes_the_ensemble(self, tmp_path):
        args = ["--experiment", "fig3-mu", "--set", "length_nm=600",
                "--set", "n_realizations=3", "--set", "w_points=2",
                "--set", "w_min=0.1", "--set", "w_max=0.2"]
        _, out_a = run_cli(args + ["--seed", "1"], tmp_path, "a")
        _, out_b = run_cli(args + ["--seed", "2"], tmp_path, "b")
        assert (out_a / "fig3_mu.csv").read_bytes() != \
            (out_b / "fig3_mu.csv").read_bytes()

    def test_workers_do_not_change_bytes(self, tmp_path):
        args = ["--experiment", "fig3-mu", "--set", "length_nm=600",
                "--set", "n_realizations=4", "--set", "w_points=2",
                "--set", "w_min=0.1", "--set", "w_max=0.2", "--seed", "3"]
        _, out_a = run_cli(args + ["--workers", "1"], tmp_path, "a")
        _, out_b = run_cli(args + ["--workers", "2"], tmp_path, "b")
        assert (out_a / "fig3_mu.csv").read_bytes() == \
            (out_b / "fig3_mu.csv").read_bytes()


class TestConfigResolution:
    def test_config_file_supplies_everything(self, tmp_path):
        cfg = tmp_path / "c.toml"
        out = tmp_path / "out"
        cfg.write_text(
            'experiment = "fig2a"\n'
            f'out = "{out}"\n'
            "seed = 5\n"
            "length_nm = 800\n"
            "h_points = 9\n")
        assert cli.main(["--config", str(cfg)]) in (0, 1)
        m = json.loads((out / "manifest.json").read_text())
        assert m["parameters"]["h_points"] == 9
        assert m["seed"] == 5

    def test_cli_set_wins_over_config(self, tmp_path):
        cfg = tmp_path / "c.toml"
        cfg.write_text('experiment = "fig2a"\nlength_nm = 800\nh_points = 9\n')
        code, out = run_cli(["--config", str(cfg), "--set", "h_points=11"],
                            tmp_path)
        m = json.loads((out / "manifest.json").read_text())
        assert m["parameters"]["h_points"] == 11

    def test_int_knob_accepts_float_free_string(self, tmp_path):
        params = cli._resolve_params(cli.EXPERIMENTS["fig2a"],
                                     {"h_points": "21"})
        assert params["h_points"] == 21

    def test_float_knob_coerces_int(self):
        params = cli._resolve_params(cli.EXPERIMENTS["fig2a"],
                                     {"length_nm": 900})
        assert params["length_nm"] == 900.0
        assert isinstance(params["length_nm"], float)

    def test_unknown_key_raises(self):
        with pytest.raises(cli.UsageError):
            cli._resolve_params(cli.EXPERIMENTS["fig2a"], {"nope": 1})
