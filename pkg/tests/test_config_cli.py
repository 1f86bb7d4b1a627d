"""Tests for config parsing, CSV round-trips and the command-line interface."""

import json

import numpy as np
import pytest

from pboxpce.cdfs import SteppedCDF
from pboxpce.cli import main, read_cdf_table, run_experiment, write_cdf_table
from pboxpce.config import load_config, parse_config
from pboxpce.errors import ConfigError, ParseFailure
from pboxpce.propagation import ResponsePBox

from conftest import load_bundled_config


def _minimal_config(**overrides):
    obj = {
        "model": {"kind": "linear"},
        "inputs": [
            {"kind": "mixture", "intervals": [[0.0, 1.0, 0.5], [0.5, 2.0, 0.5]]}
        ],
        "method": "slicing",
        "propagation": {"n_slices": 2},
        "optimizer": {"method": "corners"},
    }
    obj.update(overrides)
    return obj


class TestParseConfig:
    def test_minimal_valid(self):
        cfg = parse_config(_minimal_config(), name="demo")
        assert cfg.method == "slicing"
        assert cfg.propagation.n_slices == 2
        assert cfg.optimizer.method == "corners"
        assert cfg.name == "demo"
        assert len(cfg.build_inputs()) == 1
        assert cfg.build_model().dimension == 1

    def test_unknown_top_level_key(self):
        with pytest.raises(ConfigError, match="unknown key"):
            parse_config(_minimal_config(modle={"kind": "linear"}))

    def test_unknown_nested_key(self):
        with pytest.raises(ConfigError, match="unknown key"):
            parse_config(_minimal_config(propagation={"n_slice": 2}))

    def test_missing_required(self):
        obj = _minimal_config()
        del obj["method"]
        with pytest.raises(ConfigError, match="method"):
            parse_config(obj)

    def test_bad_method(self):
        with pytest.raises(ConfigError, match="method"):
            parse_config(_minimal_config(method="magic"))

    def test_dimension_mismatch(self):
        obj = _minimal_config(model={"kind": "rosenbrock"})
        with pytest.raises(ConfigError, match="needs 2 inputs"):
            parse_config(obj)

    def test_invalid_input_pbox_reported(self):
        obj = _minimal_config(
            inputs=[{"kind": "mixture", "intervals": [[1.0, 0.0, 1.0]]}]
        )
        cfg = parse_config(obj)
        with pytest.raises(ConfigError, match="p-box"):
            cfg.build_inputs()

    def test_comment_keys_allowed(self):
        obj = _minimal_config(comment="top level")
        obj["model"]["comment"] = "model note"
        obj["propagation"]["comment"] = "prop note"
        parse_config(obj)

    def test_replications_validated(self):
        with pytest.raises(ConfigError, match="replications"):
            parse_config(_minimal_config(replications=0))

    def test_load_config_errors(self, tmp_path):
        missing = tmp_path / "missing.json"
        with pytest.raises(ConfigError, match="cannot read"):
            load_config(missing)
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        with pytest.raises(ConfigError, match="valid JSON"):
            load_config(bad)

    @pytest.mark.parametrize(
        "name",
        [
            "linear_slicing.json",
            "rosenbrock_case1.json",
            "rosenbrock_case2.json",
            "oscillator_two_level.json",
            "oscillator_slicing.json",
            "truss_two_level.json",
        ],
    )
    def test_bundled_configs_parse(self, name):
        cfg = parse_config(load_bundled_config(name), name=name)
        assert cfg.build_model().dimension == len(cfg.build_inputs())


class TestCdfTableRoundtrip:
    def _response(self):
        upper = SteppedCDF.from_samples([1.0, 2.0, 3.0], [0.2, 0.5, 0.3])
        lower = SteppedCDF.from_samples([2.5, 4.0], [0.6, 0.4])
        return ResponsePBox(lower, upper)

    def test_roundtrip_bitwise(self, tmp_path):
        resp = self._response()
        path = tmp_path / "table.csv"
        write_cdf_table(path, resp)
        clone = read_cdf_table(path)
        grid = np.union1d(resp.lower.xs, resp.upper.xs)
        assert np.array_equal(clone.lower.evaluate(grid), resp.lower.evaluate(grid))
        assert np.array_equal(clone.upper.evaluate(grid), resp.upper.evaluate(grid))

    def test_header_checked(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(ParseFailure, match="columns"):
            read_cdf_table(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ParseFailure, match="no such"):
            read_cdf_table(tmp_path / "nope.csv")


class TestRunExperiment:
    def test_emits_expected_artifacts(self, tmp_path):
        cfg = parse_config(_minimal_config(replications=2), name="demo")
        summary, paths = run_experiment(cfg, out_dir=str(tmp_path))
        names = sorted(p.split("/")[-1] for p in paths)
        assert names == [
            "demo_rep0.csv",
            "demo_rep0.json",
            "demo_rep1.csv",
            "demo_rep1.json",
            "demo_summary.json",
        ]
        assert summary["replications"] == 2
        assert summary["area_median"] > 0
        with open(tmp_path / "demo_summary.json") as fh:
            on_disk = json.load(fh)
        assert on_disk["area_median"] == summary["area_median"]

    def test_outputs_deterministic(self, tmp_path):
        cfg = parse_config(_minimal_config(), name="det")
        run_experiment(cfg, out_dir=str(tmp_path / "a"))
        run_experiment(cfg, out_dir=str(tmp_path / "b"))
        for name in ("det_rep0.csv", "det_rep0.json", "det_summary.json"):
            assert (tmp_path / "a" / name).read_bytes() == (
                tmp_path / "b" / name
            ).read_bytes()


class TestCliMain:
    def test_run_and_compare(self, tmp_path, capsys):
        cfg_path = tmp_path / "exp.json"
        cfg_path.write_text(json.dumps(_minimal_config()))
        out = tmp_path / "out"
        assert main(["run", str(cfg_path), "--out", str(out)]) == 0
        captured = capsys.readouterr()
        assert "replication 0" in captured.out
        table = out / "exp_rep0.csv"
        assert table.exists()
        assert main(["compare", str(table), str(table)]) == 0
        result = json.loads(capsys.readouterr().out)
        assert result["ks_total"] == 0.0
        assert result["area_ratio"] == pytest.approx(1.0)

    def test_seed_and_replication_overrides(self, tmp_path):
        cfg_path = tmp_path / "exp.json"
        cfg_path.write_text(json.dumps(_minimal_config()))
        out = tmp_path / "out"
        assert main(
            ["run", str(cfg_path), "--out", str(out), "--seed", "5",
             "--replications", "2"]
        ) == 0
        assert (out / "exp_rep1.csv").exists()
        with open(out / "exp_summary.json") as fh:
            assert json.load(fh)["base_seed"] == 5

    def test_error_reported_as_exit_code(self, tmp_path, capsys):
        missing = tmp_path / "missing.json"
        assert main(["run", str(missing)]) == 1
        assert "error:" in capsys.readouterr().err

    def test_compare_bad_table(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("x\n")
        assert main(["compare", str(bad), str(bad)]) == 1
