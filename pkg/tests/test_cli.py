import json

import numpy as np
import pytest

import rkhslab as rl
from rkhslab.cli import main
from rkhslab.config import build_objects, load_config, parse_config
from rkhslab.io import save_function_csv


def write_config(tmp_path, doc, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


def indicator_config(n=120, trials=20, seed=7):
    return {
        "grids": {
            "E": {"interval": [0.0, 1.0], "n": n, "rule": "midpoint"},
            "T": {"interval": [0.0, 1.0], "n": n, "rule": "midpoint"},
        },
        "source": {"feature_family": {"family": "indicator"}},
        "trials": trials,
        "seed": seed,
    }


class TestConfigParsing:
    def test_two_sources_rejected_with_names(self):
        doc = indicator_config()
        doc["source"]["kernel"] = {"name": "brownian"}
        with pytest.raises(rl.ConfigError) as err:
            parse_config(doc)
        assert "kernel" in str(err.value) and "feature_family" in str(err.value)

    def test_no_source_rejected(self):
        doc = indicator_config()
        doc["source"] = {}
        with pytest.raises(rl.ConfigError, match="exactly one"):
            parse_config(doc)

    def test_tolerance_range_enforced(self):
        doc = indicator_config()
        doc["tolerances"] = {"cutoff_rel": 2.0}
        with pytest.raises(rl.ConfigError, match="cutoff_rel"):
            parse_config(doc)

    def test_unknown_fields_named(self):
        doc = indicator_config()
        doc["grdis"] = {}
        with pytest.raises(rl.ConfigError, match="grdis"):
            parse_config(doc)

    def test_trials_validated(self):
        doc = indicator_config()
        doc["trials"] = 0
        with pytest.raises(rl.ConfigError, match="trials"):
            parse_config(doc)

    def test_default_t_grid_from_family(self, tmp_path):
        doc = indicator_config()
        del doc["grids"]["T"]
        config = parse_config(doc)
        built = build_objects(config)
        assert built.grid_T.size == built.grid_E.size
        assert built.grid_T.interval == built.grid_E.interval

    def test_density_whitelist(self):
        doc = indicator_config()
        doc["grids"]["E"]["density"] = {"name": "parabola"}
        with pytest.raises(rl.ConfigError, match="density"):
            parse_config(doc)

    def test_named_density_applies(self):
        doc = indicator_config()
        doc["grids"]["E"]["density"] = {"name": "linear", "params": {"intercept": 1.0, "slope": 1.0}}
        config = parse_config(doc)
        built = build_objects(config)
        # total mass is integral of 1 + t over [0, 1] = 1.5
        assert built.grid_E.weights.sum() == pytest.approx(1.5, abs=1e-6)


class TestVerifyCommand:
    def test_indicator_passes(self, tmp_path, capsys):
        cfg = write_config(tmp_path, indicator_config())
        out = tmp_path / "report.json"
        code = main(["verify", "--config", str(cfg), "--out", str(out)])
        assert code == 0
        report = json.loads(out.read_text())
        assert report["passed"] is True
        fact = next(c for c in report["criteria"] if c["name"] == "factorization")
        assert fact["value"] <= 1e-14
        assert report["schema_version"] == 1

    def test_every_residual_carries_tolerance(self, tmp_path):
        cfg = write_config(tmp_path, indicator_config())
        out = tmp_path / "report.json"
        main(["verify", "--config", str(cfg), "--out", str(out)])
        report = json.loads(out.read_text())
        for c in report["criteria"]:
            assert set(c) == {"name", "value", "tolerance", "passed", "note"}
            if c["passed"] is not None:
                assert c["tolerance"] is not None

    def test_negative_kernel_exits_one(self, tmp_path):
        doc = {
            "grids": {"E": {"interval": [0.0, 1.0], "n": 25, "rule": "midpoint"}},
            "source": {"kernel": {"name": "constant", "params": {"value": -1.0}}},
            "trials": 5,
            "seed": 1,
        }
        cfg = write_config(tmp_path, doc)
        out = tmp_path / "report.json"
        code = main(["verify", "--config", str(cfg), "--out", str(out)])
        assert code == 1
        report = json.loads(out.read_text())
        assert report["psd"]["passed"] is False
        assert report["passed"] is False

    def test_two_sources_exit_two(self, tmp_path, capsys):
        doc = indicator_config()
        doc["source"]["kernel"] = {"name": "brownian"}
        cfg = write_config(tmp_path, doc)
        code = main(["verify", "--config", str(cfg)])
        assert code == 2
        err = capsys.readouterr().err
        assert "kernel" in err and "feature_family" in err

    def test_missing_config_exit_two(self, tmp_path):
        assert main(["verify", "--config", str(tmp_path / "nope.json")]) == 2

    def test_kernel_source_report(self, tmp_path):
        doc = {
            "grids": {"E": {"interval": [0.0, 1.0], "n": 80, "rule": "trapezoid"}},
            "source": {"kernel": {"name": "brownian"}},
            "trials": 20,
            "seed": 3,
        }
        cfg = write_config(tmp_path, doc)
        out = tmp_path / "report.json"
        code = main(["verify", "--config", str(cfg), "--out", str(out)])
        assert code == 0
        report = json.loads(out.read_text())
        assert report["injectivity"] is None
        assert report["weighted_l2"]["is_weighted_l2"] is False
        repro = next(c for c in report["criteria"] if c["name"] == "reproducing")
        assert repro["passed"] is True

    def test_determinism_excluding_timings(self, tmp_path):
        cfg = write_config(tmp_path, indicator_config())
        out1, out2 = tmp_path / "r1.json", tmp_path / "r2.json"
        assert main(["verify", "--config", str(cfg), "--out", str(out1)]) == 0
        assert main(["verify", "--config", str(cfg), "--out", str(out2)]) == 0
        a = json.loads(out1.read_text())
        b = json.loads(out2.read_text())
        a.pop("timings")
        b.pop("timings")
        assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)

    def test_env_seed_override(self, tmp_path, monkeypatch):
        cfg = write_config(tmp_path, indicator_config(seed=7))
        out = tmp_path / "report.json"
        monkeypatch.setenv("RKHSLAB_SEED", "4242")
        main(["verify", "--config", str(cfg), "--out", str(out)])
        report = json.loads(out.read_text())
        assert report["seed"] == 4242
        assert report["config"]["seed"] == 4242

    def test_bad_env_seed_exit_two(self, tmp_path, monkeypatch):
        cfg = write_config(tmp_path, indicator_config())
        monkeypatch.setenv("RKHSLAB_SEED", "not-a-number")
        assert main(["verify", "--config", str(cfg)]) == 2

    def test_stdout_report(self, tmp_path, capsys):
        cfg = write_config(tmp_path, indicator_config(n=40, trials=5))
        code = main(["verify", "--config", str(cfg)])
        assert code == 0
        report = json.loads(capsys.readouterr().out)
        assert report["command"] == "verify"


class TestInvertCommand:
    def make_data(self, tmp_path, doc, fn=None, seed=11):
        cfg = write_config(tmp_path, doc)
        built = build_objects(load_config(cfg))
        if fn is None:
            rng = np.random.default_rng(seed)
            F0 = rl.DiscreteFunction(rng.standard_normal(built.grid_T.size), built.grid_T)
            data = rl.apply_forward(built.operator, F0)
        else:
            F0 = None
            data = rl.sample_function(built.grid_E, fn)
        data_path = tmp_path / "data.csv"
        save_function_csv(data, data_path)
        return cfg, data_path, built, F0

    def test_roundtrip(self, tmp_path):
        cfg, data, built, F0 = self.make_data(tmp_path, indicator_config())
        out = tmp_path / "rec.csv"
        rep_path = tmp_path / "inv.json"
        code = main(["invert", "--config", str(cfg), "--data", str(data),
                     "--out", str(out), "--report", str(rep_path)])
        assert code == 0
        rows = np.loadtxt(out, delimiter=",", skiprows=1)
        rel = np.linalg.norm(rows[:, 1] - F0.values) / np.linalg.norm(F0.values)
        assert rel <= 1e-6
        report = json.loads(rep_path.read_text())
        assert report["range_violation"] is False

    def test_zero_data(self, tmp_path):
        cfg, data, built, _ = self.make_data(tmp_path, indicator_config(),
                                             fn=lambda p: 0.0 * p)
        out = tmp_path / "rec.csv"
        code = main(["invert", "--config", str(cfg), "--data", str(data), "--out", str(out)])
        assert code == 0
        rows = np.loadtxt(out, delimiter=",", skiprows=1)
        assert np.all(rows[:, 1] == 0) and np.all(rows[:, 2] == 0)

    def test_out_of_range_exit_three(self, tmp_path):
        doc = indicator_config()
        doc["grids"]["T"] = {"interval": [0.0, 1.0], "n": 1, "rule": "midpoint"}
        doc["source"] = {"csv": {"kind": "feature", "path": str(tmp_path / "H.csv"),
                                 "mode": "real"}}
        np.savetxt(tmp_path / "H.csv", np.ones((1, 120)), delimiter=",", fmt="%.17g")
        cfg, data, built, _ = self.make_data(tmp_path, doc, fn=lambda p: p)
        out = tmp_path / "rec.csv"
        rep_path = tmp_path / "inv.json"
        code = main(["invert", "--config", str(cfg), "--data", str(data),
                     "--out", str(out), "--report", str(rep_path)])
        assert code == 3
        report = json.loads(rep_path.read_text())
        assert report["range_violation"] is True
        assert report["range_residual"] >= 0.1

    def test_kernel_source_rejected(self, tmp_path):
        doc = {
            "grids": {"E": {"interval": [0.0, 1.0], "n": 30, "rule": "midpoint"}},
            "source": {"kernel": {"name": "brownian"}},
            "seed": 1,
        }
        cfg = write_config(tmp_path, doc)
        data = tmp_path / "d.csv"
        grid = rl.make_uniform_grid(0, 1, 30, "midpoint")
        save_function_csv(rl.sample_function(grid, lambda p: p), data)
        code = main(["invert", "--config", str(cfg), "--data", str(data),
                     "--out", str(tmp_path / "rec.csv")])
        assert code == 2

    def test_misaligned_data_exit_two(self, tmp_path):
        cfg, _, built, _ = self.make_data(tmp_path, indicator_config())
        other = rl.make_uniform_grid(0, 1, 60, "midpoint")
        bad = tmp_path / "bad.csv"
        save_function_csv(rl.sample_function(other, lambda p: p), bad)
        code = main(["invert", "--config", str(cfg), "--data", str(bad),
                     "--out", str(tmp_path / "rec.csv")])
        assert code == 2


class TestAnalyzeCommand:
    def test_orthonormal_family_verdict(self, tmp_path):
        doc = {
            "grids": {
                "E": {"interval": [0.0, 1.0], "n": 60, "rule": "trapezoid"},
                "T": {"interval": [0.0, 1.0], "n": 60, "rule": "trapezoid"},
            },
            "source": {"feature_family": {"family": "orthonormal_diagonal"}},
            "seed": 5,
        }
        cfg = write_config(tmp_path, doc)
        out = tmp_path / "verdict.json"
        code = main(["analyze", "--config", str(cfg), "--out", str(out)])
        assert code == 0
        report = json.loads(out.read_text())
        assert report["weighted_l2"]["is_weighted_l2"] is True
        assert report["weighted_l2"]["offdiag_ratio"] <= 1e-10
        v = np.array(report["weighted_l2"]["weight_v"])
        w = np.array(report["weighted_l2"]["weight_w"])
        assert np.max(np.abs(v * w - 1)) <= 1e-10

    def test_brownian_verdict_no(self, tmp_path):
        doc = {
            "grids": {"E": {"interval": [0.0, 1.0], "n": 60, "rule": "midpoint"}},
            "source": {"kernel": {"name": "brownian"}},
            "seed": 5,
        }
        cfg = write_config(tmp_path, doc)
        out = tmp_path / "verdict.json"
        assert main(["analyze", "--config", str(cfg), "--out", str(out)]) == 0
        report = json.loads(out.read_text())
        assert report["weighted_l2"]["is_weighted_l2"] is False
        assert report["weighted_l2"]["offdiag_ratio"] >= 1e-2


class TestCsvKernelSource:
    def test_verify_from_kernel_csv(self, tmp_path):
        grid = rl.make_uniform_grid(0, 1, 40, "midpoint")
        K = rl.assemble_kernel(rl.builtin_kernel("brownian"), grid)
        from rkhslab.io import save_kernel_csv

        path = tmp_path / "K.csv"
        save_kernel_csv(K, path, mode="real")
        doc = {
            "grids": {"E": {"interval": [0.0, 1.0], "n": 40, "rule": "midpoint"}},
            "source": {"csv": {"kind": "kernel", "path": str(path), "mode": "real"}},
            "trials": 10,
            "seed": 2,
        }
        cfg = write_config(tmp_path, doc)
        out = tmp_path / "report.json"
        code = main(["verify", "--config", str(cfg), "--out", str(out)])
        assert code == 0
        assert json.loads(out.read_text())["passed"] is True
