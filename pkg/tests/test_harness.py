import csv
import json
import math

import numpy as np
import pytest

from bdris.chanopt import gen_channels
from bdris.errors import ConfigError
from bdris.harness.config import load_config, parse_config
from bdris.harness.sweep import complexity_slopes, realization_rng, run_realization, run_sweep


def write_config(tmp_path, **data):
    data.setdefault("output", str(tmp_path / "out.csv"))
    path = tmp_path / "config.json"
    path.write_text(json.dumps(data, indent=2))
    return path


def small_gain(tmp_path, **extra):
    cfg = dict(
        experiment="gain_vs_q",
        dims={"n": 8, "l": 2, "k": 2},
        realizations=4,
        seed=7,
        archs=[{"kind": "fully"}],
        q_values=[1, 3],
        qn={"max_iter": 40},
    )
    cfg.update(extra)
    return load_config(write_config(tmp_path, **cfg))


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


class TestConfig:
    def test_missing_output(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text('{\n  "experiment": "complexity",\n  "dims": {"n": 8}\n}')
        with pytest.raises(ConfigError) as err:
            load_config(path)
        assert err.value.field == "output"

    def test_line_diagnostics(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text('{\n  "experiment": "gain_vs_q",\n  "output": "x.csv",\n  "dims": {"n": 8},\n'
                        '  "archs": [{"kind": "fully"}],\n  "realizations": 0\n}')
        with pytest.raises(ConfigError) as err:
            load_config(path)
        assert err.value.field == "realizations" and err.value.line == 6
        assert "line 6" in str(err.value)

    def test_bad_json(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text('{"experiment": }')
        with pytest.raises(ConfigError) as err:
            load_config(path)
        assert err.value.line == 1

    @pytest.mark.parametrize("patch", [
        {"experiment": "plot"},
        {"dims": {}},
        {"archs": [{"kind": "hexagonal"}]},
        {"archs": []},
        {"methods": ["psla"]},
        {"unknown": 1},
        {"seed": -1},
        {"physics": {"z0": -50}},
    ])
    def test_rejects(self, patch):
        base = {"experiment": "gain_vs_q", "output": "x.csv", "dims": {"n": 8}, "archs": [{"kind": "fully"}]}
        base.update(patch)
        with pytest.raises(ConfigError):
            parse_config(base)

    def test_output_dir_env(self, monkeypatch, tmp_path):
        monkeypatch.setenv("BDRIS_OUTPUT_DIR", str(tmp_path))
        cfg = parse_config({"experiment": "complexity", "output": "c.csv", "dims": {"n": 8},
                            "archs": [{"kind": "tree"}]})
        assert cfg.output == str(tmp_path / "c.csv")


class TestSweep:
    def test_deterministic(self, tmp_path):
        cfg = small_gain(tmp_path)
        run_sweep(cfg)
        first = open(cfg.output, "rb").read()
        run_sweep(cfg)
        assert open(cfg.output, "rb").read() == first

    def test_workers_do_not_change_output(self, tmp_path):
        cfg = small_gain(tmp_path)
        run_sweep(cfg)
        first = open(cfg.output, "rb").read()
        run_sweep(small_gain(tmp_path, workers=2))
        assert open(cfg.output, "rb").read() == first

    def test_row_layout_and_aggregates(self, tmp_path):
        cfg = small_gain(tmp_path)
        run_sweep(cfg)
        rows = read_rows(cfg.output)
        metrics = ["ub", "gain_ub_sosup", "gain_sosup_qn"]
        for arch_id in ("0", "1", "2"):
            group = [r for r in rows if r["arch_id"] == arch_id]
            per = [r for r in group if r["row_type"] == "realization"]
            assert [int(r["realization"]) for r in per] == [0, 1, 2, 3]
            mean = next(r for r in group if r["row_type"] == "mean")
            se = next(r for r in group if r["row_type"] == "stderr")
            for c in metrics:
                vals = np.array([float(r[c]) for r in per])
                assert abs(float(mean[c]) - vals.mean()) <= 1e-12 * abs(vals.mean())
                assert abs(float(se[c]) - vals.std(ddof=1) / math.sqrt(4)) <= 1e-12 * abs(vals.mean())
            assert {"kind", "n", "l", "k", "q", "complexity"} <= set(group[0])

    def test_realization_independent_of_batch(self, tmp_path):
        cfg = small_gain(tmp_path)
        run_sweep(cfg)
        rows = [r for r in read_rows(cfg.output) if r["row_type"] == "realization" and r["realization"] == "2"]
        alone, _ = run_realization(cfg, 2)
        for r in rows:
            vals = alone[(int(r["point"]), int(r["arch_id"]))]
            for c, v in vals.items():
                assert float(r[c]) == v

    def test_rng_streams(self):
        a = gen_channels(4, 2, 2, realization_rng(3, 5, 0))
        b = gen_channels(4, 2, 2, realization_rng(3, 5, 0))
        c = gen_channels(4, 2, 2, realization_rng(3, 6, 0))
        np.testing.assert_array_equal(a.e, b.e)
        assert not np.allclose(a.e, c.e)

    def test_timing_sidecar(self, tmp_path):
        cfg = load_config(write_config(tmp_path, experiment="timing", dims={"n": 8, "l": 2, "k": 2},
                                       realizations=2, archs=[{"kind": "tree"}], qn={"max_iter": 20}))
        res = run_sweep(cfg)
        rows = read_rows(res["timing_output"])
        assert {r["row_type"] for r in rows} == {"realization", "median"}
        assert all(float(r["seconds"]) >= 0 for r in rows)
        assert "seconds" not in open(cfg.output).readline()

    def test_complexity_slopes(self, tmp_path):
        archs = [{"kind": "fully"}, {"kind": "group", "g": 4}, {"kind": "single"}, {"kind": "tree"},
                 {"kind": "forest", "g": 4}, {"kind": "stem", "q": 3}, {"kind": "cluster", "g": 4, "q_g": 2}]
        cfg = load_config(write_config(tmp_path, experiment="complexity",
                                       dims={"n": [16, 32, 64, 128, 256]}, archs=archs))
        res = run_sweep(cfg)
        slopes = complexity_slopes(res["groups"])
        for key, slope in slopes.items():
            target = 2.0 if key.startswith(("fully", "group")) else 1.0
            assert abs(slope - target) <= 0.15, (key, slope)
        assert len(slopes) == 7

    @pytest.mark.slow
    def test_gain_saturates_in_q(self, tmp_path):
        cfg = load_config(write_config(
            tmp_path, experiment="gain_vs_q", dims={"n": 64, "l": 4, "k": 4}, realizations=10,
            archs=[{"kind": "fully"}], q_values=list(range(10)), methods=["ub_sosup"]))
        res = run_sweep(cfg)
        groups = {g["arch"]: g for g in res["groups"]}
        full = groups["fully,N=64"]["mean"]["gain_ub_sosup"]
        means = [groups[f"stem,N=64,Q={q}"]["mean"]["gain_ub_sosup"] for q in range(10)]
        errs = [groups[f"stem,N=64,Q={q}"]["stderr"]["gain_ub_sosup"] for q in range(10)]
        for q in range(9):
            assert means[q + 1] >= means[q] - errs[q + 1]
        assert means[7] >= 0.99 * full
