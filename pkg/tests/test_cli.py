import json
import os

import numpy as np
import pytest

from spinkin.cli import main
from spinkin.diagnostics import DiagnosticsSeries
from spinkin.snapshots import read_snapshot, write_snapshot


def write_config(tmp_path, **overrides):
    cfg = dict(scenario="precession", B0=0.5, n_particles=30, n_x=8,
               dt=0.1, t_end=1.0)
    cfg.update(overrides)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return str(path)


class TestRun:
    def test_run_writes_directory_and_exits_zero(self, tmp_path, capsys):
        cfg = write_config(tmp_path)
        out = str(tmp_path / "runs")
        code = main(["run", "--config", cfg, "--out", out])
        assert code == 0
        line = capsys.readouterr().out.strip()
        run_dir = line.split(":")[0]
        assert run_dir.startswith(out)
        assert os.path.exists(os.path.join(run_dir, "diagnostics.csv"))

    def test_invalid_config_reports_and_exits_nonzero(self, tmp_path, capsys):
        cfg = write_config(tmp_path, dt=-1.0)
        code = main(["run", "--config", cfg, "--out", str(tmp_path / "r")])
        assert code == 2
        assert "dt" in capsys.readouterr().err

    def test_aborted_run_exits_one(self, tmp_path):
        cfg = write_config(tmp_path, B0=2.0, dt=1.0, t_end=5.0)
        code = main(["run", "--config", cfg, "--out", str(tmp_path / "r")])
        assert code == 1

    def test_seed_override(self, tmp_path):
        cfg = write_config(tmp_path)
        out = str(tmp_path / "runs")
        main(["run", "--config", cfg, "--out", out, "--seed", "7"])
        run_dir = next(str(p) for p in (tmp_path / "runs").iterdir())
        saved = json.load(open(os.path.join(run_dir, "config.json")))
        assert saved["seed"] == 7

    def test_env_out_override(self, tmp_path, monkeypatch, capsys):
        cfg = write_config(tmp_path)
        env_out = str(tmp_path / "env-runs")
        monkeypatch.setenv("SPINKIN_OUT", env_out)
        code = main(["run", "--config", cfg])
        assert code == 0
        assert capsys.readouterr().out.startswith(env_out)


class TestCheck:
    def test_single_suite_passes(self, tmp_path, capsys):
        code = main(["check", "precession", "--out", str(tmp_path / "c")])
        out = capsys.readouterr().out
        assert code == 0
        assert out.startswith("PASS") and "precession" in out

    def test_unknown_suite_rejected(self, tmp_path, capsys):
        code = main(["check", "warp", "--out", str(tmp_path / "c")])
        assert code == 2
        assert "unknown suite" in capsys.readouterr().err


class TestFit:
    def make_csv(self, tmp_path, y, dt=0.01):
        t = np.arange(len(y)) * dt
        path = tmp_path / "series.csv"
        DiagnosticsSeries(t, {"y": np.asarray(y)}).write_csv(path)
        return str(path)

    def test_cosine_fit(self, tmp_path, capsys):
        t = np.arange(0, 20, 0.01)
        path = self.make_csv(tmp_path, np.cos(3.7 * t))
        code = main(["fit", "--input", path, "--column", "y"])
        out = capsys.readouterr().out
        assert code == 0
        omega = float(out.split("omega=")[1].split()[0])
        assert abs(omega - 3.7) / 3.7 < 1e-6

    def test_constant_series_inconclusive(self, tmp_path, capsys):
        path = self.make_csv(tmp_path, np.full(2000, 1.0))
        code = main(["fit", "--input", path, "--column", "y"])
        assert code == 3
        assert "inconclusive" in capsys.readouterr().out

    def test_missing_column_is_an_error(self, tmp_path, capsys):
        t = np.arange(0, 20, 0.01)
        path = self.make_csv(tmp_path, np.cos(t))
        code = main(["fit", "--input", path, "--column", "nope"])
        assert code == 2
        assert "error" in capsys.readouterr().err


class TestTransform:
    def make_state(self, tmp_path, n=64, length=12.0):
        x = np.arange(n) * length / n
        env = np.exp(-((x - length / 2) ** 2) / 2) * np.exp(1j * 0.7 * x)
        psi = np.zeros((2, n), dtype=complex)
        psi[0] = env * 0.8
        psi[1] = env * 0.6
        arr = np.stack([psi.real, psi.imag], axis=-1)
        base = str(tmp_path / "state")
        write_snapshot(base, arr, {"component": {"n": 2},
                                   "x": {"n": n, "spacing": length / n},
                                   "re_im": {"n": 2}},
                       extra={"length": length, "hbar": 1.0})
        return base

    @pytest.mark.parametrize("kind", ["wigner", "spinq", "gi"])
    def test_kinds_produce_snapshots(self, tmp_path, capsys, kind):
        base = self.make_state(tmp_path)
        code = main(["transform", "--input", base, "--kind", kind])
        assert code == 0
        out_base = capsys.readouterr().out.strip()
        arr, meta = read_snapshot(out_base)
        assert meta["extra"]["kind"] == kind
        assert np.all(np.isfinite(arr))
        if kind == "spinq":
            assert arr.shape == (8, 16)
            assert arr.min() >= -1e-12
        else:
            assert arr.shape == (64, 64)

    def test_wrong_shape_rejected(self, tmp_path, capsys):
        base = str(tmp_path / "bad")
        write_snapshot(base, np.zeros((3, 4)), {"a": {"n": 3}, "b": {"n": 4}})
        code = main(["transform", "--input", base, "--kind", "wigner"])
        assert code == 2
