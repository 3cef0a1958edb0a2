import json

import numpy as np
import pytest

from pagecusum.cli import dispatch
from pagecusum.wiener import CriticalValueEstimate, save_estimate


def run_cli(capsys, *argv):
    code = dispatch(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def write_series(path, values, header=True):
    lines = (["x"] if header else []) + [repr(float(v)) for v in values]
    path.write_text("\n".join(lines) + "\n")


class TestLimitCdfCommand:
    def test_case_three_at_zero(self, capsys):
        code, out, _ = run_cli(capsys, "limit-cdf", "--case", "III", "--x", "0")
        assert code == 0
        payload = json.loads(out)
        assert payload["psi_upper"] == 0.0
        assert payload["psi"] == pytest.approx(1.0)

    def test_case_two_needs_d1(self, capsys):
        code, _, err = run_cli(capsys, "limit-cdf", "--case", "II", "--x", "1")
        assert code == 2 and "d1" in err


class TestAsymptoticsCommand:
    def test_published_normalization(self, capsys):
        code, out, _ = run_cli(capsys, "asymptotics", "--m", "100", "--gamma",
                               "0", "--kstar", "1", "--delta", "1", "--sigma",
                               "1", "--c", "1.645")
        assert code == 0
        payload = json.loads(out)
        assert payload["a_m"] == pytest.approx(17.45, abs=0.01)
        assert payload["b_m"] == pytest.approx(4.18, abs=0.01)
        assert payload["case"] == "I"
        assert "d1" not in payload

    def test_knife_edge_reports_d1_and_N(self, capsys):
        code, out, _ = run_cli(capsys, "asymptotics", "--m", "1000", "--gamma",
                               "0.25", "--theta", "1", "--beta",
                               str(1.0 / 3.0), "--delta", "1", "--c", "1.899",
                               "--x", "0.5")
        assert code == 0
        payload = json.loads(out)
        assert payload["case"] == "II"
        assert payload["d1"] == pytest.approx(0.2763, abs=1e-3)
        assert payload["N"] < payload["a_m"]

    def test_kstar_and_theta_are_exclusive(self, capsys):
        code, _, err = run_cli(capsys, "asymptotics", "--m", "100", "--gamma",
                               "0", "--kstar", "1", "--theta", "1", "--beta",
                               "0.5", "--delta", "1", "--c", "1.6")
        assert code == 2 and "either" in err


class TestCritvalsCommand:
    def test_gamma_domain_message(self, capsys):
        code, _, err = run_cli(capsys, "critvals", "--gamma", "0.7",
                               "--alpha", "0.1")
        assert code == 2
        assert "[0, 0.5)" in err

    def test_small_run_writes_exact_json(self, capsys, tmp_path):
        out_file = tmp_path / "cv.json"
        code, out, _ = run_cli(capsys, "critvals", "--gamma", "0", "--alpha",
                               "0.1", "--detector", "ordinary", "--reps",
                               "1000", "--grid", "64", "--seed", "5", "--out",
                               str(out_file))
        assert code == 0
        payload = json.loads(out_file.read_text())
        assert set(payload) == {"gamma", "alpha", "side", "detector", "reps",
                                "grid", "seed", "c", "std_err"}
        assert json.loads(out) == payload
        first = out_file.read_bytes()
        code, _, _ = run_cli(capsys, "critvals", "--gamma", "0", "--alpha",
                             "0.1", "--detector", "ordinary", "--reps",
                             "1000", "--grid", "64", "--seed", "5", "--out",
                             str(out_file))
        assert code == 0 and out_file.read_bytes() == first

    def test_persisting_needs_reps(self, capsys, tmp_path):
        code, _, err = run_cli(capsys, "critvals", "--gamma", "0", "--alpha",
                               "0.1", "--reps", "500", "--grid", "32",
                               "--out", str(tmp_path / "cv.json"))
        assert code == 2 and "1000" in err


class TestMonitorCommand:
    def test_immediate_detection(self, capsys, tmp_path):
        rng = np.random.default_rng(1)
        train = tmp_path / "train.csv"
        stream = tmp_path / "stream.csv"
        write_series(train, rng.standard_normal(50))
        write_series(stream, rng.standard_normal(20) + 100.0, header=False)
        code, out, _ = run_cli(capsys, "monitor", "--train", str(train),
                               "--stream", str(stream), "--gamma", "0",
                               "--alpha", "0.1", "--detector", "page")
        assert code == 0
        payload = json.loads(out)
        assert payload["stopped"] is True and payload["tau"] == 1
        assert payload["stat_at_tau"] >= payload["threshold_at_tau"]

    def test_explicit_critical_value_and_no_stop(self, capsys, tmp_path):
        rng = np.random.default_rng(2)
        train = tmp_path / "train.csv"
        stream = tmp_path / "stream.csv"
        write_series(train, rng.standard_normal(50))
        write_series(stream, rng.standard_normal(30))
        code, out, _ = run_cli(capsys, "monitor", "--train", str(train),
                               "--stream", str(stream), "--critical-value",
                               "50.0")
        assert code == 0
        payload = json.loads(out)
        assert payload["stopped"] is False and payload["tau"] is None

    def test_unknown_combination_fails_cleanly(self, capsys, tmp_path):
        rng = np.random.default_rng(3)
        train = tmp_path / "train.csv"
        stream = tmp_path / "stream.csv"
        write_series(train, rng.standard_normal(20))
        write_series(stream, rng.standard_normal(5))
        code, _, err = run_cli(capsys, "monitor", "--train", str(train),
                               "--stream", str(stream), "--gamma", "0.1")
        assert code == 2 and "critvals" in err


class TestGenerateCommand:
    CONFIG = ("omega = 0.5\nalpha = 0.2\nbeta = 0.3\nburn_in = 50\n"
              "mu = 0.0\ndelta = 1.0\ntheta = 1.0\nbeta_exp = 0.0\n"
              "m = 40\nlength = 60\n")

    def test_writes_series(self, capsys, tmp_path):
        spec = tmp_path / "gen.cfg"
        spec.write_text(self.CONFIG)
        out = tmp_path / "series.csv"
        code, _, _ = run_cli(capsys, "generate", "--spec", str(spec),
                             "--seed", "3", "--out", str(out))
        assert code == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "x"
        assert len(lines) == 1 + 40 + 60
        first = out.read_bytes()
        run_cli(capsys, "generate", "--spec", str(spec), "--seed", "3",
                "--out", str(out))
        assert out.read_bytes() == first

    def test_n_overrides_length(self, capsys, tmp_path):
        spec = tmp_path / "gen.cfg"
        spec.write_text(self.CONFIG)
        out = tmp_path / "series.csv"
        code, _, _ = run_cli(capsys, "generate", "--spec", str(spec), "--n",
                             "10", "--seed", "3", "--out", str(out))
        assert code == 0
        assert len(out.read_text().strip().splitlines()) == 1 + 40 + 10

    def test_unknown_key_rejected(self, capsys, tmp_path):
        spec = tmp_path / "gen.cfg"
        spec.write_text(self.CONFIG + "bogus = 1\n")
        code, _, err = run_cli(capsys, "generate", "--spec", str(spec),
                               "--out", str(tmp_path / "x.csv"))
        assert code == 2 and "bogus" in err


SIM_CONFIG = ("m = 60\ngamma = 0.0\nalpha = 0.1\nside = one_sided\n"
              "delta = 1.5\nkstar = 2\nhorizon_factor = 4\nreps = 40\n"
              "seed = 9\nomega = 0.5\nalpha_garch = 0.2\nbeta_garch = 0.3\n"
              "burn_in = 100\n")


class TestSimulateCommand:
    def test_outputs_and_determinism(self, capsys, tmp_path):
        cfg = tmp_path / "sim.cfg"
        cfg.write_text(SIM_CONFIG)
        out_dir = tmp_path / "out"
        code, _, _ = run_cli(capsys, "simulate", "--config", str(cfg),
                             "--out", str(out_dir))
        assert code == 0
        names = ("records.csv", "density_page.csv", "density_q.csv",
                 "density_tilde.csv", "meta.json")
        blobs = {n: (out_dir / n).read_bytes() for n in names}
        meta = json.loads(blobs["meta.json"])
        assert meta["reps"] == 40 and meta["seed"] == 9
        assert meta["c_page"] == pytest.approx(1.69236)
        code, _, _ = run_cli(capsys, "simulate", "--config", str(cfg),
                             "--out", str(out_dir))
        assert code == 0
        for n in names:
            assert (out_dir / n).read_bytes() == blobs[n]

    def test_threads_flag_keeps_outputs_identical(self, capsys, tmp_path):
        cfg = tmp_path / "sim.cfg"
        cfg.write_text(SIM_CONFIG)
        a, b = tmp_path / "a", tmp_path / "b"
        run_cli(capsys, "simulate", "--config", str(cfg), "--out", str(a))
        run_cli(capsys, "simulate", "--config", str(cfg), "--out", str(b),
                "--threads", "2")
        for name in ("records.csv", "meta.json"):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_seed_flag_overrides_config(self, capsys, tmp_path):
        cfg = tmp_path / "sim.cfg"
        cfg.write_text(SIM_CONFIG)
        out_dir = tmp_path / "out"
        run_cli(capsys, "simulate", "--config", str(cfg), "--out",
                str(out_dir), "--seed", "77")
        meta = json.loads((out_dir / "meta.json").read_text())
        assert meta["seed"] == 77

    def test_cache_is_consulted(self, capsys, tmp_path):
        cache = tmp_path / "cache"
        cache.mkdir()
        est = CriticalValueEstimate(c=2.5, std_err=0.01, gamma=0.0, alpha=0.1,
                                    side="one_sided", detector="page",
                                    reps=5000, grid_size=256, seed=1)
        save_estimate(est, cache / "page.json")
        cfg = tmp_path / "sim.cfg"
        cfg.write_text(SIM_CONFIG)
        out_dir = tmp_path / "out"
        code, _, _ = run_cli(capsys, "simulate", "--config", str(cfg),
                             "--out", str(out_dir), "--cache", str(cache))
        assert code == 0
        meta = json.loads((out_dir / "meta.json").read_text())
        assert meta["c_page"] == 2.5
        assert meta["c_q"] == pytest.approx(1.64485)  # falls back to reference

    def test_delta_zero_rejected(self, capsys, tmp_path):
        cfg = tmp_path / "sim.cfg"
        cfg.write_text(SIM_CONFIG.replace("delta = 1.5", "delta = 0"))
        code, _, err = run_cli(capsys, "simulate", "--config", str(cfg),
                               "--out", str(tmp_path / "out"))
        assert code == 2 and "delta" in err


class TestDensityCommand:
    def test_rerun_kde_from_records(self, capsys, tmp_path):
        cfg = tmp_path / "sim.cfg"
        cfg.write_text(SIM_CONFIG)
        out_dir = tmp_path / "out"
        run_cli(capsys, "simulate", "--config", str(cfg), "--out",
                str(out_dir))
        dens_dir = tmp_path / "dens"
        code, _, _ = run_cli(capsys, "density", "--records",
                             str(out_dir / "records.csv"), "--out",
                             str(dens_dir))
        assert code == 0
        assert (dens_dir / "density_page.csv").read_bytes() == \
            (out_dir / "density_page.csv").read_bytes()


class TestTable1Command:
    def test_writes_full_table(self, capsys, tmp_path):
        out = tmp_path / "table1.csv"
        code, _, _ = run_cli(capsys, "table1", "--alpha", "0.1", "--out",
                             str(out))
        assert code == 0
        lines = out.read_text().strip().splitlines()
        assert len(lines) == 46
        assert lines[0] == "rule,gamma,m,kstar,a_page,b_page,a_q,b_q"

    def test_unsupported_alpha_fails(self, capsys, tmp_path):
        code, _, err = run_cli(capsys, "table1", "--alpha", "0.2", "--out",
                               str(tmp_path / "t.csv"))
        assert code == 2 and "critvals" in err


class TestDispatch:
    def test_unknown_subcommand(self, capsys):
        code, _, _ = run_cli(capsys, "frobnicate")
        assert code == 2

    def test_missing_required_flag(self, capsys):
        code, _, _ = run_cli(capsys, "table1")
        assert code == 2
