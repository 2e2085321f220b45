import json

import numpy as np
import pytest

from hrisim.cli import build_parser, main, parse_sweep
from hrisim.config import ConfigError, SimulationConfig, load_config
from hrisim.orchestrator import TrialResult
from hrisim.writers import emit_aggregate, emit_results, fmt


class TestDefaults:
    def test_full_scale_defaults(self):
        cfg = load_config()
        assert cfg.m_bs == 64
        assert cfg.k_ues == 16
        assert cfg.n_x * cfg.n_z == 32
        assert cfg.eta == 0.8
        assert cfg.rho_dbm == 10.0
        assert cfg.sigma_b_dbm == -94.0
        assert cfg.sigma_r_dbm == -94.0
        assert cfg.beta_los == 2.0
        assert cfg.beta_nlos == 4.0
        assert cfg.carrier_freq_hz == 28e9
        assert cfg.n_subblocks == 128
        assert cfg.tau_p == 16
        assert cfg.tau_c_effective == 2 * 128 * 16

    def test_linear_conversions(self):
        params = load_config().system_params()
        assert params.rho == pytest.approx(10.0)
        assert params.sigma_b_sq == pytest.approx(10 ** (-9.4))

    def test_roundtrip_through_dict(self):
        cfg = load_config(overrides={"n_subblocks": 16, "c_values": [0, 4],
                                     "trials": 3, "tau_c": 256})
        again = load_config(overrides=cfg.to_dict())
        assert again == cfg


class TestLoadConfig:
    def test_empty_file_gives_defaults(self, tmp_path):
        path = tmp_path / "empty.json"
        path.write_text("")
        assert load_config(path) == SimulationConfig()

    def test_file_plus_overrides_merge(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"n_subblocks": 16, "tau_c": 512, "trials": 7}))
        cfg = load_config(path, overrides={"c_values": [0, 4, 8, 16]})
        assert cfg.n_subblocks == 16
        assert cfg.trials == 7
        assert cfg.c_values == [0, 4, 8, 16]

    def test_unknown_key_lists_valid_keys(self):
        with pytest.raises(ConfigError) as err:
            load_config(overrides={"bogus_knob": 1})
        assert "bogus_knob" in str(err.value)
        assert "eta" in str(err.value)  # lists the valid keys

    def test_eta_range_message(self):
        with pytest.raises(ConfigError, match=r"eta must lie in \[0,1\]"):
            load_config(overrides={"eta": 1.5})

    def test_probe_duration_exceeding_chest(self):
        with pytest.raises(ConfigError, match="C=40"):
            load_config(overrides={"n_subblocks": 16, "tau_c": 512,
                                   "c_values": [0, 40]})

    def test_coherence_block_too_short(self):
        with pytest.raises(ConfigError, match="tau_c"):
            load_config(overrides={"tau_c": 100})

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError):
            load_config(path)


def fake_record(trial=0, hardware="signal", c=4, l=16, k=2, seed=0):
    rng = np.random.default_rng(seed)
    return TrialResult(trial=trial, hardware=hardware, n_probe_subblocks=c,
                       n_subblocks=l, detected=np.array([True] * k),
                       best_direction=np.arange(k), alpha_best=rng.uniform(size=k),
                       statistics=rng.uniform(size=k), analytic_pd=rng.uniform(size=k),
                       analytic_pfa=1e-3, frobenius_gap=rng.uniform(),
                       mse_analytic=rng.uniform(size=k), mse_empirical=rng.uniform(size=k),
                       nmse=rng.uniform(size=k), sinr=rng.uniform(1, 5, size=k),
                       se=rng.uniform(size=k), uatf_se=rng.uniform(size=k))


class TestWriters:
    def test_single_row_csv(self, tmp_path):
        path = tmp_path / "r.csv"
        emit_results([fake_record(k=1)], path)
        lines = path.read_text().splitlines()
        assert len(lines) == 2  # header + one row
        assert lines[0].startswith("trial,hardware,C_over_L,ue,")

    def test_reemission_byte_identical(self, tmp_path):
        recs = [fake_record(trial=t, seed=t) for t in range(3)]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        emit_results(recs, a)
        emit_results(recs, b)
        assert a.read_bytes() == b.read_bytes()

    def test_empty_table_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            emit_results([], tmp_path / "x.csv")

    def test_aggregate_group_counting(self, tmp_path):
        from hrisim.orchestrator import aggregate_records, TRIAL_METRICS
        recs = [fake_record(trial=t, hardware=hw, c=c, seed=t + c)
                for hw, c in (("signal", 4), ("signal", 8), ("power", 4))
                for t in range(3)]
        aggs = aggregate_records(recs)
        assert len(aggs) == 3 * len(TRIAL_METRICS)  # 3 groups, one row per metric
        path = tmp_path / "agg.csv"
        emit_aggregate(aggs, path)
        assert len(path.read_text().splitlines()) == 1 + len(aggs)

    def test_nine_significant_digits(self):
        assert fmt(0.123456789123) == "0.123456789"
        assert fmt(float("nan")) == "nan"
        assert fmt(np.float64(2.0)) == "2"
        assert fmt(True) == "1"


class TestCli:
    def test_help_lists_every_flag(self, capsys):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["--help"])
        out = capsys.readouterr().out
        for flag in ("--config", "--sweep", "--hardware", "--trials", "--seed",
                     "--no-hris", "--out", "--trace-channel", "--desk", "--figures"):
            assert flag in out

    def test_parse_sweep(self):
        assert parse_sweep("C=0,4,8") == [0, 4, 8]
        assert parse_sweep("0,16") == [0, 16]
        with pytest.raises(ConfigError):
            parse_sweep("C=a,b")

    def test_desk_run_end_to_end(self, tmp_path):
        out = tmp_path / "run1"
        rc = main(["--desk", "--trials", "2", "--sweep", "C=0,4", "--hardware",
                   "signal", "--seed", "7", "--out", str(out), "--trace-channel"])
        assert rc == 0
        for name in ("results.csv", "aggregate.csv", "probe.csv", "reflection.csv",
                     "trace.csv"):
            assert (out / name).exists(), name
        header = (out / "results.csv").read_text().splitlines()[0]
        assert header == ("trial,hardware,C_over_L,ue,mse_analytic,mse_empirical,"
                          "nmse,sinr_db,se,uatf_se,detected_count")

    def test_seeded_runs_byte_identical(self, tmp_path):
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            rc = main(["--desk", "--trials", "2", "--sweep", "C=0,4",
                       "--hardware", "power", "--seed", "3", "--out", str(out)])
            assert rc == 0
            outs.append((out / "results.csv").read_bytes())
        assert outs[0] == outs[1]

    def test_validation_error_exit_code(self, capsys):
        rc = main(["--sweep", "C=0,999"])
        assert rc == 2
        err = capsys.readouterr().err
        assert err.startswith("hrisim: error:")
        assert len(err.strip().splitlines()) == 1  # single-line diagnostic

    def test_figures_rendered(self, tmp_path):
        out = tmp_path / "figs"
        rc = main(["--desk", "--trials", "2", "--sweep", "C=0,4", "--hardware",
                   "both", "--out", str(out), "--figures"])
        assert rc == 0
        rendered = sorted(p.name for p in out.glob("*.png"))
        assert "detection_rate.png" in rendered
        assert "nmse.png" in rendered
        assert "se.png" in rendered
        assert "config_gap.png" in rendered

    def test_no_hris_flag(self, tmp_path):
        out = tmp_path / "nh"
        rc = main(["--desk", "--trials", "1", "--sweep", "C=0", "--hardware",
                   "signal", "--out", str(out), "--no-hris"])
        assert rc == 0
        rows = (out / "probe.csv").read_text().splitlines()[1:]
        assert all(row.split(",")[6] == "0" for row in rows)  # nothing detected
