import numpy as np
import pytest

from hrisim.channels import HrisConfig, build_channels
from hrisim.geometry import PathlossModel
from hrisim.orchestrator import generate_scenario, hris_array, bs_array
from hrisim.params import SystemParams
from hrisim.probe import (build_codebook, codebook_shape, detect_signal,
                          noiseless_best_directions, signal_probe, threshold_from_pfa)
from hrisim.reflect import (bs_alignment_config, config_gap, ideal_config,
                            reflection_config, uplink_config)


def unit_config(rng, n):
    return HrisConfig(phases=rng.uniform(0, 2 * np.pi, n), gains=np.ones(n))


class TestReflectionConfig:
    def test_single_ue_identity_bs(self):
        rng = np.random.default_rng(0)
        bs = HrisConfig.identity(8)
        ue = unit_config(rng, 8)
        out = reflection_config(bs, [ue])
        np.testing.assert_allclose(out.values, ue.values, atol=1e-14)

    def test_two_identical_csi_equal_single(self):
        rng = np.random.default_rng(1)
        bs = unit_config(rng, 8)
        ue = unit_config(rng, 8)
        one = reflection_config(bs, [ue])
        two = reflection_config(bs, [ue, ue])
        np.testing.assert_allclose(one.values, two.values, atol=1e-14)

    def test_three_ues_elementwise_oracle(self):
        rng = np.random.default_rng(2)
        n = 6
        bs = unit_config(rng, n)
        ues = [unit_config(rng, n) for _ in range(3)]
        out = reflection_config(bs, ues)
        for i in range(n):
            expected = np.conj(bs.values[i]) * (
                ues[0].values[i] + ues[1].values[i] + ues[2].values[i]) / 3.0
            assert abs(out.values[i] - expected) < 1e-14

    def test_empty_detected_set_specular_identity(self):
        bs = unit_config(np.random.default_rng(3), 8)
        out = reflection_config(bs, [])
        np.testing.assert_array_equal(out.gains, np.ones(8))
        np.testing.assert_array_equal(out.phases, np.zeros(8))

    def test_permutation_invariance(self):
        rng = np.random.default_rng(4)
        bs = unit_config(rng, 10)
        ues = [unit_config(rng, 10) for _ in range(4)]
        a = reflection_config(bs, ues)
        b = reflection_config(bs, [ues[i] for i in (2, 0, 3, 1)])
        np.testing.assert_allclose(a.values, b.values, atol=1e-14)

    def test_gains_contract_to_unit_interval(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            bs = unit_config(rng, 12)
            ues = [unit_config(rng, 12) for _ in range(rng.integers(1, 6))]
            out = reflection_config(bs, ues)
            assert np.all(out.gains <= 1.0 + 1e-12)
            assert np.all(out.gains >= 0.0)

    def test_gain_one_iff_colinear(self):
        rng = np.random.default_rng(6)
        bs = unit_config(rng, 8)
        ue = unit_config(rng, 8)
        out = reflection_config(bs, [ue, ue, ue])
        np.testing.assert_allclose(out.gains, 1.0, atol=1e-12)

    def test_weighted_average(self):
        rng = np.random.default_rng(7)
        bs = HrisConfig.identity(5)
        ues = [unit_config(rng, 5) for _ in range(2)]
        out = reflection_config(bs, ues, weights=[0.25, 0.75])
        expected = 0.25 * ues[0].values + 0.75 * ues[1].values
        np.testing.assert_allclose(out.values, expected, atol=1e-14)

    def test_size_mismatch_rejected(self):
        rng = np.random.default_rng(8)
        with pytest.raises(ValueError):
            reflection_config(unit_config(rng, 4), [unit_config(rng, 5)])


class TestIdealConfig:
    def test_all_detected_equals_achieved(self):
        rng = np.random.default_rng(9)
        bs = unit_config(rng, 8)
        ues = [unit_config(rng, 8) for _ in range(4)]
        np.testing.assert_allclose(reflection_config(bs, ues).values,
                                   ideal_config(bs, ues).values, atol=1e-14)

    def test_single_ue_phase_addition(self):
        rng = np.random.default_rng(10)
        bs = unit_config(rng, 8)
        ue = unit_config(rng, 8)
        out = ideal_config(bs, [ue])
        expected_phase = np.angle(np.exp(1j * (ue.phases - bs.phases)))
        np.testing.assert_allclose(np.angle(out.values), expected_phase, atol=1e-12)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            ideal_config(HrisConfig.identity(4), [])


class TestConfigGap:
    def test_equal_configs(self):
        cfg = unit_config(np.random.default_rng(11), 9)
        assert config_gap(cfg, cfg) == 0.0

    def test_opposite_phases(self):
        n = 16
        a = HrisConfig(phases=np.linspace(0, 2, n), gains=np.ones(n))
        b = HrisConfig(phases=a.phases + np.pi, gains=np.ones(n))
        assert config_gap(a, b) == pytest.approx(2 * np.sqrt(n), rel=1e-12)

    def test_scalar_loop_oracle(self):
        rng = np.random.default_rng(12)
        a = HrisConfig(phases=rng.uniform(0, 2 * np.pi, 7), gains=rng.uniform(0, 1, 7))
        b = HrisConfig(phases=rng.uniform(0, 2 * np.pi, 7), gains=rng.uniform(0, 1, 7))
        expected = np.sqrt(sum(abs(a.values[i] - b.values[i]) ** 2 for i in range(7)))
        assert config_gap(a, b) == pytest.approx(expected, rel=1e-14)

    def test_size_mismatch(self):
        with pytest.raises(ValueError):
            config_gap(HrisConfig.identity(3), HrisConfig.identity(4))

    def test_gap_invariant_under_conjugation(self):
        rng = np.random.default_rng(13)
        a, b = unit_config(rng, 8), unit_config(rng, 8)
        assert config_gap(uplink_config(a), uplink_config(b)) == \
            pytest.approx(config_gap(a, b), rel=1e-12)


class TestConjugation:
    def test_double_conjugation_is_involution(self):
        cfg = unit_config(np.random.default_rng(14), 6)
        back = uplink_config(uplink_config(cfg))
        np.testing.assert_allclose(back.values, cfg.values, atol=1e-15)

    def test_bs_alignment_unit_modulus(self):
        params = SystemParams(m_bs=4, k_ues=2, n_x=4, n_z=4, eta=0.8, rho=10.0,
                              sigma_b_sq=1e-6, sigma_hris_sq=1e-3, carrier_freq=28e9)
        sc = generate_scenario(60.0, 2, np.random.default_rng(0))
        cfg = bs_alignment_config(hris_array(params, sc), sc.bs_position,
                                  params.wavelength)
        np.testing.assert_allclose(cfg.gains, 1.0, atol=1e-14)


class TestReflectionResult:
    def test_optimized_flag(self):
        from hrisim.reflect import ReflectionResult
        rng = np.random.default_rng(15)
        cfg = unit_config(rng, 4)
        res = ReflectionResult(achieved=cfg, ideal=cfg, bs_csi=cfg,
                               frobenius_gap=0.0, n_detected=0)
        assert not res.optimized
        res = ReflectionResult(achieved=cfg, ideal=cfg, bs_csi=cfg,
                               frobenius_gap=0.0, n_detected=2)
        assert res.optimized


class TestGapShrinksWithProbingTime:
    def test_signal_based_high_snr_trend(self):
        # averaged gap between achieved and ideal configurations is
        # non-increasing over C in {4, 16, 64} at high probe SNR
        params = SystemParams(m_bs=4, k_ues=4, n_x=4, n_z=4, eta=0.8, rho=10.0,
                              sigma_b_sq=1e-6, sigma_hris_sq=1e-5, carrier_freq=28e9)
        plm = PathlossModel(shadow_std_db=0.0)
        gaps = {c: [] for c in (4, 16, 64)}
        for trial in range(60):
            for c in gaps:
                rng = np.random.default_rng(1000 + trial)
                sc = generate_scenario(100.0, params.k_ues, rng)
                geom_hris = hris_array(params, sc)
                cs = build_channels(sc, params, bs_array(params, sc), geom_hris, plm, rng)
                cb = build_codebook(*codebook_shape(c), geom_hris, params.wavelength)
                obs = signal_probe(cs, cb, params, c, rng)
                out = detect_signal(obs, cb, params.n_hris, c, params.sigma_hris_sq,
                                    threshold_from_pfa("signal", 1e-3))
                bs_csi = bs_alignment_config(geom_hris, sc.bs_position, params.wavelength)
                achieved = reflection_config(bs_csi, [out.csi_dirs[k]
                                                      for k in sorted(out.csi_dirs)])
                ideal = ideal_config(bs_csi, [cb.signal_csi_config(d)
                                              for d in noiseless_best_directions(cs, cb)])
                gaps[c].append(config_gap(achieved, ideal))
        means = [np.mean(gaps[c]) for c in (4, 16, 64)]
        assert means[0] >= means[1] - 1e-9
        assert means[1] >= means[2] - 1e-9
