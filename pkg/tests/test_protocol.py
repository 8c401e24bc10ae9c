import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from risra import protocol as pt
from risra.config import ScenarioConfig


class TestFrameTiming:
    def test_no_switching_time(self):
        t = pt.frame_timing(46, 12, 3, 1, 1, 1, 0.0, "tdma")
        assert t.t_tr == 46 and t.t_ac == 12 and t.t_ack == 3
        assert t.total == 61

    def test_ack_modes_hand_case(self):
        prec = pt.frame_timing(0, 0, 4, 1, 1, 1, 5.0, "prec")
        assert prec.t_ack == pytest.approx(9.0)
        tdma = pt.frame_timing(0, 0, 4, 1, 1, 1, 5.0, "tdma")
        assert tdma.t_ack == pytest.approx(24.0)

    def test_training_phase_hand_case(self):
        t = pt.frame_timing(46, 0, 0, 1, 1, 1, 1.0, "none")
        assert t.t_tr == pytest.approx(92.0)

    def test_zero_ack_slots(self):
        t = pt.frame_timing(10, 5, 0, 2, 1, 3, 2.0, "prec")
        assert t.t_ack == 0.0
        assert t.xi_ack == 0.0

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 50), st.integers(1, 50), st.integers(0, 20),
           st.floats(0, 10), st.sampled_from(["prec", "tdma"]))
    def test_total_is_sum_of_phases(self, c_tr, c_ac, c_ack, t_sw, mode):
        t = pt.frame_timing(c_tr, c_ac, c_ack, 1, 1, 1, t_sw, mode)
        assert t.total == pytest.approx(t.t_tr + t.t_ac + t.t_ack)
        # switching events per phase equal xi_i * C_i
        assert t.xi_tr * t.c_tr == c_tr
        if c_ack:
            expected = 1 if mode == "prec" else c_ack
            assert t.xi_ack * c_ack == pytest.approx(expected)


class TestLoad:
    def test_mean_and_dispersion(self):
        rng = np.random.default_rng(0)
        draws = np.array([pt.sample_load(rng, 50.0) for _ in range(100_000)])
        assert draws.mean() == pytest.approx(50.0, rel=0.01)
        assert draws.var() / draws.mean() == pytest.approx(1.0, abs=0.05)

    def test_vanishing_load(self):
        rng = np.random.default_rng(1)
        assert all(pt.sample_load(rng, 1e-12) == 0 for _ in range(100))
        with pytest.raises(ValueError):
            pt.sample_load(rng, 0.0)


BASE = ScenarioConfig(n_tr_mode="46", kappa=8.0, rho_ue_dbm=-10.0)


class TestRunFrame:
    def test_empty_frame(self):
        cfg = dataclasses.replace(BASE, kappa=1e-9)
        out = pt.run_frame(cfg, np.random.default_rng(0))
        assert out.k == 0
        assert out.decoded.count == 0
        assert out.acked is None
        assert out.timing.c_ack == 0
        assert out.success_count("ac") == 0

    def test_single_ue_noiseless_perfect_oracle(self):
        # force K = 1 via a seed scan, no noise, perfect reconstruction:
        # the lone UE must be decoded and acked in both ACK modes
        for mode in ("prec", "tdma"):
            cfg = dataclasses.replace(BASE, kappa=1.0, se_target=0.0,
                                      noise_dbm=float("-inf"), ack_mode=mode,
                                      policy="gscap")
            seed = next(s for s in range(100)
                        if np.random.default_rng(
                            np.random.SeedSequence(entropy=s, spawn_key=(0,))
                        ).poisson(1.0) == 1)
            rng = np.random.default_rng(np.random.SeedSequence(entropy=seed,
                                                               spawn_key=(0,)))
            out = pt.run_frame(cfg, rng)
            assert out.k == 1
            assert out.decoded.decoded_ues == {0}
            assert out.acked.acked == {0}
            assert out.timing.c_ack == 1

    def test_determinism_of_outcomes(self):
        cfg = dataclasses.replace(BASE, policy="carap", ack_mode="tdma")
        outs = []
        for _ in range(2):
            rng = np.random.default_rng(np.random.SeedSequence(entropy=9,
                                                               spawn_key=(4,)))
            outs.append(pt.run_frame(cfg, rng))
        a, b = outs
        assert a.k == b.k
        assert a.decoded.decoded_ues == b.decoded.decoded_ues
        assert a.acked.acked == b.acked.acked
        assert a.timing == b.timing
        assert a.access_sets == b.access_sets
        assert a.se_sample == b.se_sample

    def test_rrs_skips_training_everywhere(self):
        cfg = dataclasses.replace(BASE, policy="rrs-aloha", ack_mode="none")
        out = pt.run_frame(cfg, np.random.default_rng(3))
        assert out.timing.c_tr == 0
        assert out.timing.t_tr == 0.0
        assert np.isnan(out.se_sample)

    def test_acked_subset_of_decoded_subset_of_contenders(self):
        cfg = dataclasses.replace(BASE, kappa=20.0, ack_mode="tdma")
        for seed in range(5):
            out = pt.run_frame(cfg, np.random.default_rng(seed))
            assert out.decoded.decoded_ues <= out.contenders
            assert out.acked.acked <= out.decoded.decoded_ues

    def test_access_sets_respect_policy_sizes(self):
        for policy, rmax in (("gscap", 2), ("carap", 2), ("rrs-aloha", 2), ("smap", 2)):
            cfg = dataclasses.replace(BASE, policy=policy, r_replicas=2, kappa=12.0)
            out = pt.run_frame(cfg, np.random.default_rng(11))
            for aset in out.access_sets.values():
                assert 1 <= len(aset.slots) <= rmax
                assert all(0 <= s < out.timing.c_ac for s in aset.slots)

    def test_trace_keeps_reception(self):
        out = pt.run_frame(BASE, np.random.default_rng(2), trace=True)
        if out.k:
            assert out.reception is not None
            assert out.reception.signals.shape[0] == out.timing.c_ac


class TestCompilation:
    def test_codebooks_cached_across_frames(self):
        sc1 = pt.compile_scenario(BASE)
        sc2 = pt.compile_scenario(BASE)
        assert sc1 is sc2

    def test_n_ac_respects_bound(self):
        sc = pt.compile_scenario(dataclasses.replace(BASE, kappa=3.0))
        assert sc.n_ac == 12  # coverage lower bound dominates small loads
        sc2 = pt.compile_scenario(dataclasses.replace(BASE, kappa=80.0))
        assert sc2.n_ac == 80

    def test_power_policy_mode(self):
        sc = pt.compile_scenario(dataclasses.replace(BASE, power="policy"))
        assert sc.rho_k == pytest.approx(2.094121355747883e-06, rel=1e-9)

    def test_delta_tol_inversion(self):
        sc = pt.compile_scenario(dataclasses.replace(BASE, se_target=1e-2))
        # the estimate variance covers the budget above the interpolation floor
        expected = (1e-2 - sc.tse_norm) * sc.p_ref / sc.lambda_mean
        assert sc.delta_tol == pytest.approx(expected)
        floor = pt.compile_scenario(dataclasses.replace(BASE, se_target=1e-6))
        assert floor.delta_tol == 0.0

    def test_far_field_warning(self):
        pt.compile_scenario.cache_clear()
        with pytest.warns(UserWarning, match="far-field"):
            pt.compile_scenario(dataclasses.replace(BASE, kappa=5.0, seed=123))
