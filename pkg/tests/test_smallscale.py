import math
from types import SimpleNamespace

import numpy as np
import pytest

from indoorchan import analysis as A
from indoorchan import fields as F
from indoorchan import params as P
from indoorchan import smallscale as S


@pytest.fixture(scope="module")
def combined_los():
    return P.builtin_scenario("industrial_combined", "LOS")


@pytest.fixture(scope="module")
def realization(combined_los):
    # field values forced to zero: every LSP sits at its scaling-law mean
    return F.realize_at(combined_los, np.zeros(8), (50.0, 0.0), (0.0, 0.0), 5.4, 2.0)


class _OnesRng:
    """Test hook: uniform draws of 0 make draw_delays see u = 1 exactly."""

    def random(self, n):
        return np.zeros(n)


class _QuietRng:
    """Test hook: zero ripple, so the power profile is purely exponential."""

    def normal(self, loc, scale, n):
        return np.zeros(n)


class TestDrawDelays:
    def test_forced_uniform_draws_give_zero_delays(self):
        delays = S.draw_delays(10, 50e-9, 3.0, _OnesRng())
        assert np.array_equal(delays, np.zeros(10))

    def test_pre_weighting_standard_deviation(self):
        rng = np.random.default_rng(11)
        delays = S.draw_delays(100_000, 80e-9, 3.0, rng)
        assert np.std(delays) == pytest.approx(240e-9, rel=0.02)

    def test_sorted_and_anchored(self):
        delays = S.draw_delays(500, 30e-9, 2.7, np.random.default_rng(0))
        assert delays[0] == 0.0
        assert np.all(np.diff(delays) >= 0)

    def test_invalid_arguments(self):
        rng = np.random.default_rng(0)
        with pytest.raises(ValueError):
            S.draw_delays(1, 50e-9, 3.0, rng)
        with pytest.raises(ValueError):
            S.draw_delays(10, -1e-9, 3.0, rng)
        with pytest.raises(ValueError):
            S.draw_delays(10, 50e-9, 1.0, rng)


class TestDrawPowers:
    def test_zero_db_k_factor_gives_half_power_direct(self):
        delays = S.draw_delays(25, 50e-9, 2.7, np.random.default_rng(3))
        powers = S.draw_powers(delays, 50e-9, 2.7, 0.0, np.random.default_rng(4))
        assert powers[0] == pytest.approx(0.5, abs=1e-12)
        assert powers.sum() == pytest.approx(1.0, abs=1e-12)

    def test_absent_k_factor_keeps_pure_profile(self):
        delays = S.draw_delays(25, 50e-9, 2.7, np.random.default_rng(3))
        powers = S.draw_powers(delays, 50e-9, 2.7, None, _QuietRng())
        expected = np.exp(-delays * 1.7 / (2.7 * 50e-9))
        assert np.allclose(powers, expected / expected.sum(), atol=1e-12)

    def test_realized_delay_spread_hits_target(self, combined_los, realization):
        # 1e5 paths: the spread of one huge set converges to the ensemble value
        rng = np.random.default_rng(8)
        ds = 10.0 ** -7.23
        delays = S.draw_delays(100_000, ds, 2.7, rng)
        powers = S.draw_powers(delays, ds, 2.7, realization.kf, rng)
        delays = S.match_delay_spread(delays, powers, ds)
        got = A.rms_ds(SimpleNamespace(delays=delays, powers=powers))
        assert got == pytest.approx(ds, rel=0.10)


class TestDrawAngles:
    def test_single_path_sits_on_los_direction(self):
        out = S.draw_angles(1, [1.0], (30.0, 30.0, 10.0, 10.0),
                            (45.0, -135.0, 5.0, -5.0), np.random.default_rng(1))
        assert out["aod"][0] == 45.0
        assert out["aoa"][0] == -135.0
        assert A.rms_angular_spread(out["aod"], [1.0]) == 0.0

    def test_target_spread_recovered_exactly(self):
        target = 10.0 ** 1.69  # combined LOS azimuth-arrival mean, ~49 deg
        powers = np.full(25, 1.0 / 25.0)
        out = S.draw_angles(25, powers, (target, target, 10.0, 10.0),
                            (0.0, 0.0, 0.0, 0.0), np.random.default_rng(2))
        got = A.rms_angular_spread(out["aoa"], powers, "azimuth")
        assert got == pytest.approx(target, abs=0.5)
        assert got == pytest.approx(target, rel=1e-5)

    def test_elevation_spread_exact_and_clipped(self):
        powers = np.full(40, 1.0 / 40.0)
        out = S.draw_angles(40, powers, (10.0, 10.0, 20.0, 20.0),
                            (0.0, 0.0, 0.0, 0.0), np.random.default_rng(5))
        got = A.rms_angular_spread(out["eoa"], powers, "elevation")
        assert got == pytest.approx(20.0, rel=1e-9)
        assert np.all(np.abs(out["eoa"]) <= 90.0)

    def test_excessive_target_clamped_with_warning(self):
        powers = np.full(25, 1.0 / 25.0)
        with pytest.warns(RuntimeWarning, match="clamped"):
            S.draw_angles(25, powers, (150.0, 30.0, 10.0, 10.0),
                          (0.0, 0.0, 0.0, 0.0), np.random.default_rng(6))

    def test_azimuths_wrapped_into_range(self):
        out = S.draw_angles(25, np.full(25, 0.04), (60.0, 60.0, 10.0, 10.0),
                            (175.0, -175.0, 0.0, 0.0), np.random.default_rng(7))
        for key in ("aod", "aoa"):
            assert np.all(out[key] > -180.0)
            assert np.all(out[key] <= 180.0)


class TestPolarization:
    def _plain_pathset(self, n=5, los=False):
        delays = np.sort(np.r_[0.0, np.random.default_rng(1).uniform(1e-9, 1e-7, n - 1)])
        return S.PathSet(
            delays=delays, powers=np.full(n, 1.0 / n),
            aod=np.zeros(n), aoa=np.zeros(n), eod=np.zeros(n), eoa=np.zeros(n),
            xpr_db=np.full(n, np.inf), phases=np.zeros((n, 2, 2)), los_flag=los,
        )

    def test_infinite_xpr_is_pure_co_polar(self):
        ps = S.apply_polarization(self._plain_pathset(), float("inf"), 0.0,
                                  np.random.default_rng(2))
        c = ps.coupling()
        assert np.all(np.abs(c[:, 0, 1]) == 0.0)
        assert np.all(np.abs(c[:, 1, 0]) == 0.0)
        assert np.allclose(np.abs(c[:, 0, 0]), 1.0)

    def test_zero_db_xpr_equal_co_and_cross(self):
        ps = S.apply_polarization(self._plain_pathset(), 0.0, 0.0,
                                  np.random.default_rng(3))
        c = ps.coupling()
        assert np.allclose(np.abs(c[:, 0, 1]), np.abs(c[:, 0, 0]))

    def test_combined_los_mean_at_2m(self, combined_los):
        got = P.eval_mean(combined_los.lsp["XPR"], 1.0, 1.0, 2.0)
        assert got == pytest.approx(15.445365019512085, abs=1e-12)

    def test_los_path_keeps_identity_coupling(self):
        ps = S.apply_polarization(self._plain_pathset(los=True), 10.0, 3.0,
                                  np.random.default_rng(4))
        assert math.isinf(ps.xpr_db[0])
        assert np.isfinite(ps.xpr_db[1:]).all()


class TestPathSetInvariants:
    def test_unsorted_delays_rejected(self):
        with pytest.raises(ValueError, match="sorted"):
            S.PathSet(
                delays=[0.0, 3e-9, 2e-9], powers=[0.4, 0.3, 0.3],
                aod=[0, 0, 0], aoa=[0, 0, 0], eod=[0, 0, 0], eoa=[0, 0, 0],
                xpr_db=[10, 10, 10], phases=np.zeros((3, 2, 2)),
            )

    def test_power_sum_enforced(self):
        with pytest.raises(ValueError, match="sum to 1"):
            S.PathSet(
                delays=[0.0, 1e-9], powers=[0.7, 0.4],
                aod=[0, 0], aoa=[0, 0], eod=[0, 0], eoa=[0, 0],
                xpr_db=[10, 10], phases=np.zeros((2, 2, 2)),
            )

    def test_synthesized_sets_satisfy_invariants(self, combined_los, realization):
        for i in range(50):
            rng = np.random.default_rng(i)
            ps, _ = S.synthesize_pathset(realization, combined_los, (0.0, 0.0), rng)
            assert ps.delays[0] == 0.0
            assert np.all(np.diff(ps.delays) >= 0)
            assert abs(ps.powers.sum() - 1.0) <= 1e-9
            assert ps.los_flag

    def test_absent_kf_gives_rayleigh_pathset(self):
        office = P.builtin_scenario("office_38901", "NLOS")
        real = F.realize_at(office, np.zeros(8), (30.0, 0.0), (0.0, 0.0), 3.5, 3.0)
        ps, _ = S.synthesize_pathset(real, office, (0.0, 0.0), np.random.default_rng(5))
        assert not ps.los_flag
        assert np.isfinite(ps.xpr_db).all()


class TestCir:
    def _single_path(self, delay_taps, bandwidth=200e6):
        delays = np.array([0.0]) if delay_taps == 0 else np.array([0.0, delay_taps / bandwidth])
        n = delays.size
        powers = np.zeros(n)
        powers[-1] = 1.0
        return S.PathSet(
            delays=delays, powers=powers,
            aod=np.zeros(n), aoa=np.zeros(n), eod=np.zeros(n), eoa=np.zeros(n),
            xpr_db=np.full(n, np.inf), phases=np.zeros((n, 2, 2)),
        )

    def test_path_at_zero_fills_tap_zero(self):
        cir = S.to_cir(self._single_path(0), 200e6, 64)
        assert abs(cir.taps[0, 0, 0]) == pytest.approx(1.0, abs=1e-12)
        assert np.abs(cir.taps[0, 0, 1:]).max() <= 1e-12
        assert cir.captured_energy[0, 0] == pytest.approx(1.0, abs=1e-12)

    def test_fractional_delay_energy_against_sinc_oracle(self):
        # unit path at 1.5 tap spacings; expected in-window energy is the
        # partial sum of sinc^2 evaluated directly
        n_taps = 840
        cir = S.to_cir(self._single_path(1.5), 200e6, n_taps)
        expected = float(np.sum(np.sinc(np.arange(n_taps) - 1.5) ** 2))
        got = float(np.sum(np.abs(cir.taps[0, 0]) ** 2))
        assert got == pytest.approx(expected, abs=1e-12)
        assert cir.captured_energy[0, 0] == pytest.approx(expected, abs=1e-12)
        assert cir.captured_energy[0, 0] == pytest.approx(1.0, abs=1e-3)
        assert cir.leaked_energy[0, 0] == pytest.approx(1.0 - expected, abs=1e-12)

    def test_pre_cursor_offset_recovers_left_tail(self):
        plain = S.to_cir(self._single_path(0.5), 200e6, 512)
        shifted = S.to_cir(self._single_path(0.5), 200e6, 512, tap_offset_s=-64 / 200e6)
        assert shifted.captured_energy[0, 0] > plain.captured_energy[0, 0]
        assert shifted.captured_energy[0, 0] == pytest.approx(1.0, abs=2e-4)

    def test_too_few_taps_flagged(self):
        with pytest.raises(ValueError, match="n_taps"):
            S.to_cir(self._single_path(100.0), 200e6, 50)

    def test_max_cir_window_of_the_sounder(self):
        # 4.2 us at 200 MHz needs at least 840 taps
        assert math.ceil(4.2e-6 * 200e6) == 840


class TestFreqResponse:
    def test_single_unit_path_is_flat(self):
        ps = TestCir()._single_path(0)
        h = S.freq_response(ps, 5.4e9, 128, 200e6)
        assert np.allclose(np.abs(h[0, 0]), 1.0, atol=1e-12)

    def test_two_ray_null_position(self):
        dt = 20e-9
        ps = S.PathSet(
            delays=[0.0, dt], powers=[0.5, 0.5],
            aod=[0, 0], aoa=[0, 0], eod=[0, 0], eoa=[0, 0],
            xpr_db=[np.inf, np.inf], phases=np.zeros((2, 2, 2)),
        )
        n_bins = 400
        bw = 100e6
        h = S.freq_response(ps, 0.0, n_bins, bw)
        f = (np.arange(n_bins) - n_bins // 2) * (bw / n_bins)
        null_bin = np.argmin(np.abs(f - 1.0 / (2.0 * dt)))
        assert np.abs(h[0, 0, null_bin]) <= 1e-6

    def test_parseval_on_grid_aligned_pathset(self):
        # delays on the bin grid make the cross terms vanish exactly
        rng = np.random.default_rng(17)
        bw, n = 200e6, 256
        n_paths = 20
        taps = np.sort(rng.choice(np.arange(1, 200), n_paths - 1, replace=False))
        delays = np.r_[0.0, taps / bw]
        powers = rng.dirichlet(np.ones(n_paths))
        ps = S.PathSet(
            delays=delays, powers=powers,
            aod=np.zeros(n_paths), aoa=np.zeros(n_paths),
            eod=np.zeros(n_paths), eoa=np.zeros(n_paths),
            xpr_db=np.full(n_paths, np.inf),
            phases=rng.uniform(0, 2 * np.pi, (n_paths, 2, 2)),
        )
        h = S.freq_response(ps, 0.0, n, bw)
        mean_h2 = float(np.mean(np.abs(h[0, 0]) ** 2))
        assert mean_h2 == pytest.approx(1.0, rel=1e-6)
        cir = S.to_cir(ps, bw, 256)
        tap_energy = float(np.sum(np.abs(cir.taps[0, 0]) ** 2))
        assert tap_energy == pytest.approx(mean_h2, rel=1e-6)


class TestStatisticalRoundTrip:
    def test_means_match_targets(self, combined_los, realization):
        n_sets = 400
        ds_sum = kf_sum = asa_sum = 0.0
        for i in range(n_sets):
            rng = np.random.default_rng([77, i])
            ps, los_delay = S.synthesize_pathset(realization, combined_los, (0.0, 0.0), rng)
            ds_sum += A.rms_ds(ps)
            kf_sum += A.kf_est(ps, los_delay, delay_offset_s=los_delay)
            asa_sum += A.rms_angular_spread(ps.aoa, ps.powers, "azimuth")
        assert ds_sum / n_sets == pytest.approx(10.0 ** realization.ds, rel=0.10)
        assert abs(kf_sum / n_sets - realization.kf) <= 1.0
        assert asa_sum / n_sets == pytest.approx(10.0 ** realization.asa, rel=0.10)
