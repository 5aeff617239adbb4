import math

import numpy as np
import pytest

from indoorchan import fields as F
from indoorchan import params as P
from indoorchan.tables import XCORR_ORDER


@pytest.fixture(scope="module")
def combined_los():
    return P.builtin_scenario("industrial_combined", "LOS")


@pytest.fixture(scope="module")
def fieldset(combined_los):
    return F.CorrelatedFieldSet(combined_los, seed=2024)


class TestNearestCorrelation:
    def test_identity_unchanged(self):
        rep = F.nearest_correlation(np.eye(8))
        assert rep.was_psd
        assert rep.max_abs_change == 0.0
        assert np.array_equal(rep.matrix, np.eye(8))

    def test_psd_boundary_unchanged(self):
        m = np.array([[1.0, -1.0], [-1.0, 1.0]])
        rep = F.nearest_correlation(m)
        assert rep.was_psd
        assert np.abs(rep.matrix - m).max() <= 1e-12

    def test_combined_los_table_is_psd_as_printed(self, combined_los):
        # eigendecomposition oracle: min eigenvalue 0.245, so no repair occurs
        assert np.linalg.eigvalsh(combined_los.cross_corr).min() > 0.2
        rep = F.nearest_correlation(combined_los.cross_corr)
        assert rep.was_psd
        assert rep.max_abs_change == 0.0

    def test_setup1_nlos_needs_small_repair(self):
        # eigendecomposition oracle: min eigenvalue -0.0028 as printed
        m = P.builtin_scenario("setup1", "NLOS").cross_corr
        assert np.linalg.eigvalsh(m).min() < 0.0
        rep = F.nearest_correlation(m)
        assert not rep.was_psd
        assert 0.0 < rep.max_abs_change <= 0.05
        assert np.linalg.eigvalsh(rep.matrix).min() >= 1e-7
        assert np.allclose(np.diag(rep.matrix), 1.0)

    def test_asymmetric_rejected(self):
        m = np.eye(3)
        m[0, 1] = 0.5
        with pytest.raises(ValueError, match="symmetric"):
            F.nearest_correlation(m)

    def test_out_of_range_rejected(self):
        m = np.eye(2)
        m[0, 1] = m[1, 0] = 1.5
        with pytest.raises(ValueError, match=r"\[-1, 1\]"):
            F.nearest_correlation(m)


class TestSqrtFactor:
    def test_identity(self):
        assert np.allclose(F.sqrt_factor(np.eye(5)), np.eye(5), atol=1e-12)

    def test_2x2_against_cholesky_oracle(self):
        m = np.array([[1.0, 0.5], [0.5, 1.0]])
        root = F.sqrt_factor(m)
        assert np.abs(root @ root.T - m).max() <= 1e-10
        # closed-form Cholesky oracle reconstructs the same product
        chol = np.array([[1.0, 0.0], [0.5, 0.8660254037844386]])
        assert np.abs(chol @ chol.T - m).max() <= 1e-12

    def test_repaired_table_reconstructs(self):
        m = P.builtin_scenario("setup1", "NLOS").cross_corr
        repaired = F.nearest_correlation(m).matrix
        root = F.sqrt_factor(repaired)
        assert np.abs(root @ root.T - repaired).max() <= 1e-10

    def test_non_psd_directs_to_repair(self):
        m = np.eye(3)
        m[0, 1] = m[1, 0] = 0.9
        m[0, 2] = m[2, 0] = 0.9
        m[1, 2] = m[2, 1] = -0.9
        with pytest.raises(ValueError, match="nearest_correlation"):
            F.sqrt_factor(m)

    def test_deterministic(self, combined_los):
        a = F.sqrt_factor(combined_los.cross_corr)
        b = F.sqrt_factor(combined_los.cross_corr)
        assert np.array_equal(a, b)


class TestFieldSampling:
    def test_same_position_identical(self, fieldset):
        a = fieldset.sample_standard_field("DS", (12.3, -4.5))
        b = fieldset.sample_standard_field("DS", (12.3, -4.5))
        assert a == b

    def test_unknown_lsp(self, fieldset):
        with pytest.raises(KeyError, match="unknown LSP"):
            fieldset.sample_standard_field("RSRP", (0.0, 0.0))

    def test_matches_sum_of_sinusoids_construction(self, combined_los):
        # the field value is exactly amp * sum cos(k . x + phase)
        fs = F.CorrelatedFieldSet(combined_los, seed=7, n_sinusoids=5)
        pos = np.array([3.0, -8.0])
        k = fs._wavevectors["SF"]
        ph = fs._phases["SF"]
        expected = math.sqrt(2.0 / 5.0) * np.cos(k @ pos + ph).sum()
        assert fs.sample_standard_field("SF", pos) == pytest.approx(expected, abs=1e-12)

    def test_marginal_moments(self, fieldset):
        # far-separated positions are effectively independent samples
        spacing = 30.0 * max(fieldset.lambdas.values())
        pos = np.column_stack([np.arange(20_000) * spacing, np.zeros(20_000)])
        z = fieldset.sample_standard_field("SF", pos)
        assert -0.05 <= z.mean() <= 0.05
        assert 0.9 <= z.var() <= 1.1

    def test_acf_at_lambda_and_beyond(self):
        lam = 15.0
        z1, z2 = F.field_acf_samples(lam, lam, 20_000, seed=99)
        assert np.corrcoef(z1, z2)[0, 1] == pytest.approx(math.exp(-1.0), abs=0.05)
        z1, z2 = F.field_acf_samples(lam, 10.0 * lam, 20_000, seed=100)
        assert abs(np.corrcoef(z1, z2)[0, 1]) <= 0.05

    def test_mix_reproduces_repaired_matrix(self, fieldset):
        target = fieldset.repair.matrix
        assert np.abs(fieldset.mix @ fieldset.mix.T - target).max() <= 1e-12


class TestLspAt:
    def test_zero_fields_give_the_mean(self, combined_los):
        real = F.realize_at(combined_los, np.zeros(8), (30.0, 0.0), (0.0, 0.0), 5.4, 2.0)
        for lsp in XCORR_ORDER:
            expected = P.eval_mean(combined_los.lsp[lsp], 5.4, 30.0, 2.0)
            assert real.value(lsp) == pytest.approx(expected, abs=1e-12)

    def test_deterministic(self, fieldset, combined_los):
        a = F.lsp_at(fieldset, combined_los, (10.0, 5.0), (0.0, 0.0), 3.5, 5.0)
        b = F.lsp_at(fieldset, combined_los, (10.0, 5.0), (0.0, 0.0), 3.5, 5.0)
        assert a == b

    def test_degenerate_distance_rejected(self, fieldset, combined_los):
        with pytest.raises(ValueError, match="coincide"):
            F.lsp_at(fieldset, combined_los, (1.0, 1.0), (1.0, 1.0), 3.5, 5.0)

    def test_absent_kf_realizes_none(self):
        office = P.builtin_scenario("office_38901", "NLOS")
        real = F.realize_at(office, np.zeros(8), (30.0, 0.0), (0.0, 0.0), 3.5, 3.0)
        assert real.kf is None

    def test_ds_kf_cross_correlation(self, combined_los):
        # standardized residuals of the realized values recover the mixed
        # field correlation; 5000 far-apart positions against Table values
        fs = F.CorrelatedFieldSet(combined_los, seed=31)
        n = 5000
        spacing = 20.0 * max(fs.lambdas.values())
        rx = np.column_stack([5.0 + np.arange(n) * spacing, np.zeros(n)])
        reals = F.lsp_track(fs, combined_los, rx, np.array([0.0, 0.0]), 5.4, 2.0)
        zs = {}
        for lsp in ("DS", "KF"):
            desc = combined_los.lsp[lsp]
            zs[lsp] = np.array([
                (r.value(lsp) - P.eval_mean(desc, r.f_ghz, r.d_2d, r.h_tx))
                / P.eval_std(desc, r.f_ghz, r.d_2d)
                for r in reals
            ])
        rho = np.corrcoef(zs["DS"], zs["KF"])[0, 1]
        assert rho == pytest.approx(-0.7, abs=0.1)

    def test_sf_separate_from_deterministic_pl(self, fieldset, combined_los):
        real = F.lsp_at(fieldset, combined_los, (25.0, 0.0), (0.0, 0.0), 3.5, 2.0)
        # SF is the zero-mean deviation; total loss = path_loss + sf
        assert abs(real.sf) < 6 * P.eval_std(combined_los.lsp["SF"], 3.5, 25.0)
        assert P.path_loss(combined_los, 3.5, 25.0) == pytest.approx(72.49, abs=0.01)
