import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from indoorchan import params as P
from indoorchan.tables import SCENARIO_NAMES, XCORR_ORDER


@pytest.fixture(scope="module")
def combined_los():
    return P.builtin_scenario("industrial_combined", "LOS")


@pytest.fixture(scope="module")
def combined_nlos():
    return P.builtin_scenario("industrial_combined", "NLOS")


class TestBuiltinTables:
    def test_table_values(self, combined_los, combined_nlos):
        assert combined_los.lsp["DS"].mu == -8.3
        assert combined_nlos.lsp["PL"].epsilon == 24.1
        assert combined_los.xcorr("DS", "KF") == -0.7
        assert combined_nlos.xcorr("DS", "KF") == -0.6

    def test_unknown_scenario(self):
        with pytest.raises(KeyError, match="unknown scenario"):
            P.builtin_scenario("warehouse", "LOS")

    def test_all_tables_satisfy_invariants(self):
        for name in SCENARIO_NAMES:
            for cond in ("LOS", "NLOS"):
                t = P.builtin_scenario(name, cond)
                m = t.cross_corr
                assert np.array_equal(m, m.T)
                assert np.all(np.diag(m) == 1.0)
                assert np.abs(m).max() <= 1.0
                assert t.r_tau > 1.0
                for desc in t.lsp.values():
                    assert desc.lambda_m >= 0.0

    def test_office_nlos_kf_absent(self):
        t = P.builtin_scenario("office_38901", "NLOS")
        assert "KF" not in t.lsp
        # the reference table omits the office XPR decorrelation distance
        assert P.builtin_scenario("office_38901", "LOS").lsp["XPR"].lambda_m == 0.0

    def test_gray_constants_are_fixed(self):
        s1 = P.builtin_scenario("setup1", "LOS")
        assert s1.lsp["PL"].gamma == 20.0
        assert "gamma" in s1.lsp["PL"].fixed
        combined = P.builtin_scenario("industrial_combined", "LOS")
        assert "gamma" not in combined.lsp["PL"].fixed
        # coefficients without a table row are fixed at zero
        assert combined.lsp["DS"].epsilon == 0.0
        assert "epsilon" in combined.lsp["DS"].fixed

    def test_delay_factor(self, combined_los, combined_nlos):
        assert combined_los.r_tau == 2.7
        assert combined_nlos.r_tau == 3.0


class TestScalingLaw:
    def test_mean_at_reference_point_is_mu(self, combined_los):
        for desc in combined_los.lsp.values():
            assert P.eval_mean(desc, 1.0, 1.0, 1.0) == desc.mu

    def test_kf_anchor_setup1(self):
        desc = P.builtin_scenario("setup1", "LOS").lsp["KF"]
        assert P.eval_mean(desc, 1.0, 1.0, 2.0) == pytest.approx(
            -3.315870975284693, abs=1e-12
        )

    def test_ds_mean_direct_substitution(self, combined_los):
        got = P.eval_mean(combined_los.lsp["DS"], 5.4, 50.0, 2.0)
        assert got == pytest.approx(-7.22967916474771, abs=1e-12)

    def test_std_direct_substitution(self, combined_nlos):
        got = P.eval_std(combined_nlos.lsp["SF"], 5.4, 1.0)
        assert got == pytest.approx(3.4570403434423507, abs=1e-12)

    def test_std_without_dependence_is_sigma(self):
        desc = P.LspDescriptor(sigma=0.4)
        assert P.eval_std(desc, 3.3, 77.0) == 0.4

    def test_std_clamps_at_zero(self):
        desc = P.LspDescriptor(sigma=-0.11)
        assert P.eval_std(desc, 2.0, 10.0) == 0.0

    def test_nonpositive_covariates_rejected(self, combined_los):
        desc = combined_los.lsp["DS"]
        with pytest.raises(ValueError, match="positive"):
            P.eval_mean(desc, 0.0, 10.0, 2.0)
        with pytest.raises(ValueError, match="positive"):
            P.eval_std(desc, 2.0, -1.0)

    def test_realize_at_zero_is_mean(self, combined_los):
        desc = combined_los.lsp["KF"]
        assert P.realize_lsp(desc, 3.5, 20.0, 2.0, 0.0) == P.eval_mean(desc, 3.5, 20.0, 2.0)

    def test_realize_unit_draw(self):
        desc = P.LspDescriptor(mu=-7.5, sigma=0.2)
        assert P.realize_lsp(desc, 2.0, 30.0, 4.0, 1.0) == pytest.approx(-7.3)

    def test_realize_monte_carlo_mean(self, combined_los):
        desc = combined_los.lsp["DS"]
        rng = np.random.default_rng(404)
        n = 20_000
        draws = [P.realize_lsp(desc, 5.4, 50.0, 2.0, x) for x in rng.standard_normal(n)]
        mean = P.eval_mean(desc, 5.4, 50.0, 2.0)
        std = P.eval_std(desc, 5.4, 50.0)
        assert abs(np.mean(draws) - mean) < 3.0 * std / math.sqrt(n)

    @given(
        f=st.floats(0.5, 10.0),
        d=st.floats(1.0, 500.0),
        h=st.floats(1.0, 10.0),
    )
    @settings(max_examples=50, deadline=None)
    def test_mean_is_log_linear_in_frequency(self, f, d, h):
        desc = P.builtin_scenario("industrial_combined", "LOS").lsp["DS"]
        gap = P.eval_mean(desc, 10.0 * f, d, h) - P.eval_mean(desc, f, d, h)
        assert gap == pytest.approx(desc.gamma, abs=1e-9)


class TestPathLoss:
    @pytest.mark.parametrize(
        "name,cond,expected",
        [
            ("industrial_combined", "LOS", 78.0),
            ("industrial_combined", "NLOS", 83.9),
            ("office_38901", "NLOS", 95.9),
        ],
    )
    def test_anchor_values(self, name, cond, expected):
        table = P.builtin_scenario(name, cond)
        assert P.path_loss(table, 3.5, 50.0) == pytest.approx(expected, abs=0.1)

    def test_no_height_term(self, combined_los):
        assert combined_los.lsp["PL"].zeta == 0.0

    def test_frequency_gap_matches_free_space_scaling(self):
        desc = P.LspDescriptor(mu=30.0, gamma=20.0)
        gap = P.eval_mean(desc, 5.4, 1.0, 1.0) - P.eval_mean(desc, 2.37, 1.0, 1.0)
        assert gap == pytest.approx(7.15, abs=0.01)

    @given(d1=st.floats(1.0, 300.0), d2=st.floats(1.0, 300.0))
    @settings(max_examples=50, deadline=None)
    def test_monotone_in_distance(self, d1, d2):
        table = P.builtin_scenario("industrial_combined", "LOS")
        if d1 < d2:
            assert P.path_loss(table, 3.5, d1) < P.path_loss(table, 3.5, d2)


class TestD2dConsistency:
    @pytest.mark.parametrize("cond", ["LOS", "NLOS"])
    def test_azimuth_departure_equals_arrival_at_2m(self, cond):
        t = P.builtin_scenario("industrial_combined", cond)
        asd = P.eval_mean(t.lsp["ASD"], 3.5, 1.0, 2.0)
        assert abs(asd - t.lsp["ASA"].mu) <= 0.01

    @pytest.mark.parametrize("cond", ["LOS", "NLOS"])
    def test_elevation_departure_equals_arrival_at_2m(self, cond):
        t = P.builtin_scenario("industrial_combined", cond)
        esd = P.eval_mean(t.lsp["ESD"], 3.5, 1.0, 2.0)
        esa = P.eval_mean(t.lsp["ESA"], 3.5, 1.0, 2.0)
        assert abs(esd - esa) <= 0.01


class TestScenarioIO:
    @pytest.mark.parametrize("name", SCENARIO_NAMES)
    @pytest.mark.parametrize("cond", ["LOS", "NLOS"])
    def test_round_trip_identity(self, name, cond):
        table = P.builtin_scenario(name, cond)
        again = P.load_scenario(P.save_scenario(table))
        assert again == table
        for lsp, desc in table.lsp.items():
            assert again.lsp[lsp].fixed == desc.fixed

    def test_out_of_range_correlation_rejected(self, combined_los):
        text = P.save_scenario(combined_los).replace(
            "xcorr DS KF = -0.7", "xcorr DS KF = 1.2"
        )
        with pytest.raises(P.ScenarioFormatError, match="DS KF"):
            P.load_scenario(text)

    def test_missing_kf_block_loads_as_absent(self, combined_los):
        lines = [
            ln for ln in P.save_scenario(combined_los).splitlines()
            if not ln.startswith("KF_")
        ]
        table = P.load_scenario("\n".join(lines))
        assert "KF" not in table.lsp

    def test_unknown_key_rejected_with_line_number(self, combined_los):
        text = P.save_scenario(combined_los) + "DS_slope = 1.0\n"
        with pytest.raises(P.ScenarioFormatError, match=r"line \d+.*DS_slope"):
            P.load_scenario(text)

    def test_bad_r_tau_rejected(self, combined_los):
        text = P.save_scenario(combined_los).replace("r_tau = 2.7", "r_tau = 0.9")
        with pytest.raises(P.ScenarioFormatError, match="r_tau"):
            P.load_scenario(text)

    def test_comments_and_blank_lines_ignored(self, combined_los):
        text = "# leading comment\n\n" + P.save_scenario(combined_los)
        assert P.load_scenario(text) == combined_los

    def test_two_sections_need_explicit_condition(self, combined_los, combined_nlos):
        los = P.save_scenario(combined_los)
        nlos_section = P.save_scenario(combined_nlos).split("[NLOS]", 1)[1]
        both = los + "\n[NLOS]" + nlos_section
        with pytest.raises(P.ScenarioFormatError, match="both conditions"):
            P.load_scenario(both)
        assert P.load_scenario(both, condition="NLOS") == combined_nlos
