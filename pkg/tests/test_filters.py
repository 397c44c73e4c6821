"""Filter catalog closed forms, residual channels, and axiom checks."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import specqual as sq
from specqual.filters import residual_log_abs, residual_value

ALL_IDS = ["tikhonov", "tsvd", "ex3_exp", "ex4_log", "ex7_piecewise",
           "ex8_osc", "ex9_osc", "ex10_osc", "landweber", "showalter"]


def sample_grids(filt):
    alphas = np.geomspace(1e-6, filt.alpha_max / 2, 40)
    lam_hi = 10.0 if filt.lambda_sup is None else 0.9 * filt.lambda_sup
    lams = np.geomspace(1e-4, lam_hi, 40)
    return alphas, lams


class TestFilterValues:
    def test_tikhonov_point(self, tikhonov):
        assert sq.eval_g(tikhonov, 1.0, 1.0) == pytest.approx(0.5)

    def test_tsvd_truncates_below_threshold(self, tsvd):
        assert sq.eval_g(tsvd, 0.5, 0.25) == 0.0

    def test_tsvd_inverts_above_threshold(self, tsvd):
        assert sq.eval_g(tsvd, 0.5, 2.0) == pytest.approx(0.5)

    def test_unknown_filter(self):
        with pytest.raises(sq.UnknownFilterError):
            sq.get_filter("nonsense")

    def test_alpha_out_of_range(self, tikhonov):
        with pytest.raises(sq.ParameterRangeError):
            sq.eval_g(tikhonov, 1.5, 1.0)
        with pytest.raises(sq.ParameterRangeError):
            sq.eval_g(tikhonov, 0.0, 1.0)

    def test_landweber_lambda_range(self, landweber):
        with pytest.raises(sq.ParameterRangeError):
            sq.eval_g(landweber, 0.5, 3.0)  # beyond 1/mu = 2

    def test_aliases(self):
        assert sq.get_filter("ex3").id == "ex3_exp"
        assert sq.get_filter("ex9").id == "ex9_osc"


class TestResiduals:
    @pytest.mark.parametrize("fid", ALL_IDS)
    def test_residual_at_zero_is_one(self, fid):
        filt = sq.get_filter(fid)
        rv = sq.eval_residual(filt, filt.alpha_max / 3, 0.0)
        assert rv.value == pytest.approx(1.0)
        assert rv.log_abs == pytest.approx(0.0, abs=1e-12)

    def test_tikhonov_residual_point(self, tikhonov):
        rv = sq.eval_residual(tikhonov, 0.1, 0.9)
        assert rv.value == pytest.approx(0.1)

    def test_showalter_underflow_keeps_log_channel(self, showalter):
        rv = sq.eval_residual(showalter, 0.01, 10.0)
        assert rv.value == 0.0  # e^-1000 underflows
        assert rv.log_abs == pytest.approx(-1000.0)
        assert rv.sign == 1

    @pytest.mark.parametrize("fid", ALL_IDS)
    def test_definitional_identity(self, fid):
        """1 - lambda*g equals the closed residual form pointwise."""
        filt = sq.get_filter(fid)
        alphas, lams = sample_grids(filt)
        for a in alphas[::6]:
            for lm in lams[::6]:
                g = sq.eval_g(filt, float(a), float(lm))
                rv = sq.eval_residual(filt, float(a), float(lm))
                direct = 1.0 - lm * g
                if math.isfinite(direct) and math.isfinite(rv.value):
                    assert abs(direct - rv.value) < 1e-12 * max(1.0, abs(rv.value))

    @pytest.mark.parametrize("fid", ALL_IDS)
    def test_log_channel_reconstructs_value(self, fid):
        filt = sq.get_filter(fid)
        alphas, lams = sample_grids(filt)
        A, L = alphas[:, None], lams[None, :]
        vals = residual_value(filt, A, L)
        logs = residual_log_abs(filt, A, L)
        signs = filt._r_sign(A, L)
        ok = np.isfinite(vals) & (vals != 0)
        recon = signs[ok] * np.exp(logs[ok])
        np.testing.assert_allclose(recon, vals[ok], rtol=1e-12)

    def test_tsvd_exact_zero_one(self, tsvd):
        alphas = np.geomspace(1e-6, 0.5, 25)
        for a in alphas:
            assert sq.eval_residual(tsvd, float(a), float(a) * 1.5).value == 0.0
            assert sq.eval_residual(tsvd, float(a), float(a)).value == 0.0
            assert sq.eval_residual(tsvd, float(a), float(a) * 0.5).value == 1.0

    def test_tikhonov_closed_form(self, tikhonov):
        alphas = np.geomspace(1e-7, 0.5, 50)
        lams = np.geomspace(1e-3, 10, 30)
        got = residual_value(tikhonov, alphas[:, None], lams[None, :])
        want = alphas[:, None] / (alphas[:, None] + lams[None, :])
        np.testing.assert_allclose(got, want, rtol=1e-14)

    def test_piecewise_constant_branch_forms_agree(self, ex7):
        """The two published expressions for the inner-region filter value."""
        ln3 = math.log(3.0)
        for a in np.geomspace(1e-6, 0.499, 60):
            h2a = a / (a + math.log(a / (a + 2 * a)))
            lhs = (1.0 - h2a) / (2 * a + h2a)
            rhs = 1.0 / (2 * a - (a + 2 * a * a) / ln3)
            assert abs(lhs - rhs) <= 1e-10 * abs(rhs)

    def test_showalter_monotonicity_hypotheses(self, showalter):
        """Residual positive and decreasing in lambda; filter decreasing in alpha."""
        alphas = np.geomspace(1e-6, 0.5, 30)
        lams = np.geomspace(1e-4, 50.0, 120)
        R = residual_value(showalter, alphas[:, None], lams[None, :])
        assert np.all(R >= 0)
        logs = residual_log_abs(showalter, alphas[:, None], lams[None, :])
        assert np.all(np.diff(logs, axis=1) <= 1e-12)
        G = showalter._g(alphas[:, None], lams[None, :])
        assert np.all(np.diff(G, axis=0) <= 1e-12)


class TestAxioms:
    def test_tikhonov_passes_with_unit_bound(self, tikhonov):
        report = sq.verify_srm_axioms(tikhonov)
        assert report.all_pass
        assert report.h2_observed_sup <= 1.0 + 1e-9

    def test_log_filter_passes(self, ex4):
        report = sq.verify_srm_axioms(ex4)
        assert report.all_pass, report.failures

    def test_broken_family_fails_h2(self):
        broken = sq.make_custom_filter(
            "broken", lambda a, lm: 1.0 / a * np.ones(np.broadcast(a, lm).shape),
            alpha_max=1.0, h2_constant=5.0,
        )
        report = sq.verify_srm_axioms(broken)
        assert not report.h2_bounded
        assert any(f["axiom"] == "H2" for f in report.failures)

    @pytest.mark.parametrize("fid", ALL_IDS)
    def test_catalog_h2_bound_holds_on_default_grids(self, fid):
        filt = sq.get_filter(fid)
        report = sq.verify_srm_axioms(filt)
        assert report.h2_bounded, (fid, report.h2_observed_sup, filt.h2_constant)

    @pytest.mark.parametrize("fid", ALL_IDS)
    def test_catalog_h3_pointwise(self, fid):
        report = sq.verify_srm_axioms(sq.get_filter(fid))
        assert report.h3_pointwise, (fid, report.failures)


@settings(max_examples=30, deadline=None)
@given(
    fid=st.sampled_from(ALL_IDS),
    ax=st.floats(min_value=1e-5, max_value=0.9),
    lx=st.floats(min_value=1e-4, max_value=0.9),
)
def test_residual_identity_randomized(fid, ax, lx):
    """Random spot checks of r = 1 - lambda*g across the catalog."""
    filt = sq.get_filter(fid)
    alpha = ax * filt.alpha_max
    lam = lx * (filt.lambda_sup if filt.lambda_sup else 10.0)
    g = sq.eval_g(filt, alpha, lam)
    rv = sq.eval_residual(filt, alpha, lam)
    direct = 1.0 - lam * g
    if math.isfinite(direct) and math.isfinite(rv.value):
        assert abs(direct - rv.value) <= 1e-12 * max(1.0, abs(rv.value))
