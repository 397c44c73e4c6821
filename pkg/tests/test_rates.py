"""Certification of rate/source functions and the origin comparators."""

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import specqual as sq
from specqual.rates import default_order_grid

EX4_GRID = np.geomspace(1e-7, 0.15, 448)


class TestOrderCertification:
    def test_monotone_power_certifies(self):
        assert sq.certify_order_fn("alpha^2").certified

    def test_reciprocal_log_certifies_on_its_range(self):
        """The log-decay order shrinks by less than 1000x over the whole
        representable range, so the far-tail probe is what admits it."""
        assert sq.certify_order_fn("-1/ln(alpha)", EX4_GRID).certified

    def test_non_vanishing_function_rejected(self):
        assert not sq.certify_order_fn("1+alpha").certified

    def test_decreasing_function_rejected(self):
        assert not sq.certify_order_fn("1/(1+alpha)-0.5").certified

    def test_small_power_certifies(self):
        assert sq.certify_order_fn("alpha^0.25").certified

    def test_iteration_rate_certifies(self):
        assert sq.certify_order_fn("(1-0.5*sqrt(alpha))^(1/alpha)").certified

    def test_wrong_variable_raises(self):
        with pytest.raises(sq.DomainError):
            sq.certify_order_fn("lambda")


class TestSourceCertification:
    def test_square_root(self):
        assert sq.certify_source_fn("lambda^0.5").certified

    def test_rational(self):
        assert sq.certify_source_fn("lambda/(1+lambda)").certified

    def test_constant_rejected(self):
        assert not sq.certify_source_fn("1").certified

    def test_quarter_power(self):
        assert sq.certify_source_fn("lambda^0.25").certified


class TestEvalLog:
    def test_exp_root_uses_closed_form(self, rho_exp):
        assert rho_exp.log_at(0.001) == pytest.approx(-1000.0)

    def test_plain_power(self, rho_alpha):
        assert rho_alpha.log_at(0.001) == pytest.approx(math.log(0.001))

    def test_exp_sqrt_underflow_range(self, rho_exp_sqrt):
        assert rho_exp_sqrt.log_at(1e-6) == pytest.approx(-1000.0)

    def test_agrees_with_log_of_value_where_representable(self):
        """eval_log == ln(eval) to 1e-12 relative wherever the plain value
        is representable and positive."""
        grid = np.geomspace(1e-4, 0.25, 200)
        for text in ("alpha", "alpha^0.5", "alpha^2", "exp(-1/alpha)",
                     "-1/ln(alpha)", "(1-0.5*sqrt(alpha))^(1/alpha)"):
            fn = sq.certify_order_fn(text, EX4_GRID)
            vals = fn.at(grid)
            lv = fn.log_at(grid)
            ok = np.isfinite(vals) & (vals > 0)
            np.testing.assert_allclose(lv[ok], np.log(vals[ok]), rtol=1e-12,
                                       err_msg=text)


class TestComparators:
    def test_linear_precedes_square_root(self, rho_alpha, rho_sqrt_alpha):
        assert sq.precedes(rho_alpha, rho_sqrt_alpha).holds

    def test_square_root_does_not_precede_linear(self, rho_alpha, rho_sqrt_alpha):
        verdict = sq.precedes(rho_sqrt_alpha, rho_alpha)
        assert not verdict.holds
        assert verdict.witness_alpha is not None

    def test_reflexive_with_unit_constant(self, rho_alpha):
        verdict = sq.precedes(rho_alpha, rho_alpha)
        assert verdict.holds
        assert verdict.constant == pytest.approx(1.0)

    def test_rational_equivalent_to_linear(self, rho_alpha):
        near_linear = sq.order_fn("alpha/(1+alpha)")
        assert sq.equivalent_at_origin(near_linear, rho_alpha).holds

    def test_linear_not_equivalent_to_square_root(self, rho_alpha, rho_sqrt_alpha):
        assert not sq.equivalent_at_origin(rho_alpha, rho_sqrt_alpha).holds

    def test_self_equivalence(self, rho_exp):
        assert sq.equivalent_at_origin(rho_exp, rho_exp).holds


@pytest.fixture(scope="module")
def catalog():
    return {
        text: sq.certify_order_fn(text, EX4_GRID)
        for text in ("alpha", "alpha^0.5", "alpha^2",
                     "exp(-1/alpha)", "-1/ln(alpha)")
    }


class TestComparatorAlgebra:
    """Ordering structure over the five-function catalog set."""

    def test_reflexivity(self, catalog):
        for fn in catalog.values():
            assert sq.precedes(fn, fn).holds

    def test_transitivity(self, catalog):
        fns = list(catalog.values())
        for f, g, h in itertools.product(fns, repeat=3):
            if sq.precedes(f, g).holds and sq.precedes(g, h).holds:
                assert sq.precedes(f, h).holds, (f.label, g.label, h.label)

    def test_equivalence_relation(self, catalog):
        fns = list(catalog.values())
        for f in fns:
            assert sq.equivalent_at_origin(f, f).holds
        for f, g in itertools.product(fns, repeat=2):
            fwd = sq.equivalent_at_origin(f, g).holds
            bwd = sq.equivalent_at_origin(g, f).holds
            assert fwd == bwd
            # distinct members of this set are never equivalent
            if f is not g:
                assert not fwd, (f.label, g.label)

    def test_expected_order(self, catalog):
        expected = [
            ("exp(-1/alpha)", "alpha^2"), ("alpha^2", "alpha"),
            ("alpha", "alpha^0.5"), ("alpha^0.5", "-1/ln(alpha)"),
        ]
        for lo, hi in expected:
            assert sq.precedes(catalog[lo], catalog[hi]).holds
            assert not sq.precedes(catalog[hi], catalog[lo]).holds


class TestTabulated:
    def test_loglog_interpolation_recovers_power_law(self):
        lams = np.geomspace(0.01, 10, 13)
        tab = sq.TabulatedSource(lambdas=lams, log_values=0.5 * np.log(lams))
        probe = np.geomspace(0.005, 20.0, 57)
        np.testing.assert_allclose(tab.at(probe), np.sqrt(probe), rtol=1e-12)

    def test_order_table_underflow_safe(self):
        alphas = np.geomspace(1e-7, 0.5, 65)
        tab = sq.TabulatedOrder(alphas=alphas, log_values=-1.0 / alphas)
        assert tab.log_at(1e-7) == pytest.approx(-1e7)
        assert tab.at(1e-7) == 0.0  # underflows as a double, by design


@settings(max_examples=40, deadline=None)
@given(
    exponent=st.floats(min_value=0.1, max_value=3.0),
    scale=st.floats(min_value=0.1, max_value=10.0),
)
def test_power_laws_always_certify_and_self_precede(exponent, scale):
    text = f"{scale!r}*alpha^{exponent!r}"
    fn = sq.certify_order_fn(text)
    assert fn.certified
    verdict = sq.precedes(fn, fn)
    assert verdict.holds and verdict.constant == pytest.approx(1.0)
