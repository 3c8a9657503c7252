import math

import pytest
from hypothesis import given, strategies as st

from trendcycle.model import (
    PRE_TRANSITION,
    ConstantRecurrence,
    Extinct,
    ModelParams,
    PostTransition,
    SinusoidRecurrence,
    State,
    adoption_rate,
    c_star,
    recurrence_at,
    rejection_rate,
    rhs,
)


def params(**kw):
    defaults = dict(m1=20.0, m2=0.2, m3=0.5, m4=2.0)
    defaults.update(kw)
    return ModelParams(**defaults)


class TestModelParams:
    @pytest.mark.parametrize("field", ["m1", "m2", "m3", "m4"])
    def test_rejects_nonpositive_intensities(self, field):
        with pytest.raises(ValueError):
            params(**{field: 0.0})
        with pytest.raises(ValueError):
            params(**{field: -1.0})

    def test_rejects_nonfinite_p(self):
        with pytest.raises(ValueError):
            params(p=math.nan)

    def test_rejects_negative_constant_recurrence(self):
        with pytest.raises(ValueError):
            params(recurrence=ConstantRecurrence(-0.1))

    def test_sinusoid_may_go_negative(self):
        # negative excursions of a sinusoidal delta are allowed by design
        p = params(recurrence=SinusoidRecurrence(0.4, 0.5, math.pi / 2, -1.0))
        assert recurrence_at(0.0, p.recurrence) < 0.0


class TestAdoptionRate:
    def test_sigmoid_center_is_half_intensity(self):
        p = params(l_alpha=0.3)
        assert adoption_rate(0.3, p) == pytest.approx(p.m1 / 2)

    def test_center_case_reference_parameters(self):
        assert adoption_rate(0.0, params()) == pytest.approx(10.0, abs=1e-6)

    def test_direct_formula_evaluation(self):
        # frozen from hand evaluation of m1/(1+exp(-m2*(I-l)))
        p = ModelParams(m1=2.0, m2=0.05, m3=1.0, m4=1.0)
        assert adoption_rate(0.5, p) == pytest.approx(1.0124993489990208, rel=1e-15)

    @given(st.floats(0.0, 1.0), st.floats(0.0, 1.0))
    def test_monotone_and_bounded(self, a, b):
        p = params()
        lo, hi = sorted((a, b))
        assert 0.0 < adoption_rate(lo, p) <= adoption_rate(hi, p) < p.m1


class TestRejectionRate:
    def test_pre_transition_sigmoid_center(self):
        p = params(l_beta=0.1)
        assert rejection_rate(0.1, PRE_TRANSITION, p) == pytest.approx(p.m3 / 2)

    def test_pre_transition_monotone_bounded(self):
        p = params()
        vals = [rejection_rate(i / 10, PRE_TRANSITION, p) for i in range(11)]
        assert vals == sorted(vals)
        assert 0.0 < vals[0] and vals[-1] < p.m3

    def test_post_transition_p_zero_is_constant(self):
        phase = PostTransition(t_star=1.0, c_star=0.37)
        assert rejection_rate(0.5, phase, params(p=0.0)) == 0.37
        assert rejection_rate(0.01, phase, params(p=0.0)) == 0.37

    def test_post_transition_inverse_power(self):
        phase = PostTransition(t_star=1.0, c_star=0.4)
        assert rejection_rate(0.2, phase, params(p=-1.0)) == pytest.approx(2.0)

    def test_post_transition_domain_error_at_zero(self):
        phase = PostTransition(t_star=1.0, c_star=0.4)
        with pytest.raises(ValueError):
            rejection_rate(0.0, phase, params(p=-1.0))

    def test_extinct_phase_is_zero(self):
        assert rejection_rate(0.0, Extinct(2.0), params(p=-1.0)) == 0.0

    def test_continuity_across_the_switch(self):
        p = params(p=-1.5)
        I_star = 0.84
        beta_star = rejection_rate(I_star, PRE_TRANSITION, p)
        cs = c_star(I_star, beta_star, p.p)
        post = rejection_rate(I_star, PostTransition(1.0, cs), p)
        assert post == pytest.approx(beta_star, rel=1e-12)


class TestCStar:
    def test_p_zero_returns_beta(self):
        assert c_star(0.7, 0.31, 0.0) == 0.31

    def test_negative_exponent(self):
        assert c_star(0.5, 0.25, -1.0) == pytest.approx(0.125)

    def test_positive_exponent(self):
        assert c_star(0.5, 0.25, 1.0) == pytest.approx(0.5)

    def test_domain_error(self):
        with pytest.raises(ValueError):
            c_star(0.0, 0.25, 1.0)


class TestRecurrence:
    def test_constant(self):
        assert recurrence_at(17.3, ConstantRecurrence(0.4)) == 0.4

    def test_sinusoid_zero_crossing_of_argument(self):
        spec = SinusoidRecurrence(0.4, 0.5, math.pi / 2, -1.0)
        assert recurrence_at(2 / math.pi, spec) == pytest.approx(0.4)

    def test_sinusoid_extremum(self):
        spec = SinusoidRecurrence(0.4, 0.5, math.pi / 2, -1.0)
        t_max = (math.pi / 2 + 1.0) / (math.pi / 2)
        assert recurrence_at(t_max, spec) == pytest.approx(0.9)


class TestRhs:
    def test_frozen_direct_evaluation(self):
        # frozen from hand evaluation of the three formulas at the
        # reference parameters and initial state (0.98, 0.02, 0)
        d = rhs(0.0, State(0.98, 0.02, 0.0), PRE_TRANSITION, params())
        assert d[0] == pytest.approx(-0.19639199947733416, rel=1e-15)
        assert d[1] == pytest.approx(0.1912920128085345, rel=1e-15)
        assert d[2] == pytest.approx(0.005099986668799655, rel=1e-15)

    def test_absorbing_state(self):
        assert rhs(0.0, State(0.6, 0.0, 0.4), PRE_TRANSITION, params()) == (0.0, 0.0, 0.0)

    @given(
        st.floats(0.0, 1.0),
        st.floats(1e-6, 1.0),
        st.floats(0.0, 1.0),
        st.floats(0.0, 2.0),
    )
    def test_components_sum_to_zero(self, S, I, R, delta):
        p = params(recurrence=ConstantRecurrence(delta))
        d = rhs(0.0, State(S, I, R), PRE_TRANSITION, p)
        assert abs(sum(d)) < 1e-12 * (1 + max(abs(x) for x in d))

    def test_extinct_exchanges_s_and_r_only(self):
        p = params(recurrence=ConstantRecurrence(0.4))
        d = rhs(1.0, State(0.3, 0.0, 0.7), Extinct(0.5), p)
        assert d == (0.4 * 0.7, 0.0, -0.4 * 0.7)
