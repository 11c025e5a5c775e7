import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cgl_lab.discretization import Field, Grid
from cgl_lab.errors import ConversionError, MissingInputError
from cgl_lab.params import (
    OrbitCase,
    ParamSet,
    TrigParamSet,
    blowup_energy,
    classify,
    periodic_orbit_params,
    proportional,
    rotated_params,
    to_trig_form,
    unit_ball_volume,
)


def P(**kw):
    base = dict(a=1.0, alpha=0.0, b=1.0, beta=0.0, c=1.0, gamma=0.0, k=0.0, sigma1=1.0, sigma2=2.0)
    base.update(kw)
    return ParamSet(**base)


class TestParamSet:
    @pytest.mark.parametrize("kw", [dict(a=0.0), dict(a=-1.0), dict(sigma1=0.0), dict(sigma2=-2.0),
                                    dict(k=math.nan)])
    def test_invariants(self, kw):
        with pytest.raises(ValueError):
            P(**kw)

    def test_trig_invariants(self):
        with pytest.raises(ValueError):
            TrigParamSet(math.pi / 2, 0, 0, 1, 0, 1, 2)
        with pytest.raises(ValueError):
            TrigParamSet(0, 0, 0, 0, 0, 1, 2)
        with pytest.raises(ValueError):
            TrigParamSet(0, -math.pi, 0, 1, 0, 1, 2)


class TestTrigForm:
    def test_all_real(self):
        conv = to_trig_form(P())
        t = conv.trig
        assert (t.theta, t.gamma1, t.chi, t.gamma2) == (0.0, 0.0, -1, 0.0)
        assert conv.moduli == (1.0, 1.0, 1.0)
        assert conv.exact

    def test_diffusion_phase(self):
        conv = to_trig_form(P(alpha=1.0))
        assert conv.trig.theta == pytest.approx(math.pi / 4, abs=1e-15)
        assert conv.moduli[0] == pytest.approx(math.sqrt(2), rel=1e-15)
        assert not conv.exact

    def test_imaginary_focusing(self):
        assert to_trig_form(P(b=0.0, beta=1.0)).trig.gamma1 == pytest.approx(math.pi / 2)

    def test_zero_pair_rejected(self):
        with pytest.raises(ConversionError):
            to_trig_form(P(b=0.0, beta=0.0))
        with pytest.raises(ConversionError):
            to_trig_form(P(c=0.0, gamma=0.0))

    @settings(max_examples=60, deadline=None)
    @given(a=st.floats(0.1, 5), al=st.floats(-5, 5), b=st.floats(-5, 5), be=st.floats(-5, 5),
           c=st.floats(-5, 5), ga=st.floats(-5, 5))
    def test_round_trip(self, a, al, b, be, c, ga):
        if abs(complex(b, be)) < 1e-3 or abs(complex(c, ga)) < 1e-3:
            return
        p = P(a=a, alpha=al, b=b, beta=be, c=c, gamma=ga)
        conv = to_trig_form(p)
        back = conv.trig.to_params(conv.moduli)
        for orig, new in ((p.diffusion, back.diffusion), (p.focusing, back.focusing),
                          (p.damping, back.damping)):
            assert abs(new - orig) <= 1e-14 * abs(orig)


class TestClassify:
    def test_global_boundary_case(self):
        rep = classify(P(alpha=1.0, gamma=0.0))
        assert rep.global_existence.satisfied
        assert rep.global_existence.condition("gamma/alpha>=0").on_boundary

    def test_global_needs_dispersion(self):
        rep = classify(P(alpha=0.0))
        assert rep.global_existence.satisfied is False
        assert "alpha!=0" in rep.global_existence.failed

    def test_h1_example(self):
        p = ParamSet(1, 0.5, 0.1, 0.05, 1, 0.5, -1, 1, 2)
        rep = classify(p)
        assert rep.h1_stable
        neg = rep.h1_stable_k_negative
        assert neg.condition("b(s1+1)<min(c,|k|)").lhs == pytest.approx(0.2)
        assert neg.condition("b(s2-s1)/s2<=|k|/2").lhs == pytest.approx(0.05)
        assert neg.condition("b*s1/((s1+2)s2)<=c/(s2+2)").lhs == pytest.approx(1 / 60)
        assert neg.condition("b*s1/((s1+2)s2)<=c/(s2+2)").rhs == pytest.approx(0.25)

    def test_h1_needs_proportionality(self):
        rep = classify(ParamSet(1, 0.5, 0.1, 0.06, 1, 0.5, -1, 1, 2))
        assert not rep.h1_stable_k_negative.satisfied
        assert proportional(rep.params).lhs > 0.1

    def test_lp_branches(self):
        p = P(b=0.5, k=-1.0, sigma1=1.0, sigma2=2.0)
        rep = classify(p, lp_exponent=4.0)
        assert rep.lp_stable.satisfied and rep.lp_asymptotically_stable.satisfied
        # boundary: b(s2-s1)/s2 == |k| satisfies the non-strict form only
        rep = classify(P(b=2.0, c=2.0, k=-1.0))
        assert rep.lp_stable.satisfied
        assert not rep.lp_asymptotically_stable.satisfied
        assert rep.lp_stable.condition("b(s2-s1)/s2<=|k|").on_boundary

    def test_lp_dispersion_limit(self):
        rep = classify(P(alpha=1.0, k=-1.0, b=0.0), lp_exponent=5.0)
        assert rep.lp_stable.condition("|alpha|(p-2)/2<=a").satisfied is False

    def test_bounded_branch_needs_volume(self):
        assert classify(P()).lp2_bounded_decay.satisfied is None
        with pytest.raises(MissingInputError):
            classify(P(), require_bounded=True)

    def test_bounded_decay_threshold(self):
        # unit interval: (|O|/w_1)^(-2) = 4, so k < 4 a when b = 0
        ok = classify(P(b=0.0, k=3.9), domain_volume=1.0)
        bad = classify(P(b=0.0, k=4.1), domain_volume=1.0)
        assert ok.lp2_bounded_decay.satisfied and not bad.lp2_bounded_decay.satisfied
        cond = ok.lp2_bounded_decay.condition("b+(s2-s1)/s2+k<a(|O|/w_N)^(-2/N)")
        assert cond.rhs == pytest.approx(4.0)

    def test_unit_ball(self):
        assert unit_ball_volume(1) == 2.0
        assert unit_ball_volume(2) == pytest.approx(math.pi)
        assert unit_ball_volume(3) == pytest.approx(4 * math.pi / 3)
        assert unit_ball_volume(4) == pytest.approx(math.pi ** 2 / 2)

    def test_json_leaves(self):
        d = classify(P(alpha=1.0), domain_volume=1.0).to_dict()
        leaf = d["global_existence"]["conditions"]["c>0"]
        assert set(leaf) >= {"satisfied", "lhs", "rhs", "relation"}
        assert d["spec_version"] == 1

    @settings(max_examples=50, deadline=None)
    @given(b=st.floats(-3, 3), c=st.floats(0.01, 3), s=st.floats(0.1, 10))
    def test_scale_consistency(self, b, c, s):
        p = P(b=b, c=c, k=-1.0)
        q = p.scaled_nonlinearity(s)
        for name in ("b*s1/s2<=c",):
            assert classify(p).lp_stable.condition(name).satisfied == \
                classify(q).lp_stable.condition(name).satisfied
        name = "b*s1/((s1+2)s2)<=c/(s2+2)"
        assert classify(p).h1_stable_k_negative.condition(name).satisfied == \
            classify(q).h1_stable_k_negative.condition(name).satisfied

    def test_blowup_admissible(self):
        assert classify(rotated_params(0.3, -1.0, 2.0, 4.0, 0.0)).blow_up_admissible.satisfied
        assert not classify(rotated_params(0.3, 1.0, 2.0, 4.0, 0.0)).blow_up_admissible.satisfied
        assert classify(rotated_params(0.3, 1.0, 4.0, 2.0, 0.5)).blow_up_admissible.satisfied


class TestEnergy:
    grid = Grid.interval(0.0, 1.0, 2001)

    def test_zero(self):
        assert blowup_energy(Field.zeros(self.grid), 0, 0, 2, 4).energy == 0.0

    def test_closed_form(self):
        u = Field.from_function(self.grid, lambda x: 6 * np.sin(np.pi * x))
        e = blowup_energy(u, 0.0, 0.0, 2.0, 4.0)
        assert e.energy == pytest.approx(9 * math.pi ** 2 - 121.5, abs=1e-3)
        assert e.hypotheses_hold

    def test_small_data_positive(self):
        u = Field.from_function(self.grid, lambda x: 1e-3 * np.sin(np.pi * x))
        assert blowup_energy(u, 0.0, 0.0, 2.0, 4.0).energy > 0


class TestPeriodicOrbit:
    def test_case1(self):
        o = periodic_orbit_params(P(b=-1.0, k=1.0, c=0.0, beta=1.0, sigma1=2.0, sigma2=4.0))
        assert (o.r0, o.freq, o.period, o.case) == (1.0, 1.0, 2 * math.pi, OrbitCase.CASE1_C0)

    def test_case2(self):
        o = periodic_orbit_params(P(b=1.0, c=1.0, beta=2.0, gamma=1.0, sigma1=1.0, sigma2=3.0))
        assert o.r0 == 1.0 and o.freq == 1.0 and o.period == pytest.approx(2 * math.pi)
        o = periodic_orbit_params(P(b=2.0, c=1.0, sigma1=1.0, sigma2=2.0))
        assert o.r0 == pytest.approx(2.0)

    def test_degenerate_and_none(self):
        o = periodic_orbit_params(P(b=-1.0, k=1.0, c=0.0))
        assert o.degenerate and math.isinf(o.period)
        assert periodic_orbit_params(P(k=1.0)) is None

    @settings(max_examples=60, deadline=None)
    @given(b=st.floats(0.1, 4), c=st.floats(0.1, 4), k=st.floats(0.1, 4),
           s1=st.floats(0.5, 3), ds=st.floats(0.5, 3), flip=st.booleans())
    def test_defining_equation(self, b, c, k, s1, ds, flip):
        if flip:
            p = P(b=-b, c=0.0, k=k, sigma1=s1, sigma2=s1 + ds)
        else:
            p = P(b=b, c=c, k=0.0, sigma1=s1, sigma2=s1 + ds)
        o = periodic_orbit_params(p)
        r = p.b * o.r0 ** p.sigma1 - p.c * o.r0 ** p.sigma2 + p.k
        assert abs(r) < 1e-12 * max(1.0, abs(p.k), abs(p.b) * o.r0 ** p.sigma1)
