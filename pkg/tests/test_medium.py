import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from interface_lab.medium import (
    TwoSidedMedium,
    flux_continuity_lambda,
    make_medium,
    medium_from_upwelling,
)


def alpha_star_reference(d_plus, d_minus, lam):
    # independent recomputation of the transmission formula
    a = lam * math.sqrt(d_minus)
    return a / (a + (1.0 - lam) * math.sqrt(d_plus))


class TestMakeMedium:
    def test_flux_case_4_1(self):
        m = make_medium(4.0, 1.0, 0.8)
        # hand evaluation: 0.8*1 / (0.8*1 + 0.2*2) = 2/3; also the flux-continuity
        # closed form sqrt(D+)/(sqrt(D+)+sqrt(D-)) since 0.8 = 4/(4+1)
        assert m.alpha_star == pytest.approx(2.0 / 3.0, abs=1e-15)
        assert m.alpha_star == pytest.approx(2.0 / (2.0 + 1.0), abs=1e-15)

    @pytest.mark.parametrize("d", [0.5, 1.0, 7.3])
    def test_symmetric_half(self, d):
        assert make_medium(d, d, 0.5).alpha_star == pytest.approx(0.5, abs=1e-15)

    def test_upwelling_case_4_1_half(self):
        # lam = 1/2 with unequal coefficients: sqrt(D-)/(sqrt(D+)+sqrt(D-))
        m = make_medium(4.0, 1.0, 0.5)
        assert m.alpha_star == pytest.approx(1.0 / 3.0, abs=1e-15)
        assert m.alpha_star == pytest.approx(1.0 / (2.0 + 1.0), abs=1e-15)

    def test_stored_value_matches_recomputation(self):
        m = make_medium(2.7, 0.9, 0.31)
        assert m.alpha_star == alpha_star_reference(2.7, 0.9, 0.31)

    @pytest.mark.parametrize(
        "kwargs,field",
        [
            (dict(d_plus=-1.0, d_minus=1.0, lam=0.5), "d_plus"),
            (dict(d_plus=0.0, d_minus=1.0, lam=0.5), "d_plus"),
            (dict(d_plus=1.0, d_minus=-2.0, lam=0.5), "d_minus"),
            (dict(d_plus=1.0, d_minus=1.0, lam=0.0), "lam"),
            (dict(d_plus=1.0, d_minus=1.0, lam=1.0), "lam"),
            (dict(d_plus=1.0, d_minus=1.0, lam=1.5), "lam"),
            (dict(d_plus=math.nan, d_minus=1.0, lam=0.5), "d_plus"),
            (dict(d_plus=1.0, d_minus=math.inf, lam=0.5), "d_minus"),
        ],
    )
    def test_domain_errors_name_the_field(self, kwargs, field):
        with pytest.raises(ValueError, match=field):
            make_medium(**kwargs)

    def test_direct_construction_validates(self):
        with pytest.raises(ValueError):
            TwoSidedMedium(d_plus=1.0, d_minus=1.0, lam=0.5, alpha_star=1.5)


class TestFluxContinuityLambda:
    def test_hand_values(self):
        assert flux_continuity_lambda(4.0, 1.0) == pytest.approx(0.8, abs=1e-15)
        assert flux_continuity_lambda(1.0, 4.0) == pytest.approx(0.2, abs=1e-15)
        assert flux_continuity_lambda(3.3, 3.3) == pytest.approx(0.5, abs=1e-15)

    @given(
        dp=st.floats(0.01, 100.0),
        dm=st.floats(0.01, 100.0),
    )
    @settings(max_examples=50, deadline=None)
    def test_yields_sqrt_alpha_star(self, dp, dm):
        lam = flux_continuity_lambda(dp, dm)
        m = make_medium(dp, dm, lam)
        expected = math.sqrt(dp) / (math.sqrt(dp) + math.sqrt(dm))
        assert m.alpha_star == pytest.approx(expected, rel=1e-12)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError, match="d_minus"):
            flux_continuity_lambda(1.0, 0.0)


class TestScaleUnscale:
    def test_examples(self):
        m = make_medium(4.0, 1.0, 0.8)
        assert m.scale(1.0) == 2.0
        assert m.scale(0.0) == 0.0
        assert m.scale(-2.0) == -2.0
        assert m.unscale(2.0) == 1.0
        assert m.unscale(0.0) == 0.0
        assert m.unscale(-2.0) == -2.0

    def test_exact_roundtrip_dyadic_media(self):
        # sqrt(D) a power of two makes scale/unscale exact in IEEE arithmetic
        m = make_medium(4.0, 0.25, 0.6)
        xs = np.concatenate([np.linspace(-7, 7, 101), [1e-12, -1e-12, 1e9, -1e9]])
        assert np.array_equal(m.unscale(m.scale(xs)), xs)

    @given(
        dp=st.floats(0.01, 100.0),
        dm=st.floats(0.01, 100.0),
        x=st.floats(-1e6, 1e6),
    )
    @settings(max_examples=100, deadline=None)
    def test_roundtrip_within_one_ulp(self, dp, dm, x):
        m = make_medium(dp, dm, 0.5)
        back = m.unscale(m.scale(x))
        assert abs(back - x) <= 2.0 * np.spacing(max(abs(x), 1e-300))

    @given(x=st.floats(-100.0, 100.0), y=st.floats(-100.0, 100.0))
    @settings(max_examples=50, deadline=None)
    def test_strictly_increasing_and_sign_preserving(self, x, y):
        m = make_medium(5.5, 0.7, 0.4)
        if x < y:
            assert m.scale(x) < m.scale(y)
        assert np.sign(m.scale(x)) == np.sign(x)

    def test_vectorized_matches_scalar(self):
        m = make_medium(2.0, 3.0, 0.5)
        xs = np.array([-1.5, 0.0, 2.5])
        assert np.array_equal(m.scale(xs), [m.scale(float(v)) for v in xs])

    def test_rejects_nonfinite(self):
        m = make_medium(1.0, 1.0, 0.5)
        with pytest.raises(ValueError):
            m.scale(math.inf)
        with pytest.raises(ValueError):
            m.unscale(math.nan)


class TestDispersionAt:
    def test_sides_and_origin(self):
        m = make_medium(4.0, 1.0, 0.8)
        assert m.dispersion_at(3.2) == 4.0
        assert m.dispersion_at(0.0) == 4.0  # the origin belongs to the plus side
        assert m.dispersion_at(-0.001) == 1.0

    def test_consistent_with_scale_sides(self):
        m = make_medium(9.0, 0.25, 0.3)
        for x in (-2.0, -1e-9, 0.0, 1e-9, 3.0):
            assert (m.dispersion_at(m.scale(x)) == m.d_plus) == (x >= 0)


class TestAlphaStarProperties:
    def test_monotone_in_lambda(self):
        lams = np.linspace(0.05, 0.95, 19)
        vals = [make_medium(4.0, 1.0, l).alpha_star for l in lams]
        assert all(a < b for a, b in zip(vals, vals[1:]))

    @given(
        dp=st.floats(0.01, 50.0),
        dm=st.floats(0.01, 50.0),
        lam=st.floats(0.01, 0.99),
    )
    @settings(max_examples=100, deadline=None)
    def test_mirror_symmetry(self, dp, dm, lam):
        a = make_medium(dp, dm, lam).alpha_star
        b = make_medium(dm, dp, 1.0 - lam).alpha_star
        assert a == pytest.approx(1.0 - b, abs=1e-12)

    @given(
        dp=st.floats(0.01, 50.0),
        dm=st.floats(0.01, 50.0),
        lam=st.floats(0.01, 0.99),
    )
    @settings(max_examples=100, deadline=None)
    def test_in_open_unit_interval(self, dp, dm, lam):
        a = make_medium(dp, dm, lam).alpha_star
        assert 0.0 < a < 1.0


class TestUpwellingMapping:
    def test_sharp_break(self):
        m = medium_from_upwelling(r=1.0, f=-1.0, h_slope_plus=2.0, h_slope_minus=0.5)
        # mapping arithmetic: D+ = 2*1/(1*2) = 1, D- = 2*1/(1*0.5) = 4, lam = 1/2
        assert (m.d_plus, m.d_minus, m.lam) == (1.0, 4.0, 0.5)
        assert m.alpha_star == pytest.approx(2.0 / 3.0, abs=1e-15)
        # and the half-lambda closed form sqrt(D-)/(sqrt(D+)+sqrt(D-))
        assert m.alpha_star == pytest.approx(2.0 / (1.0 + 2.0), abs=1e-15)

    def test_no_break_symmetric(self):
        m = medium_from_upwelling(r=1.0, f=-1.0, h_slope_plus=2.0, h_slope_minus=2.0)
        assert (m.d_plus, m.d_minus) == (1.0, 1.0)
        assert m.alpha_star == 0.5

    def test_mapping_arithmetic(self):
        m = medium_from_upwelling(r=2.0, f=-1.0, h_slope_plus=1.0, h_slope_minus=1.0)
        assert (m.d_plus, m.d_minus) == (4.0, 4.0)

    def test_northern_hemisphere_rejected(self):
        with pytest.raises(ValueError, match="f must be negative"):
            medium_from_upwelling(r=1.0, f=1.0, h_slope_plus=1.0, h_slope_minus=1.0)
        with pytest.raises(ValueError, match="h_slope_plus"):
            medium_from_upwelling(r=1.0, f=-1.0, h_slope_plus=0.0, h_slope_minus=1.0)
        with pytest.raises(ValueError, match="r must be positive"):
            medium_from_upwelling(r=-1.0, f=-1.0, h_slope_plus=1.0, h_slope_minus=1.0)
