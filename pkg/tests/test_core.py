import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cablerod.core import (
    DEFAULT_QUADRATURE,
    GAUSS_QUADRATURE,
    ActuationState,
    BackboneShape,
    Mode,
    QuadratureConfig,
    RigidityProfile,
    RobotParams,
    SpacingProfile,
    beta,
    cubic_spacing_params,
    integrate,
    shape_from_theta,
    baseline_params,
    tapered_params,
)
from cablerod.errors import ContractError, DomainError, ModeError, ProfileError, QuadratureError

EI_REF = 2e9 * math.pi / 64 * 0.004**4


class TestQuadrature:
    def test_constant_integrand(self):
        assert integrate(lambda s: np.ones_like(s), 0.0, 1.0) == pytest.approx(1.0, abs=1e-15)

    @pytest.mark.parametrize("cfg", [DEFAULT_QUADRATURE, GAUSS_QUADRATURE])
    def test_sine_over_half_period(self, cfg):
        assert abs(integrate(np.sin, 0.0, math.pi, cfg) - 2.0) < 1e-9

    def test_squared_cubic_spacing(self):
        # 0.3 * (0.0016 - 0.0024/4 + 0.0009/7)
        expected = 0.3 * (0.0016 - 0.0024 / 4 + 0.0009 / 7)
        got = integrate(lambda s: (0.04 - 0.03 * (s / 0.3) ** 3) ** 2, 0.0, 0.3)
        assert got == pytest.approx(expected, rel=1e-12)
        assert got == pytest.approx(3.3857e-4, rel=1e-4)

    def test_reversed_bounds(self):
        with pytest.raises(DomainError):
            integrate(np.sin, 1.0, 0.0)

    def test_nonfinite_sample_names_abscissa(self):
        with pytest.raises(QuadratureError, match="s=0.0"), np.errstate(divide="ignore"):
            integrate(lambda s: 1.0 / s, 0.0, 1.0)

    def test_self_check_flags_unresolved_integrand(self):
        cfg = QuadratureConfig("simpson", 32, 1e-12)
        with pytest.raises(QuadratureError):
            integrate(lambda s: np.sin(200 * s), 0.0, 1.0, cfg, check=True)

    def test_self_check_passes_smooth_integrand(self):
        assert integrate(np.cos, 0.0, 1.0, check=True) == pytest.approx(math.sin(1.0), abs=1e-10)

    @pytest.mark.parametrize("kwargs", [{"nodes": 8}, {"nodes": 17}, {"scheme": "trapezoid"}, {"tol": 0.0}])
    def test_config_invariants(self, kwargs):
        with pytest.raises(ValueError):
            QuadratureConfig(**kwargs)

    def test_gauss_accepts_odd_count(self):
        assert QuadratureConfig("gauss", 17).nodes == 17


class TestProfiles:
    def test_cubic_spacing_values(self):
        p = SpacingProfile.polynomial((0.04, 0.0, 0.0, -0.03))
        xi = np.linspace(0, 1, 11)
        np.testing.assert_array_equal(p(xi), np.polynomial.polynomial.polyval(xi, (0.04, 0, 0, -0.03)))
        assert p(1.0) == pytest.approx(0.01)

    def test_spacing_must_stay_positive(self):
        with pytest.raises(ProfileError):
            SpacingProfile.polynomial((0.01, 0.0, -0.02))
        with pytest.raises(ProfileError):
            SpacingProfile.constant(0.0)

    def test_running_integral_matches_quadrature(self):
        p = SpacingProfile.polynomial((0.04, 0.01, 0.0, -0.03))
        for xi in (0.0, 0.37, 1.0):
            q = integrate(lambda s: p(s / 0.3), 0.0, xi * 0.3)
            assert p.running_integral(xi, 0.3) == pytest.approx(q, rel=1e-9, abs=1e-18)

    def test_square_integral_matches_quadrature(self):
        p = SpacingProfile.polynomial((0.04, 0.0, 0.0, -0.03))
        q = integrate(lambda s: p(s / 0.3) ** 2, 0.0, 0.3)
        assert p.square_integral(0.3) == pytest.approx(q, rel=1e-9)

    def test_tapered_endpoints(self):
        r = RigidityProfile.tapered(0.006, 0.005)
        assert r(0.0) == pytest.approx(math.pi / 64 * 0.006**4, rel=1e-15)
        assert r(1.0) == pytest.approx(math.pi / 64 * 0.005**4, rel=1e-15)

    def test_tapered_compliance_matches_quadrature(self):
        r = RigidityProfile.tapered(0.006, 0.005)
        for xi in (0.25, 1.0):
            q = integrate(lambda s: 1.0 / (2e9 * r(s / 0.3)), 0.0, 0.3 * xi)
            assert r.compliance_integral(xi, 0.3, 2e9) == pytest.approx(q, rel=1e-9)

    def test_equal_diameter_taper_is_uniform(self):
        r = RigidityProfile.tapered(0.004, 0.004)
        assert r.compliance_integral(1.0, 0.3, 2e9) == pytest.approx(0.3 / EI_REF, rel=1e-14)

    def test_rigidity_must_be_positive(self):
        with pytest.raises(ProfileError):
            RigidityProfile.constant(0.0)
        with pytest.raises(ProfileError):
            RigidityProfile.tapered(0.006, -0.001)


class TestRobotParams:
    def test_baseline_derived_values(self):
        p = baseline_params()
        assert p.EI0 == pytest.approx(EI_REF, rel=1e-15)
        assert p.EI0 == pytest.approx(0.0251327, abs=5e-8)
        assert p.EA == pytest.approx(2e9 * math.pi / 4 * 0.004**2, rel=1e-15)
        assert p.W0 == 0.11

    def test_circular_consistency_enforced(self):
        p = baseline_params()
        with pytest.raises(ValueError, match="circular"):
            RobotParams(p.L, p.E, p.spacing, RigidityProfile.constant(p.rigidity.I0 * (1 + 1e-6)), p.A, p.D)
        with pytest.raises(ValueError, match="circular"):
            RobotParams(p.L, p.E, p.spacing, p.rigidity, p.A * (1 + 1e-6), p.D)
        # within 1e-9 relative is accepted
        RobotParams(p.L, p.E, p.spacing, RigidityProfile.constant(p.rigidity.I0 * (1 + 1e-10)), p.A, p.D)

    @pytest.mark.parametrize("field,value", [("L", 0.0), ("E", -1.0), ("A", 0.0)])
    def test_positive_scalars(self, field, value):
        p = baseline_params()
        kw = dict(L=p.L, E=p.E, spacing=p.spacing, rigidity=p.rigidity, A=p.A)
        kw[field] = value
        with pytest.raises(ValueError):
            RobotParams(**kw)

    def test_constant_accessors_reject_profiles(self):
        with pytest.raises(ProfileError):
            cubic_spacing_params().W0
        with pytest.raises(ProfileError):
            tapered_params().EI0

    def test_presets(self):
        assert cubic_spacing_params().W(0.3) == pytest.approx(0.01)
        assert tapered_params().I(0.0) == pytest.approx(math.pi / 64 * 0.006**4)


class TestActuationState:
    def test_pair_sums_and_differences(self):
        a = ActuationState.force_pair(5.0, 2.0)
        assert (a.difference, a.total) == (3.0, 7.0)
        d = ActuationState.displacement_pair(0.02, -0.01)
        assert d.difference == pytest.approx(0.03)
        assert d.total == pytest.approx(0.01)
        assert d.labels == ("dl1", "dl2")

    def test_single_input_has_no_total(self):
        with pytest.raises(ModeError):
            ActuationState.force_difference(1.0).total

    def test_value_count_checked(self):
        with pytest.raises(ModeError):
            ActuationState(Mode.FORCE_PAIR, (1.0,))

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            ActuationState.force_difference(float("nan"))

    def test_replace_keeps_mode(self):
        a = ActuationState.displacement_pair(0.1, 0.0).replace([0.2, 0.1])
        assert a.mode is Mode.DISPLACEMENT_PAIR and a.values == (0.2, 0.1)


class TestShapeFromTheta:
    def test_straight_rod(self):
        shape = shape_from_theta(baseline_params(), lambda s: np.zeros_like(s))
        assert shape.tip == (pytest.approx(0.3, abs=1e-15), 0.0)

    def test_arc_closed_form(self):
        k = 0.11 / (2 * EI_REF)
        shape = shape_from_theta(baseline_params(), lambda s: k * s)
        x, y = shape.tip
        assert x == pytest.approx(math.sin(k * 0.3) / k, abs=1e-12)
        assert y == pytest.approx((1 - math.cos(k * 0.3)) / k, abs=1e-12)
        assert x == pytest.approx(0.278908, abs=2e-6)
        # (1 - cos 0.656514) / 2.18838 evaluated by hand
        assert y == pytest.approx(0.094990, abs=2e-6)

    def test_uniform_compression(self):
        u = -20.0 / baseline_params().EA
        shape = shape_from_theta(baseline_params(), lambda s: np.zeros_like(s), u)
        assert u == pytest.approx(-7.958e-4, rel=1e-4)
        assert shape.tip[0] == pytest.approx(0.3 * (1 + u), abs=1e-15)
        assert shape.tip[0] == pytest.approx(0.2997612, abs=1e-7)

    def test_base_must_be_clamped(self):
        with pytest.raises(ContractError):
            shape_from_theta(baseline_params(), lambda s: s + 0.1)

    def test_fd_curvature_when_no_derivative(self):
        shape = shape_from_theta(baseline_params(), lambda s: 3.0 * s**2)
        np.testing.assert_allclose(shape.kappa, 6.0 * shape.s, atol=1e-9)

    def test_shape_is_read_only(self):
        shape = shape_from_theta(baseline_params(), lambda s: s)
        with pytest.raises(ValueError):
            shape.theta[3] = 1.0

    def test_grid_must_increase(self):
        z = np.zeros(3)
        with pytest.raises(ValueError):
            BackboneShape(s=np.array([0.0, 0.2, 0.1]), theta=z, kappa=z, u=z, x=z, y=z)

    @settings(max_examples=40, deadline=None)
    @given(st.floats(0.05, math.pi / 0.3 - 0.05), st.integers(2, 400))
    def test_arc_property(self, k, n):
        shape = shape_from_theta(baseline_params(), lambda s: k * s, n=n)
        assert shape.x[0] == 0.0 and shape.y[0] == 0.0 and shape.theta[0] == 0.0
        assert shape.tip[0] == pytest.approx(math.sin(k * 0.3) / k, abs=1e-10)
        assert shape.tip[1] == pytest.approx((1 - math.cos(k * 0.3)) / k, abs=1e-10)


class TestBeta:
    def test_zero_at_base(self):
        assert beta(baseline_params(), 0.0) == 0.0

    def test_uniform_value(self):
        assert beta(baseline_params(), 0.3) == pytest.approx(0.3 / EI_REF, rel=1e-14)
        assert beta(baseline_params(), 0.3) == pytest.approx(11.9366, rel=1e-5)

    def test_tapered_value_and_quadrature(self):
        p = tapered_params()
        q = integrate(lambda s: 1.0 / p.EI(s), 0.0, 0.3, GAUSS_QUADRATURE)
        assert beta(p, 0.3) == pytest.approx(q, rel=1e-12)
        assert beta(p, 0.3) == pytest.approx(3.4331, rel=1e-4)

    @pytest.mark.parametrize("s", [-1e-3, 0.31])
    def test_outside_domain(self, s):
        with pytest.raises(DomainError):
            beta(baseline_params(), s)

    @given(st.floats(0, 0.3), st.floats(0, 0.3))
    def test_monotone(self, s1, s2):
        p = tapered_params()
        lo, hi = sorted((s1, s2))
        assert beta(p, hi) >= beta(p, lo)
