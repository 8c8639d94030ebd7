"""
Tests for the mode-frequency profiles
"""

import numpy as np
import pytest

from app.core.exceptions import InputValidationError, WindowTooShortError
from app.schemas.model import ModelParams, NumericsConfig, ProfileKind
from app.services.frequency_profile import eval_frequency, make_profile, profile_for, profile_window


@pytest.fixture
def smooth():
    return make_profile(ProfileKind.SMOOTH, 0.5, 5.0, 1.0)


@pytest.mark.unit
class TestSmoothProfile:
    """Logistic switch between omega1 and omega2"""

    def test_midpoint_values(self, smooth):
        """At t = 0 the frequency is halfway and the slope is (omega2 - omega1) / (4 tau)"""
        omega, omega_dot = eval_frequency(smooth, 0.0)
        assert omega == pytest.approx(2.75, abs=1e-12)
        assert omega_dot == pytest.approx(1.125, abs=1e-12)

    def test_asymptotes_without_overflow(self, smooth):
        """Far tails return the end frequencies with zero slope"""
        lo, lo_dot = smooth.evaluate(-1e3)
        hi, hi_dot = smooth.evaluate(1e3)
        assert np.isfinite([lo, lo_dot, hi, hi_dot]).all()
        assert lo == pytest.approx(0.5, abs=1e-15)
        assert hi == pytest.approx(5.0, abs=1e-15)
        assert lo_dot == pytest.approx(0.0, abs=1e-100)
        assert hi_dot == pytest.approx(0.0, abs=1e-100)

    def test_monotonic_increase(self, smooth):
        t = np.linspace(-30.0, 30.0, 601)
        omega, omega_dot = smooth.evaluate(t)
        assert np.all(omega_dot > 0)
        assert np.all(np.diff(omega) >= 0)

    def test_swap_symmetry(self):
        """omega(-t; omega1, omega2) equals omega(t; omega2, omega1)"""
        forward = make_profile(ProfileKind.SMOOTH, 0.5, 5.0, 0.7)
        backward = make_profile(ProfileKind.SMOOTH, 5.0, 0.5, 0.7)
        t = np.linspace(-10.0, 10.0, 201)
        np.testing.assert_allclose(forward.evaluate(-t)[0], backward.evaluate(t)[0], rtol=0, atol=1e-12)
        np.testing.assert_allclose(forward.evaluate(t)[0] + forward.evaluate(-t)[0], 5.5, rtol=0, atol=1e-12)

    def test_derivative_matches_finite_difference(self, smooth):
        h = 1e-5
        for t in np.linspace(-5.0, 5.0, 11):
            numeric = (smooth.evaluate(t + h)[0] - smooth.evaluate(t - h)[0]) / (2 * h)
            assert numeric == pytest.approx(smooth.evaluate(t)[1], rel=1e-6)

    def test_phase_derivative_is_frequency(self, smooth):
        h = 1e-5
        for t in (-3.0, 0.0, 2.0):
            numeric = (smooth.phase(t + h) - smooth.phase(t - h)) / (2 * h)
            assert numeric == pytest.approx(smooth.evaluate(t)[0], rel=1e-7)

    def test_array_input_keeps_shape(self, smooth):
        omega, omega_dot = smooth.evaluate(np.zeros((3, 2)))
        assert omega.shape == (3, 2)
        assert omega_dot.shape == (3, 2)

    def test_non_finite_time_rejected(self, smooth):
        with pytest.raises(InputValidationError):
            smooth.evaluate(float("nan"))
        with pytest.raises(InputValidationError):
            smooth.evaluate(np.array([0.0, np.inf]))


@pytest.mark.unit
class TestProfileConstruction:
    """Validation and the other profile kinds"""

    def test_zero_tau_smooth_points_to_sudden(self):
        with pytest.raises(InputValidationError, match="sudden"):
            make_profile(ProfileKind.SMOOTH, 0.5, 5.0, 0.0)

    def test_non_positive_frequency_rejected(self):
        with pytest.raises(InputValidationError):
            make_profile(ProfileKind.SMOOTH, -0.5, 5.0, 1.0)

    def test_profile_for_picks_sudden_at_zero_tau(self):
        profile = profile_for(ModelParams(tau=0.0))
        assert profile.kind == ProfileKind.SUDDEN
        assert profile.evaluate(-1.0) == (0.5, 0.0)
        assert profile.evaluate(1.0) == (5.0, 0.0)

    def test_constant_profile(self):
        profile = make_profile(ProfileKind.SMOOTH, 1.0, 1.0, 1.0)
        assert profile.is_constant
        assert eval_frequency(profile, 0.3) == (1.0, 0.0)

    def test_custom_table(self):
        table = [(-2.0, 1.0), (-1.0, 1.2), (0.0, 2.0), (1.0, 2.8), (2.0, 3.0)]
        profile = profile_for(ModelParams(), table)
        assert profile.kind == ProfileKind.CUSTOM
        assert profile.omega1 == 1.0
        assert profile.omega2 == 3.0
        assert profile.evaluate(0.0)[0] == pytest.approx(2.0)
        assert profile.evaluate(-10.0) == (1.0, 0.0)
        assert profile.evaluate(10.0) == (3.0, 0.0)

    def test_custom_table_must_increase(self):
        table = [(0.0, 1.0), (1.0, 1.2), (1.0, 2.0), (2.0, 3.0)]
        with pytest.raises(InputValidationError, match="increasing"):
            make_profile(ProfileKind.CUSTOM, 1.0, 3.0, table=table)

    def test_custom_phase_is_continuous(self):
        table = [(-2.0, 1.0), (-1.0, 1.2), (0.0, 2.0), (1.0, 2.8), (2.0, 3.0)]
        profile = make_profile(ProfileKind.CUSTOM, 1.0, 3.0, table=table)
        for edge in (-2.0, 2.0):
            assert profile.phase(edge - 1e-9) == pytest.approx(profile.phase(edge + 1e-9), abs=1e-7)

    def test_uneven_custom_table_stays_monotone(self):
        """Widely spaced end rows next to a steep centre neither overshoot nor dip"""
        table = [(-200.0, 1.0), (-1.0, 1.2), (0.0, 2.0), (1.0, 2.8), (200.0, 3.0)]
        profile = make_profile(ProfileKind.CUSTOM, 1.0, 3.0, table=table)
        t = np.linspace(-200.0, 200.0, 40001)
        omega, omega_dot = profile.evaluate(t)
        assert np.all(omega >= 1.0 - 1e-12) and np.all(omega <= 3.0 + 1e-12)
        assert np.all(np.diff(omega) >= -1e-12)
        assert np.all(omega_dot >= -1e-12)
        np.testing.assert_allclose(profile.evaluate(np.array([-1.0, 0.0, 1.0]))[0], [1.2, 2.0, 2.8])

    def test_switch_interval(self, smooth):
        assert smooth.switch_interval() == pytest.approx((-40.0, 40.0, 0.1))
        assert make_profile(ProfileKind.SUDDEN, 0.5, 5.0).switch_interval() is None
        assert make_profile(ProfileKind.SMOOTH, 1.0, 1.0, 1.0).switch_interval() is None


@pytest.mark.unit
class TestWindow:
    """Integration window rules and the asymptote check"""

    def test_default_window(self, smooth):
        t_min, t_max = profile_window(smooth, NumericsConfig())
        assert t_min == pytest.approx(-80.0)
        assert t_max == pytest.approx(25.0)
        smooth.check_window(t_min, t_max, 1e-8)

    def test_short_window_names_edge(self, smooth):
        with pytest.raises(WindowTooShortError) as exc_info:
            smooth.check_window(-1.0, 30.0, 1e-8)
        assert exc_info.value.edge == "initial"
        with pytest.raises(WindowTooShortError) as exc_info:
            smooth.check_window(-80.0, 1.0, 1e-8)
        assert exc_info.value.edge == "final"

    def test_explicit_bounds_take_precedence(self, smooth):
        cfg = NumericsConfig(t_min=-50.0, t_max=40.0)
        assert profile_window(smooth, cfg) == (-50.0, 40.0)

    def test_custom_window_covers_table(self):
        table = [(-200.0, 1.0), (-1.0, 1.2), (0.0, 2.0), (1.0, 2.8), (200.0, 3.0)]
        profile = make_profile(ProfileKind.CUSTOM, 1.0, 3.0, table=table)
        t_min, t_max = profile_window(profile, NumericsConfig())
        assert t_min < -200.0
        assert t_max > 200.0
