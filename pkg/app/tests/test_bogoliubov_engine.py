"""
Tests for the Bogoliubov coefficient integrator
"""

import dataclasses

import numpy as np
import pytest

from app.core.exceptions import IntegratorFailureError, WindowTooShortError
from app.schemas.model import NumericsConfig, ProfileKind
from app.services.bogoliubov_engine import (
    BogoliubovEngine,
    bogoliubov_engine,
    dce_photon_number,
    extract_asymptotics,
    integrate_bogoliubov,
)
from app.services.frequency_profile import make_profile

N_SUDDEN = 2.025  # (rho - 1)^2 / (4 rho) at rho = 10


@pytest.fixture(scope="module")
def switch_trajectory():
    """Smooth switch 0.5 -> 5.0 with tau = 1 and driven channels at E0 = 0.8."""
    profile = make_profile(ProfileKind.SMOOTH, 0.5, 5.0, 1.0)
    return bogoliubov_engine.integrate(profile, NumericsConfig(), E0=0.8)


@pytest.mark.unit
class TestBogoliubovIntegration:
    """Adaptive integration of alpha(t), beta(t)"""

    def test_initial_conditions(self, switch_trajectory):
        t0 = switch_trajectory.times[0]
        assert abs(switch_trajectory.beta[0]) <= 1e-15
        assert abs(switch_trajectory.alpha[0] * np.exp(1j * 0.5 * t0) - 1.0) < 1e-12

    def test_symplectic_invariant(self, switch_trajectory):
        invariant = np.abs(switch_trajectory.alpha) ** 2 - np.abs(switch_trajectory.beta) ** 2
        assert np.max(np.abs(invariant - 1.0)) < 1e-9
        assert switch_trajectory.symplectic_drift < 1e-9

    def test_asymptotic_invariant(self, switch_trajectory):
        alpha_inf, beta_inf = extract_asymptotics(switch_trajectory)
        assert abs(alpha_inf) ** 2 - abs(beta_inf) ** 2 == pytest.approx(1.0, abs=1e-9)
        assert switch_trajectory.n_dce == dce_photon_number(beta_inf)

    def test_transient_maximum_exceeds_final(self, switch_trajectory):
        """|beta(t)|^2 peaks inside the switch above its final value"""
        photons = switch_trajectory.photon_number
        peak = int(np.argmax(photons))
        assert photons[peak] > switch_trajectory.n_dce
        assert peak < len(photons) - 1

    def test_driven_channels_start_at_zero(self, switch_trajectory):
        channels = switch_trajectory.channels
        assert channels is not None
        assert channels.E0 == 0.8
        assert channels.B[0] == 0
        assert channels.inner[0] == 0
        assert channels.K[0] == 0
        assert channels.B.shape == switch_trajectory.times.shape


@pytest.mark.unit
class TestLimits:
    """Sudden, constant and adiabatic limits"""

    def test_constant_frequency_creates_no_photons(self):
        profile = make_profile(ProfileKind.SMOOTH, 1.0, 1.0, 1.0)
        traj = integrate_bogoliubov(profile, NumericsConfig())
        assert np.max(np.abs(traj.beta)) < 1e-12
        np.testing.assert_allclose(np.abs(traj.alpha), 1.0, rtol=0, atol=1e-9)
        assert traj.n_dce == 0.0

    def test_fast_switch_reaches_sudden_closed_form(self):
        profile = make_profile(ProfileKind.SMOOTH, 0.5, 5.0, 1e-3)
        traj = integrate_bogoliubov(profile, NumericsConfig())
        assert traj.n_dce == pytest.approx(N_SUDDEN, rel=0.01)

    def test_sudden_profile_is_exact(self):
        profile = make_profile(ProfileKind.SUDDEN, 0.5, 5.0)
        traj = integrate_bogoliubov(profile, NumericsConfig())
        assert traj.n_dce == pytest.approx(N_SUDDEN, rel=1e-12)
        assert traj.n_steps == 0
        before = traj.times < 0
        assert np.all(traj.beta[before] == 0)

    def test_sudden_ratio_symmetry(self):
        up = integrate_bogoliubov(make_profile(ProfileKind.SUDDEN, 0.5, 5.0), NumericsConfig())
        down = integrate_bogoliubov(make_profile(ProfileKind.SUDDEN, 5.0, 0.5), NumericsConfig())
        assert up.n_dce == pytest.approx(down.n_dce, rel=1e-12)

    def test_time_reversed_switch_creates_same_photons(self):
        up = integrate_bogoliubov(make_profile(ProfileKind.SMOOTH, 0.5, 5.0, 0.5), NumericsConfig())
        down = integrate_bogoliubov(make_profile(ProfileKind.SMOOTH, 5.0, 0.5, 0.5), NumericsConfig())
        assert up.n_dce == pytest.approx(down.n_dce, rel=1e-6)

    def test_slower_switch_creates_fewer_photons(self):
        photons = [
            integrate_bogoliubov(make_profile(ProfileKind.SMOOTH, 0.5, 5.0, tau), NumericsConfig()).n_dce
            for tau in (0.5, 1.0, 2.0)
        ]
        assert photons[0] > photons[1] > photons[2] > 0
        assert photons[0] < N_SUDDEN


@pytest.mark.unit
class TestWindowContract:
    """Window errors surface instead of silently wrong asymptotics"""

    def test_short_window_raises(self):
        profile = make_profile(ProfileKind.SMOOTH, 0.5, 5.0, 1.0)
        with pytest.raises(WindowTooShortError) as exc_info:
            integrate_bogoliubov(profile, NumericsConfig(t_min=-5.0, t_max=5.0))
        assert exc_info.value.edge == "initial"
        assert exc_info.value.exit_code == 2

    def test_channels_reused_for_same_frequency(self, switch_trajectory):
        assert bogoliubov_engine.with_channels(switch_trajectory, 0.8) is switch_trajectory.channels


@pytest.mark.unit
class TestShortSwitches:
    """Switches much shorter than the window are integrated, not stepped over"""

    @pytest.mark.parametrize("tau", [1e-4, 1e-3, 1e-2])
    def test_short_switch_reaches_sudden_closed_form(self, tau):
        traj = integrate_bogoliubov(make_profile(ProfileKind.SMOOTH, 0.5, 5.0, tau), NumericsConfig())
        assert traj.n_dce == pytest.approx(N_SUDDEN, rel=0.02)
        assert traj.symplectic_drift < 1e-8

    def test_photons_fall_off_from_sudden_value(self):
        photons = [
            integrate_bogoliubov(make_profile(ProfileKind.SMOOTH, 0.5, 5.0, tau), NumericsConfig()).n_dce
            for tau in (1e-3, 1e-2, 0.05)
        ]
        assert photons[0] > photons[1] > photons[2] > 1.0
        assert photons[0] < N_SUDDEN * (1.0 + 1e-6)

    def test_adiabatic_switch_is_exponentially_suppressed(self):
        """tau * omega1 = 10 leaves less than a thousandth of the sudden photon number"""
        traj = integrate_bogoliubov(make_profile(ProfileKind.SMOOTH, 0.5, 5.0, 20.0), NumericsConfig())
        assert traj.n_dce < 1e-3 * N_SUDDEN

    def test_window_split_around_switch(self):
        profile = make_profile(ProfileKind.SMOOTH, 0.5, 5.0, 1e-3)
        segments = BogoliubovEngine.segments(profile, -80.0, 8.0)
        assert len(segments) == 3
        assert segments[0][0] == -80.0
        assert segments[1][:2] == pytest.approx((-0.04, 0.04))
        assert segments[1][2] == pytest.approx(1e-4)
        assert segments[2][1] == 8.0
        assert segments[0][2] == np.inf and segments[2][2] == np.inf

    def test_switch_clipped_to_window(self):
        profile = make_profile(ProfileKind.SMOOTH, 0.5, 5.0, 1.0)
        segments = BogoliubovEngine.segments(profile, -80.0, 25.0)
        assert segments == [(-80.0, -40.0, np.inf), (-40.0, 25.0, pytest.approx(0.1))]

    @pytest.mark.parametrize("kind, omega2", [(ProfileKind.SUDDEN, 5.0), (ProfileKind.SMOOTH, 0.5)])
    def test_no_split_without_switch(self, kind, omega2):
        profile = make_profile(kind, 0.5, omega2, 1.0)
        assert BogoliubovEngine.segments(profile, -80.0, 25.0) == [(-80.0, 25.0, np.inf)]

    def test_custom_table_core_step(self):
        profile = make_profile(ProfileKind.CUSTOM, 0, 0, table=[(-2.0, 1.0), (-1.0, 1.5), (0.5, 2.0), (2.0, 3.0)])
        segments = BogoliubovEngine.segments(profile, -50.0, 50.0)
        assert segments[1] == (-2.0, 2.0, 0.25)

    def test_missed_switch_is_reported(self):
        traj = integrate_bogoliubov(make_profile(ProfileKind.SMOOTH, 0.5, 5.0, 1e-3), NumericsConfig())
        with pytest.raises(IntegratorFailureError) as exc_info:
            bogoliubov_engine.check_switch_resolved(dataclasses.replace(traj, beta_inf=0j))
        assert exc_info.value.exit_code == 2
        assert exc_info.value.details["expected"] == pytest.approx(N_SUDDEN)

    def test_resolution_guard_ignores_slow_switch(self, switch_trajectory):
        bogoliubov_engine.check_switch_resolved(dataclasses.replace(switch_trajectory, beta_inf=0j))

    def test_uneven_custom_table_integrates(self):
        table = [(-200.0, 1.0), (-1.0, 1.2), (0.0, 2.0), (1.0, 2.8), (200.0, 3.0)]
        traj = integrate_bogoliubov(make_profile(ProfileKind.CUSTOM, 1.0, 3.0, table=table), NumericsConfig())
        assert traj.window[0] < -200.0 and traj.window[1] > 200.0
        assert 0.0 < traj.n_dce < (3.0 - 1.0) ** 2 / (4.0 * 3.0)
        assert traj.symplectic_drift < 1e-8
