"""Arc length, trajectory inversion, waveform sampling, sphere curve."""
import io
import math

import numpy as np
import pytest

import robustpulse as rp
from robustpulse.errors import (
    DomainError,
    EndpointDivergenceError,
    ValidationError,
)

from conftest import simpson_integral
from test_ansatz import sample_phase_functions


def test_arc_length_zero_family_is_identity():
    pf = rp.PhaseFunction(rp.Family.ZERO, (), 2.0)
    assert rp.arc_length(pf, 1.2) == pytest.approx(1.2, abs=1e-13)


def test_arc_length_against_simpson_oracle(fig3_pf):
    oracle = simpson_integral(
        lambda x: np.sqrt(1 + (4 - 4 * np.cos(4 * x)) ** 2 * np.sin(2 * x) ** 2),
        0.0, np.pi / 4, n=1_000_000)
    assert rp.arc_length(fig3_pf, np.pi / 4) == pytest.approx(
        oracle.real, abs=1e-10)


def test_arc_length_domain_error(fig3_pf):
    with pytest.raises(DomainError):
        rp.arc_length(fig3_pf, 1.0)


def test_invert_zero_family_linear():
    pf = rp.PhaseFunction(rp.Family.ZERO, (), 1.5)
    traj = rp.invert_chi(pf, 101)
    assert np.allclose(traj.chi, traj.times, atol=1e-12)
    assert np.allclose(traj.chidot, 1.0, atol=1e-13)


def test_invert_fig3_endpoint_consistency(fig3_pf):
    traj = rp.invert_chi(fig3_pf, 2001)
    assert traj.chi[-1] == pytest.approx(np.pi / 4, abs=1e-12)
    assert traj.t_f == pytest.approx(rp.arc_length(fig3_pf, np.pi / 4),
                                     abs=1e-12)


def test_invert_round_trip(fig3_pf):
    """arc_length(chi0(t_i)) must reproduce t_i to 1e-9."""
    traj = rp.invert_chi(fig3_pf, 2001)
    for k in range(0, 2001, 250):
        assert rp.arc_length(fig3_pf, traj.chi[k]) == pytest.approx(
            traj.times[k], abs=1e-9)


def test_invert_monotone_for_table_rows(table_pulses):
    for entry, pf, _ in table_pulses[:3] + table_pulses[-3:]:
        traj = rp.invert_chi(pf, 801)
        assert np.all(np.diff(traj.chi) > 0), entry.label


def test_chidot_bound_and_pointwise_formula(table_pulses):
    _, pf, _ = table_pulses[0]
    traj = rp.invert_chi(pf, 801)
    assert np.all(traj.chidot <= 1.0 + 1e-12)
    assert np.all(traj.chidot > 0)
    _, dp, _ = pf.evaluate(traj.chi)
    expected = 1.0 / np.sqrt(1 + dp ** 2 * np.sin(2 * traj.chi) ** 2)
    assert np.allclose(traj.chidot, expected, atol=1e-13)


def test_invert_requires_16_samples(fig3_pf):
    with pytest.raises(ValidationError):
        rp.invert_chi(fig3_pf, 8)


def test_omega_zero_family():
    pf = rp.PhaseFunction(rp.Family.ZERO, (), 1.0)
    assert rp.omega_of_chi(pf, 0.4) == 0.0


def test_omega_closed_form_point(fig3_pf):
    # at chi = pi/8: Phi' = 4, Phi'' = 16, s = c = sqrt(2)/2
    # numerator = (16 + 16 + 64) sqrt(2)/2, denominator = 2 * 27
    assert rp.omega_of_chi(fig3_pf, np.pi / 8) == pytest.approx(
        -8 * math.sqrt(2) / 9, rel=1e-14)


def test_omega_fig3_amplitude_scale(fig3_pf):
    """Peak drive ~ 3.55 beta0; the quoted hardware numbers (20 MHz at
    beta = 5 MHz) put it loosely at ~4."""
    chi = np.linspace(0, np.pi / 4, 200_001)
    dp = 4 - 4 * np.cos(4 * chi)
    d2p = 16 * np.sin(4 * chi)
    s, c = np.sin(2 * chi), np.cos(2 * chi)
    oracle = -(d2p * s + 4 * dp * c + 2 * dp ** 3 * s ** 2 * c) / (
        2 * (1 + dp ** 2 * s ** 2) ** 1.5)
    peak = np.abs(rp.omega_of_chi(fig3_pf, chi)).max()
    assert peak == pytest.approx(np.abs(oracle).max(), rel=1e-12)
    assert 3.0 < peak < 4.5


def test_synthesize_zero_family():
    pf = rp.PhaseFunction(rp.Family.ZERO, (), 1.3)
    pulse = rp.synthesize(pf, n_samples=64, antisymmetric=False)
    assert np.all(pulse.omega == 0.0)
    assert pulse.t_f == pytest.approx(1.3, abs=1e-12)


def test_synthesize_antisymmetric_exact_oddness(fig3_pf):
    pulse = rp.synthesize(fig3_pf, n_samples=501)
    assert pulse.antisymmetric
    assert len(pulse.times) == 2 * 501 - 1
    # mirrored samples cancel exactly, including the sign of t
    assert np.all(pulse.omega + pulse.omega[::-1] == 0.0)
    assert np.all(pulse.times + pulse.times[::-1] == 0.0)
    assert pulse.omega[500] == 0.0  # t = 0 sample


@pytest.mark.parametrize("idx", range(5))
def test_duration_identity_per_family(idx):
    """2 t_f equals twice the arc-length integral to 1e-9 for every family."""
    pf = sample_phase_functions()[idx]
    pulse = rp.synthesize(pf, n_samples=2001)

    def integrand(x):
        _, dp, _ = pf.evaluate(x)
        return np.sqrt(1 + dp ** 2 * np.sin(2 * x) ** 2)

    oracle = simpson_integral(integrand, 0.0, pf.chi_f, n=1 << 16).real
    assert pulse.duration == pytest.approx(2 * oracle, abs=1e-9)


def test_refinement_convergence(fig3_pf):
    """Doubling the sampling moves shared samples by less than O(dt^2)."""
    coarse = rp.synthesize(fig3_pf, n_samples=1001)
    fine = rp.synthesize(fig3_pf, n_samples=2001)
    shared_coarse = coarse.omega
    shared_fine = fine.omega[::2]
    dt = coarse.times[1] - coarse.times[0]
    assert np.max(np.abs(shared_coarse - shared_fine)) < dt ** 2


def test_endpoint_divergence_error():
    """A general pulse whose waveform blows up at chi_f is rejected."""
    pf = rp.PhaseFunction(rp.Family.POLY_SIN3, (-5.1e7, 3.4e9, 0.0, 0.0), 0.01)
    assert abs(rp.omega_of_chi(pf, pf.chi_f)) > 1e6
    with pytest.raises(EndpointDivergenceError):
        rp.synthesize(pf, n_samples=64, antisymmetric=False)
    # the same phase function is fine as an antisymmetric pulse
    pulse = rp.synthesize(pf, n_samples=64, antisymmetric=True)
    assert pulse.antisymmetric


def test_sphere_curve_endpoints(fig2_pf):
    pts = rp.sphere_curve(fig2_pf, 501)
    assert pts[0, 0] == 0.0 and pts[0, 1] == 0.0  # north pole
    assert pts[-1, 0] == pytest.approx(fig2_pf.chi_f / 2)   # = phi / 8
    assert pts[-1, 0] == pytest.approx(2.8 * np.pi / 8, rel=1e-12)


def test_sphere_curve_length_converges(fig3_pf):
    pts = rp.sphere_curve(fig3_pf, 10_001)
    length = rp.curve_length(pts)
    t_f = rp.arc_length(fig3_pf, fig3_pf.chi_f)
    assert abs(length - t_f) / t_f < 1e-3
    finer = rp.curve_length(rp.sphere_curve(fig3_pf, 40_001))
    assert abs(finer - t_f) < abs(length - t_f)


def test_sphere_curve_validation(fig3_pf):
    with pytest.raises(ValidationError):
        rp.sphere_curve(fig3_pf, 1)


def test_pulse_csv_round_trip(fig3_pf):
    pulse = rp.synthesize(fig3_pf, n_samples=301)
    buf = io.StringIO()
    rp.pulse_to_csv(pulse, buf)
    buf.seek(0)
    clone = rp.pulse_from_csv(buf)
    assert clone.beta0 == pulse.beta0
    assert clone.t_f == pulse.t_f
    assert clone.antisymmetric == pulse.antisymmetric
    assert np.array_equal(clone.times, pulse.times)
    assert np.array_equal(clone.omega, pulse.omega)


def test_sphere_curve_csv(fig3_pf):
    buf = io.StringIO()
    rp.sphere_curve_to_csv(rp.sphere_curve(fig3_pf, 11), buf)
    lines = buf.getvalue().strip().splitlines()
    assert lines[0] == "polar,azimuth"
    assert len(lines) == 12
