"""Infidelity metric, square baseline, sweeps, power-law fits."""
import io
import json
import math

import numpy as np
import pytest

import robustpulse as rp
from robustpulse.errors import ValidationError
from robustpulse.pauli import IDENTITY, SIGMA_X, SIGMA_Y, SIGMA_Z

from conftest import FIG1_TARGET, FIG3_TARGET


def random_su2(rng):
    v = rng.normal(size=4)
    v /= np.linalg.norm(v)
    return (v[0] * IDENTITY - 1j * (v[1] * SIGMA_X + v[2] * SIGMA_Y
                                    + v[3] * SIGMA_Z))


def test_infidelity_identical():
    u = random_su2(np.random.default_rng(0))
    assert rp.infidelity(u, u) == pytest.approx(0.0, abs=1e-15)


def test_infidelity_sigma_x_vs_identity():
    assert rp.infidelity(SIGMA_X, IDENTITY) == pytest.approx(2.0 / 3.0,
                                                             abs=1e-15)


def test_infidelity_symmetry_and_phase_invariance():
    rng = np.random.default_rng(3)
    for _ in range(10):
        u, v = random_su2(rng), random_su2(rng)
        assert abs(rp.infidelity(u, v) - rp.infidelity(v, u)) < 1e-12
        alpha = rng.uniform(0, 2 * np.pi)
        assert rp.infidelity(np.exp(1j * alpha) * u, u) < 1e-12


def test_infidelity_trace_form_oracle():
    """The Pauli-sum form equals (4 - |Tr(T^dag U)|^2) / 6 for unitaries."""
    rng = np.random.default_rng(7)
    for _ in range(20):
        u, t = random_su2(rng), random_su2(rng)
        oracle = (4 - abs(np.trace(t.conj().T @ u)) ** 2) / 6
        assert rp.infidelity(u, t) == pytest.approx(oracle, abs=1e-13)


def test_infidelity_rejects_nonunitary():
    with pytest.raises(ValidationError):
        rp.infidelity(np.diag([1.0, 2.0]), IDENTITY)


def test_fit_power_law_exact_quadratic():
    xs = np.logspace(-3, -1, 12)
    coeff, expo = rp.fit_power_law(xs, 3.0 * xs ** 2)
    assert coeff == pytest.approx(3.0, rel=1e-12)
    assert expo == pytest.approx(2.0, abs=1e-12)


def test_fit_power_law_noisy_quartic():
    rng = np.random.default_rng(11)
    xs = np.logspace(-3, -1, 30)
    ys = 0.9 * xs ** 4 * (1 + 0.01 * rng.standard_normal(30))
    coeff, expo = rp.fit_power_law(xs, ys)
    assert abs(expo - 4.0) < 0.05
    assert coeff == pytest.approx(0.9, rel=0.1)


def test_fit_power_law_rejects_bad_input():
    with pytest.raises(ValidationError):
        rp.fit_power_law([1e-3, 1e-2, 1e-1], [1.0, -1.0, 1.0])
    with pytest.raises(ValidationError):
        rp.fit_power_law([1e-3, 1e-2], [1.0, 1.0])


# --- square baseline ---------------------------------------------------------

def test_square_baseline_reconstructs_random_targets():
    rng = np.random.default_rng(2024)
    for _ in range(10):
        target = random_su2(rng)
        seq = rp.square_baseline(target)
        assert rp.infidelity(seq.evolution(), target) < 1e-10
        for t in (seq.t_a, seq.t_b, seq.t_c):
            assert 0.0 <= t < 2 * np.pi


def test_square_baseline_accepts_rotation_and_operator(fig3_pulse):
    seq1 = rp.square_baseline(FIG3_TARGET)
    op = rp.propagate(fig3_pulse)
    seq2 = rp.square_baseline(op)
    assert rp.infidelity(seq1.evolution(), seq2.evolution()) < 1e-10


def test_square_baseline_free_precession_periodicity():
    """Shifting a free segment by the x-precession period is invisible."""
    seq = rp.square_baseline(FIG3_TARGET)
    shifted = rp.SquareSequence(seq.t_a + 2 * np.pi, seq.t_b, seq.t_c,
                                seq.tau, seq.beta0)
    assert rp.infidelity(shifted.evolution(), seq.evolution()) < 1e-12


def test_square_baseline_tau_value():
    seq = rp.square_baseline(FIG3_TARGET)
    assert seq.tau == pytest.approx(np.pi / (2 * math.sqrt(2)), rel=1e-15)


def test_square_baseline_known_quadratic_coefficients():
    """Regression of the two published baseline fits."""
    seq3 = rp.square_baseline(FIG3_TARGET)
    sw3 = rp.noise_sweep(seq3, rp.NoiseKind.BETA)
    assert abs(sw3.fit_exponent - 2.0) <= 0.1
    assert abs(sw3.fit_coefficient / 15.0 - 1.0) <= 0.3

    seq2 = rp.square_baseline(FIG1_TARGET)
    sw2 = rp.noise_sweep(seq2, rp.NoiseKind.EPSILON)
    assert abs(sw2.fit_exponent - 2.0) <= 0.1
    assert abs(sw2.fit_coefficient / 2.2 - 1.0) <= 0.3


# --- sweeps ------------------------------------------------------------------

def test_sweep_zero_noise_point(fig3_pulse):
    grid = np.concatenate([[0.0], np.logspace(-3, -2, 4)])
    sweep = rp.noise_sweep(fig3_pulse, rp.NoiseKind.BETA, grid=grid)
    assert sweep.infidelities[0] < 1e-10
    seq = rp.square_baseline(FIG3_TARGET)
    sweep_b = rp.noise_sweep(seq, rp.NoiseKind.BETA, grid=grid)
    assert sweep_b.infidelities[0] < 1e-10


def test_sweep_grid_validation(fig3_pulse):
    with pytest.raises(ValidationError):
        rp.noise_sweep(fig3_pulse, rp.NoiseKind.BETA, grid=[1e-2, 1e-3])


def test_sweep_workers_deterministic():
    seq = rp.square_baseline(FIG3_TARGET)
    a = rp.noise_sweep(seq, rp.NoiseKind.BETA, workers=1)
    b = rp.noise_sweep(seq, rp.NoiseKind.BETA, workers=4)
    assert np.array_equal(a.infidelities, b.infidelities)


def test_sweep_fit_window_stability():
    """Moving the fit window by one grid point barely moves the exponent."""
    seq = rp.square_baseline(FIG3_TARGET)
    grid = rp.default_noise_grid()
    sweep = rp.noise_sweep(seq, rp.NoiseKind.BETA, grid=grid)
    lo, hi = sweep.fit_window
    for window in ((lo + 1, hi), (lo, hi + 1)):
        xs = grid[window[0]:window[1]]
        ys = sweep.infidelities[window[0]:window[1]]
        _, expo = rp.fit_power_law(xs, ys)
        assert abs(expo - sweep.fit_exponent) < 0.1


def test_sweep_csv_and_json(fig3_pulse):
    grid = np.logspace(-3, -2, 5)
    sweep = rp.noise_sweep(fig3_pulse, rp.NoiseKind.BETA, grid=grid)
    buf = io.StringIO()
    sweep.to_csv(buf)
    lines = buf.getvalue().strip().splitlines()
    assert lines[0] == "noise,infidelity"
    assert len(lines) == 1 + 5 + 1
    assert lines[-1].startswith("# fit_c=")
    payload = json.loads(sweep.to_json())
    assert set(payload) == {"noise_values", "infidelities",
                            "fit_coefficient", "fit_exponent", "fit_window"}


def test_first_order_sensitivity_discriminates(fig3_pulse):
    flat = rp.first_order_sensitivity(fig3_pulse, rp.NoiseKind.BETA)
    assert flat < 1e-6
    seq = rp.square_baseline(FIG3_TARGET)
    rough = rp.first_order_sensitivity(seq, rp.NoiseKind.BETA)
    assert rough > 1e-3


def test_corrected_vs_baseline_separation(fig3_pulse, fig2_pulse):
    """At delta = 1e-2 the corrected pulse beats its baseline by >= 10x."""
    for pulse, target, kind in ((fig3_pulse, FIG3_TARGET, rp.NoiseKind.BETA),
                                (fig2_pulse, FIG1_TARGET,
                                 rp.NoiseKind.EPSILON)):
        ref = rp.propagate(pulse)
        noise = (rp.NoiseRealization(delta_beta=1e-2)
                 if kind is rp.NoiseKind.BETA
                 else rp.NoiseRealization(delta_epsilon=1e-2))
        corrected = rp.infidelity(rp.propagate(pulse, noise), ref)
        seq = rp.square_baseline(target)
        base = rp.infidelity(
            seq.evolution(**{"delta_beta" if kind is rp.NoiseKind.BETA
                             else "delta_epsilon": 1e-2}),
            seq.evolution())
        assert base > 10 * corrected
