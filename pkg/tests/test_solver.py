"""Multi-start constraint solving and the published gate tables."""
import math

import numpy as np
import pytest

import robustpulse as rp
from robustpulse.errors import SolverExhaustionError, ValidationError

from conftest import FIG1_TARGET, FIG1_ZERO_BOXES, FIG3_TARGET, simpson_integral


def test_table_row_counts(eps_table, beta_table):
    assert len(eps_table) == 11
    assert len(beta_table) == 10


def test_table_spot_values(eps_table, beta_table):
    row = [e for e in eps_table if e.label == "R(5pi/12,pi)"][0]
    assert row.coefficients == (1.24402, 3.00000, 2.01146, 1.26906)
    assert row.target.theta == pytest.approx(5 * np.pi / 12)
    assert row.target.phi == pytest.approx(np.pi)

    row = [e for e in beta_table if e.label == "R(pi/6,2.4pi)"][0]
    assert row.coefficients == (5.45961, 0.770847, 2.74485, 8.04491, 4.95240)
    assert row.aux["n3"] == 1


def test_every_entry_constructs(eps_table, beta_table):
    for entry in list(eps_table) + list(beta_table):
        pf = entry.phase_function()
        assert pf.chi_f == pytest.approx(entry.target.phi / 4)


def test_identity_row_target_is_minus_identity(eps_table):
    row = [e for e in eps_table if e.label == "I"][0]
    assert np.allclose(row.target.unitary(), -np.eye(2), atol=1e-12)


def test_verify_entry_representative_rows(eps_table, beta_table):
    for entry in (eps_table[0], eps_table[6], beta_table[0]):
        report = rp.verify_entry(entry)
        assert report.passed, entry.label
        assert report.residual.magnitude < 1e-3
        assert report.realized_infidelity < 1e-5


def test_verify_entry_negative_control(beta_table):
    entry = beta_table[0]
    corrupted = rp.GateTableEntry(
        entry.label, entry.target, entry.family,
        entry.coefficients[:2] + (entry.coefficients[2] + 0.1,)
        + entry.coefficients[3:], entry.noise_kind, entry.aux)
    report = rp.verify_entry(corrupted)
    assert not report.passed
    assert report.residual.magnitude > 1e-3


def test_solve_finds_both_fig1_zeros(fig1_solutions):
    assert len(fig1_solutions) >= 2
    for sol in fig1_solutions[:2]:
        assert abs(sol.residual_epsilon.primary) < 1e-8
    durations = [s.duration for s in fig1_solutions]
    assert durations == sorted(durations)
    a34 = [s.phase_function.coefficients[2:] for s in fig1_solutions[:2]]
    assert math.dist(a34[0], a34[1]) > 0.1  # genuinely distinct pulses


def test_solutions_recheck_independent_quadrature(fig1_solutions):
    """Frozen solutions re-checked with a Simpson oracle, not the solver path."""
    for sol in fig1_solutions[:2]:
        pf = sol.phase_function

        def integrand(x):
            p, dp, _ = pf.evaluate(x)
            s = np.sin(2 * x)
            return s * np.sqrt(1 + dp ** 2 * s ** 2) \
                * rp.omega_of_chi(pf, x) * np.exp(2j * p)

        val = simpson_integral(integrand, 0.0, pf.chi_f, n=1 << 15)
        assert abs(val) < 10 * 1e-8


def test_solve_deterministic_across_workers_and_reruns():
    req = rp.SolveRequest(
        target=FIG1_TARGET, family=rp.Family.POLY_SIN3, free_indices=(2, 3),
        base_coefficients=(0.0, -0.18, 0.0, 0.0), starts=6, seed=9,
        box=FIG1_ZERO_BOXES[0])
    first = rp.solutions_to_json(rp.solve(req))
    again = rp.solutions_to_json(rp.solve(req))
    parallel = rp.solutions_to_json(rp.solve(req, workers=3))
    assert first == again == parallel


def test_solve_analytic_beta_accepts_exact_seed():
    """A consistent beta-noise request lands on the closed form immediately."""
    target = rp.TargetRotation(-math.atan(8.0), np.pi)
    req = rp.SolveRequest(
        target=target, family=rp.Family.ANALYTIC_BETA, free_indices=(),
        noise_kinds=frozenset({rp.NoiseKind.BETA}), starts=1, seed=0)
    results = rp.solve(req)
    assert len(results) == 1
    pf = results[0].phase_function
    assert pf.aux["lam"] == 0.0
    assert abs(results[0].residual_beta.primary) < 1e-10


def test_solve_analytic_beta_with_zeta_corrections():
    """Free zeta coefficients keep the target while the head one is pinned."""
    target = rp.TargetRotation(-math.atan(8.0), np.pi)
    req = rp.SolveRequest(
        target=target, family=rp.Family.ANALYTIC_BETA, free_indices=(1,),
        noise_kinds=frozenset({rp.NoiseKind.BETA}), starts=4, seed=3,
        box=((-0.5, 0.5),))
    results = rp.solve(req)
    for sol in results:
        pf = sol.phase_function
        assert abs(sol.residual_beta.primary) < 1e-8
        dphi_f = float(pf.evaluate(pf.chi_f)[1])
        spec = rp.endpoint_conditions(target)
        assert dphi_f == pytest.approx(spec.dphi, abs=1e-6)
        if pf.aux.get("zeta"):
            # secondary beta constraint holds by the lambda quadrature
            r = rp.residual_beta(pf, antisymmetric=False)
            assert abs(r.secondary) < 1e-8


def test_solve_exhaustion_reports_best():
    req = rp.SolveRequest(
        target=FIG1_TARGET, family=rp.Family.POLY_SIN3, free_indices=(2, 3),
        base_coefficients=(0.0, -0.18, 0.0, 0.0), starts=2, seed=1,
        tol=1e-30, box=((5.0, 6.0), (5.0, 6.0)))
    with pytest.raises(SolverExhaustionError) as err:
        rp.solve(req)
    assert err.value.best_objective < 1e30
    assert err.value.best_objective > 0.0


def test_solve_request_validation():
    with pytest.raises(ValidationError):
        rp.SolveRequest(target=FIG1_TARGET, family=rp.Family.SIN2_SIN3,
                        free_indices=(0, 2))
    with pytest.raises(ValidationError):
        rp.SolveRequest(target=FIG1_TARGET, family=rp.Family.SIN2_SIN3,
                        free_indices=(2,), starts=0)


def test_target_invariance_under_free_parameters(fig1_template):
    """Endpoint-invisible terms move the waveform but not the gate."""
    rng = np.random.default_rng(17)
    base_pulse = rp.synthesize(fig1_template, n_samples=10001)
    base_op = rp.propagate(base_pulse)
    worst = 0.0
    for _ in range(20):
        a3, a4 = rng.uniform(-0.6, 0.6, size=2)
        pf = rp.PhaseFunction(rp.Family.POLY_SIN3,
                              fig1_template.coefficients[:2] + (a3, a4),
                              fig1_template.chi_f)
        op = rp.propagate(rp.synthesize(pf, n_samples=10001))
        worst = max(worst, rp.infidelity(op, base_op))
    assert worst < 1e-8


def test_solutions_json_shape(fig1_solutions):
    import json
    payload = json.loads(rp.solutions_to_json(fig1_solutions))
    assert len(payload) == len(fig1_solutions)
    assert set(payload[0]) == {"phase_function", "residual_beta",
                               "residual_epsilon", "duration"}
