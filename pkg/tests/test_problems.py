#!/usr/bin/env python
# -*- coding: utf-8 -*-
#
#  License: MIT
#
#  Copyright (c) 2020 Joerg Beckers

import math

import numpy as np
import pytest
import scipy.special

from imexsav.model import validateSystem, acceleration, residual
from imexsav.problems import (PROBLEMS, PSI_FACTOR, makeProblem, linearSdof, vanDerPol, vanDerPolPsiMax,
                              vanDerPolLimitCycleVelocity, duffingSdof, PendulumSolution, simplePendulum,
                              springPendulum, duffingChain)

@pytest.mark.parametrize("problemId", sorted(PROBLEMS))
def test_registered_problems_are_valid(problemId):
    problem = makeProblem(problemId)
    assert problem.problemId == problemId
    assert validateSystem(problem.system).ok
    assert problem.psiMaxEstimate > 0.0
    assert problem.psiRecommended == pytest.approx(PSI_FACTOR * problem.psiMaxEstimate)
    assert problem.u0.shape == problem.v0.shape == (problem.system.nDof,)

def test_unknown_problem():
    with pytest.raises(KeyError):
        makeProblem("double-pendulum")

def test_with_end_time_keeps_everything_else(sdof):
    shorter = sdof.withEndTime(1.5)
    assert shorter.tEnd == 1.5
    assert shorter.system is sdof.system
    assert shorter.psiMaxEstimate == sdof.psiMaxEstimate

# --- linear SDOF ---

def test_linear_sdof_recommended_psi(sdof):
    assert sdof.psiRecommended == pytest.approx(5.0, rel=0.02)
    assert sdof.period == pytest.approx(1.0)

def test_linear_sdof_initial_state_matches_closed_form():
    problem = linearSdof(zeta=0.1, p0=2.0, u0=0.3, v0=-1.2)
    U, V = problem.exactStates(np.array([0.0]))
    assert U[0, 0] == pytest.approx(0.3, abs=1e-13)
    assert V[0, 0] == pytest.approx(-1.2, abs=1e-13)

def test_linear_sdof_closed_form_satisfies_equation_of_motion():
    problem = linearSdof(zeta=0.1, p0=2.0, u0=0.3, v0=-1.2)
    h = 1e-5
    for t in (0.1, 0.77, 3.2):
        U, V = problem.exactStates(np.array([t - h, t, t + h]))
        assert (U[2, 0] - U[0, 0]) / (2 * h) == pytest.approx(V[1, 0], rel=1e-7, abs=1e-8)
        a = acceleration(problem.system, U[1], V[1], t)
        assert (V[2, 0] - V[0, 0]) / (2 * h) == pytest.approx(a[0], rel=1e-6, abs=1e-7)

def test_free_undamped_sdof_is_cosine(undampedSdof):
    t = np.linspace(0.0, 3.0, 7)
    U, V = undampedSdof.exactStates(t)
    np.testing.assert_allclose(U[:, 0], np.cos(2.0 * np.pi * t), atol=1e-13)
    np.testing.assert_allclose(V[:, 0], -2.0 * np.pi * np.sin(2.0 * np.pi * t), atol=1e-12)

def test_undamped_resonance_is_rejected():
    with pytest.raises(ValueError):
        linearSdof(zeta=0.0, omegaF=2.0 * math.pi)

@pytest.mark.parametrize("kwargs", [dict(zeta=1.0), dict(zeta=-0.1), dict(omega0=0.0)])
def test_linear_sdof_parameter_validation(kwargs):
    with pytest.raises(ValueError):
        linearSdof(**kwargs)

# --- Van der Pol ---

def test_van_der_pol_psi_max():
    assert vanDerPolPsiMax(2.0) == pytest.approx(8.9, abs=0.1)
    grid = np.linspace(-math.sqrt(3.0), math.sqrt(3.0), 200001)
    dense = np.max(0.5 * vanDerPolLimitCycleVelocity(grid, 2.0) ** 2 + 0.5 * grid ** 2)
    assert vanDerPolPsiMax(2.0) == pytest.approx(dense, abs=1e-3)

def test_van_der_pol_limit_cycle_velocity_vanishes_at_left_end():
    assert float(vanDerPolLimitCycleVelocity(-math.sqrt(3.0), 2.0)) == pytest.approx(0.0, abs=1e-12)

def test_van_der_pol_is_velocity_dependent():
    problem = vanDerPol()
    assert problem.system.isVelocityDependent()
    assert problem.psiRecommended == pytest.approx(890.0, rel=0.02)
    with pytest.raises(ValueError):
        vanDerPol(mu=0.0)

# --- Duffing ---

def test_duffing_psi_max_and_force():
    problem = duffingSdof()
    assert problem.psiMaxEstimate == pytest.approx(505062.5)
    assert problem.system.fNl(np.array([2.0]), np.array([0.0]), 0.0)[0] == pytest.approx(160.0)
    assert problem.system.fExt(0.0)[0] == pytest.approx(500.0)
    assert not problem.system.isVelocityDependent()

def test_duffing_without_cubic_term_is_linear():
    assert not duffingSdof(k3=0.0).system.hasNonlinearForce

# --- pendulum ---

def test_pendulum_amplitude_and_period():
    solution = PendulumSolution(1.0, 0.0, 1.95)
    assert solution.thetaMax == pytest.approx(2.6934, abs=1e-4)
    assert solution.period == pytest.approx(11.6576, abs=1e-3)
    assert solution.period == pytest.approx(4.0 * scipy.special.ellipk(solution.modulus ** 2), rel=1e-10)
    assert solution.timeOfAngle(solution.thetaMax) == pytest.approx(solution.quarter, rel=1e-10)

def test_pendulum_matches_jacobi_elliptic_functions():
    solution = PendulumSolution(1.0, 0.0, 1.95)
    k = solution.modulus
    for t in (0.4, 2.9, 5.5, 8.1, 11.0, 17.3):
        sn, cn, _, _ = scipy.special.ellipj(t, k * k)
        theta, speed = solution(t)
        assert theta[0] == pytest.approx(2.0 * math.asin(k * sn), abs=1e-9)
        assert speed[0] == pytest.approx(2.0 * k * cn, abs=1e-9)

@pytest.mark.parametrize("theta0, v0", [(0.5, 0.3), (0.5, -0.3), (-0.5, -0.3), (-0.5, 0.3), (0.0, -1.0)])
def test_pendulum_starts_from_its_initial_state(theta0, v0):
    solution = PendulumSolution(2.0, theta0, v0)
    theta, speed = solution(0.0)
    assert theta[0] == pytest.approx(theta0, abs=1e-8)
    assert speed[0] == pytest.approx(v0, abs=1e-8)

def test_pendulum_conserves_energy_along_the_exact_solution():
    solution = PendulumSolution(1.0, 0.2, 1.5)
    energy0 = 0.5 * 1.5 ** 2 + (1.0 - math.cos(0.2))
    for t in np.linspace(0.0, 20.0, 11):
        theta, speed = solution(t)
        assert 0.5 * speed[0] ** 2 + (1.0 - math.cos(theta[0])) == pytest.approx(energy0, rel=1e-9)

def test_small_amplitude_pendulum_has_linear_period():
    solution = PendulumSolution(1.0, 1e-4, 0.0)
    assert solution.period == pytest.approx(2.0 * math.pi, rel=1e-6)

def test_separatrix_is_rejected():
    with pytest.raises(ValueError):
        PendulumSolution(1.0, 0.0, 2.0)

def test_pendulum_problem_extras():
    problem = simplePendulum()
    assert problem.extras["thetaMax"] == pytest.approx(2.6934, abs=1e-4)
    assert problem.extras["firstPeakTime"] == pytest.approx(0.25 * problem.period, rel=1e-10)
    assert problem.psiRecommended == pytest.approx(190.0, rel=0.01)
    assert problem.tEnd == pytest.approx(2.0 * problem.period)

# --- spring pendulum ---

def test_spring_pendulum_manufactured_solution_has_zero_residual():
    problem = springPendulum()
    sys = problem.system
    rng = np.random.default_rng(7)
    w = 2.0 * math.pi
    for t in rng.uniform(0.0, 2.0, 1000):
        U, V = problem.exactStates(np.array([t]))
        a = np.full(2, -0.1 * w * w * math.sin(w * t))
        np.testing.assert_allclose(residual(sys, U[0], V[0], a, t), 0.0, atol=1e-11)

def test_spring_pendulum_psi_and_period():
    problem = springPendulum()
    assert problem.psiMaxEstimate == pytest.approx(0.4905)
    assert problem.psiRecommended == pytest.approx(49.05)
    assert problem.period == pytest.approx(1.0)

def test_spring_pendulum_collapsed_length_is_not_finite():
    problem = springPendulum()
    f = problem.system.fNl(np.array([-0.6, 0.0]), np.zeros(2), 0.0)
    assert np.all(np.isnan(f))

def test_spring_pendulum_tangent_matches_finite_differences():
    problem = springPendulum()
    sys = problem.system
    u, v = np.array([0.05, 0.3]), np.array([-0.2, 0.7])
    Ju, Jv = sys.fNlTangent(u, v, 0.0)
    h = 1e-6
    for j in range(2):
        e = np.zeros(2)
        e[j] = h
        np.testing.assert_allclose(Ju[:, j], (sys.fNl(u + e, v, 0.0) - sys.fNl(u - e, v, 0.0)) / (2 * h), atol=1e-7)
        np.testing.assert_allclose(Jv[:, j], (sys.fNl(u, v + e, 0.0) - sys.fNl(u, v - e, 0.0)) / (2 * h), atol=1e-7)

# --- Duffing chain ---

def test_chain_psi_max():
    assert duffingChain().psiMaxEstimate == pytest.approx(40.0)

def test_chain_linear_frequencies():
    sys = duffingChain(N=2, k3=0.0).system
    np.testing.assert_allclose(np.linalg.eigvalsh(sys.K), [(3.0 - math.sqrt(5.0)) / 2.0, (3.0 + math.sqrt(5.0)) / 2.0])
    assert not sys.hasNonlinearForce

def test_chain_forces_balance_and_tangent():
    sys = duffingChain(N=5).system
    rng = np.random.default_rng(3)
    u = rng.standard_normal(5)
    f = sys.fNl(u, np.zeros(5), 0.0)
    # internal link forces cancel, only the grounded link acts on the chain as a whole
    assert f.sum() == pytest.approx(10.0 * u[0] ** 3)
    J, _ = sys.fNlTangent(u, np.zeros(5), 0.0)
    np.testing.assert_allclose(J, J.T)
    h = 1e-6
    for j in range(5):
        e = np.zeros(5)
        e[j] = h
        np.testing.assert_allclose(J[:, j], (sys.fNl(u + e, 0, 0.0) - sys.fNl(u - e, 0, 0.0)) / (2 * h), atol=1e-5)

def test_chain_needs_two_masses():
    with pytest.raises(ValueError):
        duffingChain(N=1)
