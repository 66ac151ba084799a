#!/usr/bin/env python
# -*- coding: utf-8 -*-
#
#  License: MIT
#
#  Copyright (c) 2020 Joerg Beckers

import numpy as np
import pytest

from imexsav.baselines import (NewtonConfig, newtonSolve, finiteDifferenceJacobian, generalizedAlphaParameters,
                               integrateNewmarkTr, integrateGeneralizedAlpha, integrateBathe,
                               integrateCentralDifference, integrateRk4)
from imexsav.errors import NonConvergence
from imexsav.metrics import convergenceSlope
from imexsav.model import pseudoEnergy
from imexsav.problems import vanDerPol

from conftest import displacementError

def test_newton_converges_in_one_iteration_on_linear_residual():
    A = np.array([[3.0, 1.0], [1.0, 2.0]])
    b = np.array([1.0, -1.0])
    result = newtonSolve(lambda x: A @ x - b, lambda x: A, np.zeros(2))
    assert result.iterations == 1
    np.testing.assert_allclose(result.x, np.linalg.solve(A, b), rtol=1e-12)

def test_newton_solves_cubic():
    result = newtonSolve(lambda x: x ** 3 - 8.0, lambda x: np.diag(3.0 * x ** 2), np.array([3.0]),
                         NewtonConfig(absTol=1e-12))
    assert result.x[0] == pytest.approx(2.0, rel=1e-12)
    assert result.iterations > 1

def test_newton_iteration_cap():
    with pytest.raises(NonConvergence) as info:
        newtonSolve(lambda x: x ** 3 - 8.0, lambda x: np.diag(3.0 * x ** 2), np.array([10.0]),
                    NewtonConfig(absTol=1e-12, maxIter=2))
    assert info.value.iterations == 2
    assert info.value.reason == "iteration cap reached"

def test_non_convergence_keeps_reason_when_tagged_with_step():
    error = NonConvergence(np.array([1.0]), 2.5, 7, reason="singular Jacobian").atStep(12)
    assert error.step == 12
    assert error.reason == "singular Jacobian"
    assert str(error).endswith("at step 12: singular Jacobian.")

def test_newton_singular_jacobian():
    with pytest.raises(NonConvergence):
        newtonSolve(lambda x: x * x + 1.0, lambda x: np.diag(2.0 * x), np.array([0.0]))

def test_newton_finite_difference_fallback():
    result = newtonSolve(lambda x: np.array([x[0] ** 2 - 4.0, x[1] - x[0]]), None, np.array([3.0, 0.0]))
    np.testing.assert_allclose(result.x, [2.0, 2.0], atol=1e-7)

def test_finite_difference_jacobian():
    fun = lambda x: np.array([np.sin(x[0]) * x[1], x[0] ** 2])
    x = np.array([0.3, 2.0])
    expected = np.array([[np.cos(0.3) * 2.0, np.sin(0.3)], [0.6, 0.0]])
    np.testing.assert_allclose(finiteDifferenceJacobian(fun, x), expected, atol=1e-7)

def test_newton_config_validation():
    with pytest.raises(ValueError):
        NewtonConfig(absTol=0.0)
    with pytest.raises(ValueError):
        NewtonConfig(maxIter=0)

def test_trapezoidal_rule_conserves_energy_of_undamped_oscillator(undampedSdof):
    sys = undampedSdof.system
    traj = integrateNewmarkTr(sys, undampedSdof.period / 20, 5 * undampedSdof.period, undampedSdof.u0, undampedSdof.v0)
    energies = traj.pseudoEnergies(sys)
    np.testing.assert_allclose(energies, energies[0], rtol=1e-9)
    assert set(traj.newtonIterations) == {1}
    assert traj.linearSolves == traj.nSteps

def test_generalized_alpha_with_unit_radius_is_trapezoidal(sdof):
    dt = sdof.period / 40
    tr = integrateNewmarkTr(sdof.system, dt, 2.0, sdof.u0, sdof.v0)
    ga = integrateGeneralizedAlpha(sdof.system, 1.0, dt, 2.0, sdof.u0, sdof.v0)
    np.testing.assert_allclose(ga.u, tr.u, rtol=1e-9, atol=1e-12)

@pytest.mark.parametrize("rhoInf", [0.0, 0.5, 1.0])
def test_generalized_alpha_parameters_are_second_order(rhoInf):
    alphaM, alphaF, beta, gamma = generalizedAlphaParameters(rhoInf)
    assert gamma == pytest.approx(0.5 - alphaM + alphaF)
    assert beta == pytest.approx(0.25 * (1.0 - alphaM + alphaF) ** 2)

def test_generalized_alpha_rejects_radius_outside_unit_interval():
    with pytest.raises(ValueError):
        generalizedAlphaParameters(1.5)

def test_bathe_uses_two_linear_sub_steps(sdof):
    traj = integrateBathe(sdof.system, 0.5, 0.05, 1.0, sdof.u0, sdof.v0)
    assert len(traj.newtonIterations) == 2 * traj.nSteps
    assert set(traj.newtonIterations) == {1}
    assert traj.linearSolves == 2 * traj.nSteps

def test_bathe_rejects_gamma_outside_unit_interval(sdof):
    with pytest.raises(ValueError):
        integrateBathe(sdof.system, 1.0, 0.05, 1.0, sdof.u0, sdof.v0)

def _runs(sdof):
    return {
        "newmark-tr": lambda dt: integrateNewmarkTr(sdof.system, dt, sdof.period, sdof.u0, sdof.v0),
        "generalized-alpha": lambda dt: integrateGeneralizedAlpha(sdof.system, 0.0, dt, sdof.period, sdof.u0, sdof.v0),
        "bathe": lambda dt: integrateBathe(sdof.system, 0.5, dt, sdof.period, sdof.u0, sdof.v0),
        "central-difference": lambda dt: integrateCentralDifference(sdof.system, dt, sdof.period, sdof.u0, sdof.v0),
    }

@pytest.mark.parametrize("scheme", ["newmark-tr", "generalized-alpha", "bathe", "central-difference"])
def test_second_order_baselines(scheme, sdof):
    run = _runs(sdof)[scheme]
    dts = [sdof.period / 100, sdof.period / 200, sdof.period / 400]
    errors = [displacementError(sdof, run(dt)) for dt in dts]
    assert convergenceSlope(dts, errors).slope == pytest.approx(2.0, abs=0.3)

def test_rk4_is_fourth_order(sdof):
    dts = [sdof.period / 50, sdof.period / 100, sdof.period / 200]
    errors = [displacementError(sdof, integrateRk4(sdof.system, dt, sdof.period, sdof.u0, sdof.v0)) for dt in dts]
    assert convergenceSlope(dts, errors).slope == pytest.approx(4.0, abs=0.3)
    assert integrateRk4(sdof.system, dts[0], sdof.period, sdof.u0, sdof.v0).linearSolves == 4 * 50

def test_central_difference_diverges_above_stability_limit(undampedSdof):
    omega = 2.0 * np.pi / undampedSdof.period
    dt = 1.1 * 2.0 / omega
    traj = integrateCentralDifference(undampedSdof.system, dt, 2000 * dt, undampedSdof.u0, undampedSdof.v0)
    assert traj.divergent
    assert traj.nSteps < 2000
    assert traj.isFinite()

def test_central_difference_bounded_below_stability_limit(undampedSdof):
    sys = undampedSdof.system
    omega = 2.0 * np.pi / undampedSdof.period
    dt = 0.9 * 2.0 / omega
    traj = integrateCentralDifference(sys, dt, 2000 * dt, undampedSdof.u0, undampedSdof.v0)
    assert not traj.divergent
    assert np.max(np.abs(traj.u)) < 10.0

def test_standard_central_difference_rejects_velocity_dependent_force():
    problem = vanDerPol()
    with pytest.raises(ValueError):
        integrateCentralDifference(problem.system, 0.01, 1.0, problem.u0, problem.v0)

def test_park_underwood_runs_velocity_dependent_force():
    problem = vanDerPol()
    traj = integrateCentralDifference(problem.system, 0.001, 5.0, problem.u0, problem.v0, variant="park_underwood")
    assert traj.scheme == "cd-park-underwood"
    assert not traj.divergent
    assert pseudoEnergy(problem.system, traj.u[-1], traj.v[-1]) < problem.psiMaxEstimate * 2.0

def test_unknown_central_difference_variant(sdof):
    with pytest.raises(ValueError):
        integrateCentralDifference(sdof.system, 0.01, 1.0, sdof.u0, sdof.v0, variant="leapfrog")
