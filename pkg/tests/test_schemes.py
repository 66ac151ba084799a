#!/usr/bin/env python
# -*- coding: utf-8 -*-
#
#  License: MIT
#
#  Copyright (c) 2020 Joerg Beckers

from dataclasses import replace

import numpy as np
import pytest

from imexsav.model import nonlinearPsiFloor
from imexsav.problems import vanDerPol, duffingSdof
from imexsav.schemes import (SAV_FAMILY, BDF_FAMILY, parseSchemeId, savSchemeIds, subStages, isSavScheme,
                             SchemeConfig, runScheme, timedRun, prePassPsi)

@pytest.mark.parametrize("schemeId, expected", [
    ("imex-bdf3-sav", (SAV_FAMILY, 3)),
    ("imex-bdf5", (BDF_FAMILY, 5)),
    ("bathe", ("bathe", None)),
    ("rk4", ("rk4", None)),
    ("cd-park-underwood", ("cd-park-underwood", None)),
])
def test_parse_scheme_id(schemeId, expected):
    assert parseSchemeId(schemeId) == expected

@pytest.mark.parametrize("schemeId", ["imex-bdf", "bdf2", "imex-bdf2-sav2", "explicit-euler"])
def test_unknown_scheme_ids(schemeId):
    with pytest.raises(KeyError):
        parseSchemeId(schemeId)

def test_order_out_of_range():
    with pytest.raises(ValueError):
        parseSchemeId("imex-bdf6-sav")

def test_sub_stages():
    assert subStages("imex-bdf4-sav") == 1
    assert subStages("newmark-tr") == 1
    assert subStages("bathe") == 2
    assert subStages("rk4") == 4

def test_sav_scheme_ids():
    assert savSchemeIds([1, 5]) == ["imex-bdf1-sav", "imex-bdf5-sav"]
    assert isSavScheme("imex-bdf2-sav")
    assert not isSavScheme("imex-bdf2")

def test_cost_parity():
    base = 0.01
    assert SchemeConfig("rk4", base).atCostParity(base).dt == pytest.approx(0.04)
    assert SchemeConfig("bathe", base).atCostParity(base).dt == pytest.approx(0.02)
    assert SchemeConfig("imex-bdf2-sav", base, psi=3.0).atCostParity(base).psi == 3.0

@pytest.mark.parametrize("kwargs", [dict(dt=0.0), dict(psi=-1.0), dict(starter="euler")])
def test_config_validation(kwargs):
    base = dict(schemeId="imex-bdf1-sav", dt=0.1)
    base.update(kwargs)
    with pytest.raises(ValueError):
        SchemeConfig(**base)

@pytest.mark.parametrize("schemeId", ["imex-bdf2-sav", "imex-bdf2", "newmark-tr", "generalized-alpha", "bathe",
                                      "central-difference", "cd-park-underwood", "rk4"])
def test_run_scheme_dispatch(schemeId, sdof):
    traj = runScheme(sdof, SchemeConfig(schemeId, 0.01), tEnd=0.5)
    assert traj.scheme == schemeId
    assert traj.nSteps == 50
    assert traj.isFinite()

def test_run_scheme_uses_recommended_psi(sdof):
    default = runScheme(sdof, SchemeConfig("imex-bdf1-sav", 0.01), tEnd=0.1)
    explicit = runScheme(sdof, SchemeConfig("imex-bdf1-sav", 0.01, psi=sdof.psiRecommended), tEnd=0.1)
    np.testing.assert_array_equal(default.u, explicit.u)
    assert default.phi[0] == pytest.approx(sdof.psiRecommended)

def test_run_scheme_defaults_to_problem_duration():
    problem = vanDerPol(tEnd=0.5)
    traj = runScheme(problem, SchemeConfig("imex-bdf3-sav", 0.05))
    assert traj.finalState.t == pytest.approx(0.5)
    assert traj.finalState.isFinite()

def test_timed_run(sdof):
    traj, wallTime = timedRun(sdof, SchemeConfig("newmark-tr", 0.01), tEnd=0.2)
    assert wallTime > 0.0
    assert traj.nSteps == 20

def test_exact_starter_takes_states_from_the_solution(sdof):
    traj = runScheme(sdof, SchemeConfig("imex-bdf3-sav", 0.01, starter="exact"), tEnd=0.1)
    U, V = sdof.exactStates(traj.t[:3])
    np.testing.assert_array_equal(traj.u[1:3], U[1:3])
    np.testing.assert_array_equal(traj.v[1:3], V[1:3])
    assert traj.startupSolves == 2

def test_runge_kutta_starter_differs_from_the_exact_one(sdof):
    rk = runScheme(sdof, SchemeConfig("imex-bdf3", 0.05, starter="runge-kutta"), tEnd=0.2)
    exact = runScheme(sdof, SchemeConfig("imex-bdf3", 0.05, starter="exact"), tEnd=0.2)
    assert rk.startupSolves == 2 * 2
    assert not np.array_equal(rk.u[1], exact.u[1])

def test_exact_starter_needs_an_exact_solution():
    with pytest.raises(ValueError):
        runScheme(vanDerPol(tEnd=0.5), SchemeConfig("imex-bdf2-sav", 0.05, starter="exact"))

def test_pre_pass_psi_covers_its_own_run():
    problem = duffingSdof(p0=0.0, tEnd=2.0)
    cfg = SchemeConfig("imex-bdf1-sav", 0.1)
    psi = prePassPsi(problem, cfg)
    assert 0.0 < psi < problem.psiRecommended * 1e6
    traj = runScheme(problem, replace(cfg, psi=psi))
    assert traj.isFinite()
    assert nonlinearPsiFloor(problem.system, traj, cfg.dt) <= psi

def test_pre_pass_psi_needs_a_nonlinear_sav_run(sdof):
    with pytest.raises(ValueError):
        prePassPsi(sdof, SchemeConfig("imex-bdf2-sav", 0.01))
    with pytest.raises(ValueError):
        prePassPsi(duffingSdof(p0=0.0, tEnd=0.5), SchemeConfig("imex-bdf2", 0.01))
