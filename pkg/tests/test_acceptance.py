#!/usr/bin/env python
# -*- coding: utf-8 -*-
#
#  End-to-end runs over the benchmark problems. Slow; select with -m convergence or -m acceptance.
#
#  License: MIT
#
#  Copyright (c) 2020 Joerg Beckers

import math

import numpy as np
import pytest

from imexsav.commands import RunSpec, cmdConverge, cmdPsiSweep, cmdStability, cmdBenchmark
from imexsav.metrics import asymptoticWindow, convergenceSlope, globalErrorNorm
from imexsav.problems import linearSdof, duffingChain
from imexsav.schemes import SchemeConfig, runScheme

@pytest.mark.convergence
@pytest.mark.parametrize("k", [1, 2, 3, 4, 5])
def test_linear_sdof_reaches_design_order(k):
    problem = linearSdof(tEnd=1.0)
    first = 200.0 if k == 1 else (100.0 if k <= 3 else 50.0)
    dts = [problem.period / (first * 2 ** i) for i in range(4)]
    errU, errV = [], []
    for dt in dts:
        traj = runScheme(problem, SchemeConfig("imex-bdf{}-sav".format(k), dt))
        U, V = problem.exactStates(traj.t)
        errU.append(globalErrorNorm(traj.u, U))
        errV.append(globalErrorNorm(traj.v, V))
    for errors in (errU, errV):
        window = asymptoticWindow(dts, errors, ceiling=1.0)
        assert window[0].size >= 3
        assert convergenceSlope(*window).slope == pytest.approx(k, abs=0.3)

@pytest.mark.convergence
def test_van_der_pol_against_reference_pair():
    spec = RunSpec(problem="van-der-pol", orders=(2,), dts=(0.02, 0.01, 0.005, 0.0025), tEnd=2.0)
    result = cmdConverge(spec)
    assert result.ok
    fit = result.summary["slopes"]["imex-bdf2-sav"]["err_u"]
    assert fit["points"] >= 3
    assert fit["slope"] == pytest.approx(2.0, abs=0.3)
    assert all(0.0 < row["ref_uncertainty"] < 1e-7 for row in result.rows)

@pytest.mark.acceptance
def test_free_sdof_stays_bounded_over_all_step_sizes():
    result = cmdStability(RunSpec(problem="linear-sdof", steps=50))
    assert result.ok
    assert result.summary["savUnbounded"] == []
    assert result.summary["savPhiIncreases"] == 0
    assert len(result.rows) == 10 * 10
    for row in result.rows:
        if row["scheme"] in ("imex-bdf1", "imex-bdf2"):
            assert row["bounded"]

@pytest.mark.acceptance
def test_error_plateaus_once_psi_dominates():
    spec = RunSpec(problem="linear-sdof", orders=(2,), dts=(0.01,), psiRatios=(1e2, 1e3, 1e4), tEnd=2.0)
    result = cmdPsiSweep(spec)
    errors = {round(math.log10(row["psi_ratio"])): row["err_u"] for row in result.rows}
    assert errors[3] / errors[2] == pytest.approx(1.0, abs=0.1)
    assert errors[4] / errors[3] == pytest.approx(1.0, abs=0.1)

@pytest.mark.acceptance
def test_pendulum_table():
    spec = RunSpec(problem="pendulum", schemes=("imex-bdf2-sav", "newmark-tr", "bathe"))
    result = cmdBenchmark(spec)
    assert result.ok
    rows = {row["scheme"]: row for row in result.rows}
    assert rows["bathe"]["n_sub"] == 2
    for scheme in ("imex-bdf2-sav", "newmark-tr"):
        assert rows[scheme]["valid"]
        assert abs(rows[scheme]["pe_pct"]) < 5.0
    assert abs(rows["newmark-tr"]["ad_pct"]) < 5.0

@pytest.mark.acceptance
def test_spring_pendulum_table_covers_every_scheme():
    result = cmdBenchmark(RunSpec(problem="spring-pendulum", referenceTol=1e-6))
    schemes = [row["scheme"] for row in result.rows]
    assert schemes[:5] == ["imex-bdf{}-sav".format(k) for k in range(1, 6)]
    assert set(schemes[5:]) == {"newmark-tr", "generalized-alpha", "bathe", "cd-park-underwood", "rk4"}
    assert all(row["wall_time"] > 0.0 for row in result.rows if not row.get("error"))

@pytest.mark.acceptance
def test_short_duffing_chain():
    spec = RunSpec(problem="duffing-chain", params={"N": 5.0}, schemes=("imex-bdf2-sav", "newmark-tr"),
                   dts=(0.05,), tEnd=10.0)
    result = cmdBenchmark(spec)
    assert result.ok
    for row in result.rows:
        assert not row["divergent"]
        assert np.isfinite(row["err_u"])

# Pendulum at dt = T/100 with psi = 190: (PE %, AD %) per order.
PENDULUM_PEAD = {1: (0.7150, -0.3242), 3: (-0.5145, 0.4998), 4: (-0.1366, 0.1019), 5: (0.0373, -0.0304)}

# Spring-pendulum at dt = T/20: eps_u in % per order.
SPRING_PENDULUM_EPS_U = {2: 10.04, 3: 2.91, 4: 0.78, 5: 0.27}

def _band(expected):
    return pytest.approx(expected, rel=0.2, abs=0.02)

@pytest.mark.acceptance
def test_pendulum_period_elongation_and_amplitude_decay():
    spec = RunSpec(problem="pendulum", orders=tuple(PENDULUM_PEAD), psi=190.0, periodFraction=100.0)
    result = cmdBenchmark(spec)
    assert result.ok
    rows = {row["k"]: row for row in result.rows}
    for k, (pe, ad) in PENDULUM_PEAD.items():
        assert rows[k]["valid"]
        assert rows[k]["pe_pct"] == _band(pe)
        assert rows[k]["ad_pct"] == _band(ad)

@pytest.mark.acceptance
def test_coarse_first_order_pendulum_loses_its_oscillation():
    result = cmdBenchmark(RunSpec(problem="pendulum", orders=(1,), psi=190.0, periodFraction=20.0))
    assert not result.rows[0]["valid"]
    assert result.rows[0].get("pe_pct") is None

@pytest.mark.acceptance
def test_spring_pendulum_instantaneous_errors():
    result = cmdBenchmark(RunSpec(problem="spring-pendulum", orders=tuple(SPRING_PENDULUM_EPS_U)))
    assert result.ok
    assert result.summary["dt"] == pytest.approx(0.05)
    rows = {row["k"]: row for row in result.rows}
    for k, epsU in SPRING_PENDULUM_EPS_U.items():
        assert 100.0 * rows[k]["eps_u"] == pytest.approx(epsU, rel=0.2)

@pytest.mark.acceptance
@pytest.mark.parametrize("problem, params, ceiling", [("van-der-pol", {}, 1e3), ("duffing", {"p0": 0.0}, 1e7)])
def test_pre_pass_psi_keeps_unforced_runs_bounded(problem, params, ceiling):
    spec = RunSpec(problem=problem, params=params, orders=(1, 2), dts=(0.01, 0.1, 1.0), steps=100,
                   psiSource="pre-pass")
    result = cmdStability(spec)
    assert result.ok
    assert result.summary["psiSource"] == "pre-pass"
    assert len(result.rows) == 6
    for row in result.rows:
        assert row["bounded"]
        assert row["psi"] > 0.0
        assert np.isfinite(row["max_psi"])
        assert row["max_psi"] < ceiling

@pytest.mark.convergence
def test_duffing_reaches_design_order():
    spec = RunSpec(problem="duffing", orders=(2, 3), psi=5e7, dts=(0.0025, 0.00125, 0.0008, 0.0004, 0.0002))
    result = cmdConverge(spec)
    assert result.ok
    for k in (2, 3):
        fit = result.summary["slopes"]["imex-bdf{}-sav".format(k)]["err_u"]
        assert fit["points"] >= 3
        assert fit["slope"] == pytest.approx(k, abs=0.3)

@pytest.mark.acceptance
def test_sav_survives_where_plain_bdf5_blows_up_on_the_chain():
    problem = duffingChain(N=20, p0=5.0)
    spec = RunSpec(problem="duffing-chain", params={"N": 20.0, "p0": 5.0}, schemes=("imex-bdf5",), orders=(5,),
                   dts=(0.2,), steps=250)
    result = cmdStability(spec)
    assert result.ok
    rows = {row["scheme"]: row for row in result.rows}
    assert not rows["imex-bdf5"]["bounded"]
    assert rows["imex-bdf5"]["diverged_at_step"] < 250
    sav = rows["imex-bdf5-sav"]
    assert sav["bounded"]
    assert sav["n_steps"] == 250
    assert sav["max_psi"] < problem.psiRecommended

@pytest.mark.acceptance
@pytest.mark.parametrize("problem, tEnd", [("van-der-pol", 5.0), ("duffing", None)])
def test_error_plateau_on_nonlinear_problems(problem, tEnd):
    spec = RunSpec(problem=problem, orders=(2, 4), psiRatios=(1e2, 1e3), tEnd=tEnd)
    result = cmdPsiSweep(spec)
    assert result.ok
    assert len(result.summary["curves"]) == 4
    for curve in result.summary["curves"]:
        assert curve["plateau"]
        assert curve["ratio1e3over1e2"] == pytest.approx(1.0, abs=0.1)
