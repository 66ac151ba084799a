#!/usr/bin/env python
# -*- coding: utf-8 -*-
#
#  Scheme ids, the per-run scheme configuration and the dispatcher that runs a
#  benchmark problem with any of the integrators.
#
#  License: MIT
#
#  Copyright (c) 2020 Joerg Beckers

import logging
import re
import time
from dataclasses import dataclass, field, replace
from typing import Optional

from .baselines import (BASELINE_SCHEMES, NewtonConfig, integrateNewmarkTr, integrateGeneralizedAlpha,
                        integrateBathe, integrateCentralDifference, integrateRk4)
from .bdfsav import (SavRunConfig, integrateSav, integrateImexBdf, EPS_TOL, SUPPORTED_ORDERS, STARTERS,
                     EXACT_STARTER)
from .model import nonlinearPsiFloor

logger = logging.getLogger(__name__)

_BDF_ID = re.compile(r"^imex-bdf([1-9])(-sav)?$")

SAV_FAMILY = "imex-bdf-sav"
BDF_FAMILY = "imex-bdf"

# Steps the warm-up run takes before a timed run.
WARMUP_STEPS = 10

RECOMMENDED_PSI = "recommended"
PRE_PASS_PSI = "pre-pass"

PSI_SOURCES = (RECOMMENDED_PSI, PRE_PASS_PSI)

# Runs spent on settling the pre-pass psi before the last value is used as is.
MAX_PRE_PASSES = 5

def parseSchemeId(schemeId):
    """ Returns (family, k); k is None outside the IMEX-BDF families.
    """
    match = _BDF_ID.match(schemeId)
    if match:
        k = int(match.group(1))
        if k not in SUPPORTED_ORDERS:
            raise ValueError("Order k must be in 1..5 in scheme id '{}'.".format(schemeId))
        return (SAV_FAMILY if match.group(2) else BDF_FAMILY), k
    if schemeId in BASELINE_SCHEMES and schemeId != BDF_FAMILY:
        return schemeId, None
    raise KeyError("Unknown scheme '{}'.".format(schemeId))

def savSchemeIds(orders):
    return ["imex-bdf{}-sav".format(k) for k in orders]

def subStages(schemeId):
    """ Linear solves per step, n_sub: 2 for Bathe, 4 for RK4, 1 otherwise.
    """
    family, _ = parseSchemeId(schemeId)
    if family in (SAV_FAMILY, BDF_FAMILY):
        return 1
    return BASELINE_SCHEMES[family].nSub

def isSavScheme(schemeId):
    return parseSchemeId(schemeId)[0] == SAV_FAMILY

@dataclass(frozen=True)
class SchemeConfig:
    """ Everything needed to run one scheme at one time-step. psi None means the
        problem's recommended value, starter None the problem's own starter.
    """
    schemeId: str
    dt: float
    psi: Optional[float] = None
    epsTol: float = EPS_TOL
    newton: NewtonConfig = field(default_factory=NewtonConfig)
    rhoInf: float = 0.0
    batheGamma: float = 0.5
    starter: Optional[str] = None

    def __post_init__(self):
        parseSchemeId(self.schemeId)
        if self.starter is not None and self.starter not in STARTERS:
            raise ValueError("Unknown starter '{}'; choose from {}.".format(self.starter, ", ".join(STARTERS)))
        if not self.dt > 0.0:
            raise ValueError("dt must be positive, got {}.".format(self.dt))
        if self.psi is not None and not self.psi > 0.0:
            raise ValueError("psi must be positive, got {}.".format(self.psi))

    @property
    def family(self):
        return parseSchemeId(self.schemeId)[0]

    @property
    def k(self):
        return parseSchemeId(self.schemeId)[1]

    @property
    def nSub(self):
        return subStages(self.schemeId)

    def atCostParity(self, baseDt):
        """ This configuration at nSub * baseDt, so every scheme spends one solve per baseDt.
        """
        return replace(self, dt=self.nSub * baseDt)

def _startingSolution(problem, cfg):
    starter = cfg.starter or problem.starter
    if starter != EXACT_STARTER:
        return None
    if problem.exact is None:
        raise ValueError("Problem '{}' has no exact solution to start from.".format(problem.problemId))
    return problem.exact

def runScheme(problem, cfg, tEnd=None):
    """ Integrates 'problem' over [0, tEnd] (its own duration by default) with 'cfg'.
    """
    sys = problem.system
    tEnd = problem.tEnd if tEnd is None else tEnd
    u0, v0, dt = problem.u0, problem.v0, cfg.dt
    family = cfg.family
    if family in (SAV_FAMILY, BDF_FAMILY):
        exact = _startingSolution(problem, cfg)
        if family == SAV_FAMILY:
            psi = problem.psiRecommended if cfg.psi is None else cfg.psi
            return integrateSav(sys, SavRunConfig(cfg.k, dt, psi, tEnd, cfg.epsTol), u0, v0, exact)
        return integrateImexBdf(sys, cfg.k, dt, tEnd, u0, v0, exact)
    if family == "newmark-tr":
        return integrateNewmarkTr(sys, dt, tEnd, u0, v0, cfg.newton)
    if family == "generalized-alpha":
        return integrateGeneralizedAlpha(sys, cfg.rhoInf, dt, tEnd, u0, v0, cfg.newton)
    if family == "bathe":
        return integrateBathe(sys, cfg.batheGamma, dt, tEnd, u0, v0, cfg.newton)
    if family == "central-difference":
        return integrateCentralDifference(sys, dt, tEnd, u0, v0, "standard")
    if family == "cd-park-underwood":
        return integrateCentralDifference(sys, dt, tEnd, u0, v0, "park_underwood")
    return integrateRk4(sys, dt, tEnd, u0, v0)

def timedRun(problem, cfg, tEnd=None, warmup=True):
    """ runScheme plus its wall time in seconds, optionally after a short untimed warm-up.
    """
    tEnd = problem.tEnd if tEnd is None else tEnd
    if warmup:
        runScheme(problem, cfg, min(tEnd, WARMUP_STEPS * cfg.dt))
    start = time.perf_counter()
    traj = runScheme(problem, cfg, tEnd)
    wallTime = time.perf_counter() - start
    logger.debug("%s dt=%.4g: %d steps in %.3f s", cfg.schemeId, cfg.dt, traj.nSteps, wallTime)
    return traj, wallTime

def prePassPsi(problem, cfg, tEnd=None, passes=MAX_PRE_PASSES):
    """ psi = 2 dt^2 max |L^-1 f_nl|^2 measured along a SAV run of the same scheme.

        The first pass uses the problem's recommended psi; every further pass reruns with
        the psi just measured until the run's own bound no longer exceeds it.
    """
    if cfg.family != SAV_FAMILY:
        raise ValueError("A psi pre-pass needs a SAV scheme, got '{}'.".format(cfg.schemeId))
    if not problem.system.hasNonlinearForce:
        raise ValueError("Problem '{}' has no nonlinear force to bound psi with.".format(problem.problemId))
    psi = None
    for n in range(passes):
        bound = nonlinearPsiFloor(problem.system, runScheme(problem, replace(cfg, psi=psi), tEnd), cfg.dt)
        if not bound > 0.0:
            raise ValueError("The nonlinear force vanished along the pre-pass of {} at dt={:g}.".format(
                cfg.schemeId, cfg.dt))
        if psi is not None and bound <= psi:
            logger.debug("%s dt=%.4g: pre-pass psi %.6e settled after %d runs", cfg.schemeId, cfg.dt, psi, n + 1)
            return psi
        psi = bound
    logger.warning("%s dt=%.4g: pre-pass psi still rising after %d runs, using %.6e", cfg.schemeId, cfg.dt,
                   passes, psi)
    return psi
