#!/usr/bin/env python
# -*- coding: utf-8 -*-
#
#  IMEX-BDFk time stepping (k = 1..5) with the scalar auxiliary variable update
#  that keeps the pseudo-energy bounded for every time-step size.
#
#  License: MIT
#
#  Copyright (c) 2020 Joerg Beckers

import logging
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Optional, Tuple

import numpy as np

from .errors import UnsupportedOrder, NonFiniteState
from .model import (validateSystem, pseudoEnergy, theta, acceleration, initialAcceleration, cholesky)
from .rungekutta import rkStep, tableauForOrder
from .trajectory import State, StepDiagnostics, TrajectoryRecorder, stepCount, finiteState

logger = logging.getLogger(__name__)

SUPPORTED_ORDERS = (1, 2, 3, 4, 5)

# Largest factor by which one SAV update may grow phi; smaller denominators are capped.
MAX_PHI_GROWTH = 2.0

EPS_DEN = 1.0 / MAX_PHI_GROWTH

EPS_TOL = 1e-7

RUNGE_KUTTA_STARTER = "runge-kutta"
EXACT_STARTER = "exact"

STARTERS = (RUNGE_KUTTA_STARTER, EXACT_STARTER)

def _checkOrder(k):
    if k not in SUPPORTED_ORDERS:
        raise UnsupportedOrder("Order k must be in 1..5, got {}.".format(k))

@dataclass(frozen=True)
class BdfCoefficients:
    """ H (the k-th harmonic number), history weights w_j and extrapolation weights e_j, j = 0..k-1.
    """
    k: int
    H: float
    historyWeights: Tuple[float, ...]
    extrapWeights: Tuple[float, ...]
    exactH: Fraction
    exactHistoryWeights: Tuple[Fraction, ...]
    exactExtrapWeights: Tuple[int, ...]

@lru_cache(maxsize=None)
def bdfCoefficients(k):
    _checkOrder(k)
    H = sum(Fraction(1, j) for j in range(1, k + 1))
    w = tuple(Fraction((-1) ** j * comb(k, j + 1), j + 1) for j in range(k))
    e = tuple((-1) ** j * comb(k, j + 1) for j in range(k))
    return BdfCoefficients(k=k,
                           H=float(H),
                           historyWeights=tuple(float(x) for x in w),
                           extrapWeights=tuple(float(x) for x in e),
                           exactH=H,
                           exactHistoryWeights=w,
                           exactExtrapWeights=e)

def betaParameter(k):
    """ Exponent of the scaling factor: 1 + (k+1)/2 for odd k, 1 + k/2 for even k.
    """
    _checkOrder(k)
    if k % 2:
        return 1 + (k + 1) // 2
    return 1 + k // 2

class HistoryBuffer():
    """ The last k displacement/velocity pairs, newest first, equispaced by dt.
    """

    def __init__(self, k, dt):
        self.k = k
        self.dt = dt
        self._entries = deque(maxlen=k)

    def __len__(self):
        return len(self._entries)

    def isFull(self):
        return len(self._entries) == self.k

    def push(self, u, v):
        self._entries.appendleft((np.asarray(u, dtype=float), np.asarray(v, dtype=float)))

    def entry(self, j):
        """ Returns (u_{n-j}, v_{n-j}).
        """
        return self._entries[j]

    def weightedSum(self, weights):
        if not self.isFull():
            raise ValueError("History holds {} of {} states.".format(len(self._entries), self.k))
        su = sum(w * u for w, (u, _) in zip(weights, self._entries))
        sv = sum(w * v for w, (_, v) in zip(weights, self._entries))
        return su, sv

def extrapolate(coeffs, hist):
    """ k-th order extrapolation of (u, v) to t_{n+1}.
    """
    return hist.weightedSum(coeffs.extrapWeights)

class ImexBdfOperator():
    """ Cholesky factor of M H^2/dt^2 + C H/dt + K for one (k, dt) pair, with a solve counter.
    """

    def __init__(self, sys, coeffs, dt):
        self.sys = sys
        self.coeffs = coeffs
        self.dt = dt
        H = coeffs.H
        self.matrix = sys.M * (H * H / (dt * dt)) + sys.C * (H / dt) + sys.K
        self.factor = cholesky(self.matrix)
        self.solves = 0

    def step(self, hist, tNext):
        sys = self.sys
        coeffs = self.coeffs
        dt = self.dt
        H = coeffs.H
        uEx, vEx = extrapolate(coeffs, hist)
        sumU, sumV = hist.weightedSum(coeffs.historyWeights)
        rhs = (sys.fExt(tNext) - sys.fNl(uEx, vEx, tNext)
               + sys.M @ ((H * sumU + dt * sumV) / (dt * dt))
               + sys.C @ (sumU / dt))
        uIm = self.factor.solve(rhs)
        self.solves += 1
        vIm = (H * uIm - sumU) / dt
        return uIm, vIm

def imexBdfStep(sys, coeffs, hist, tNext, operator=None):
    """ Implicit-explicit BDFk predictor (u_im, v_im); the nonlinear force is extrapolated.
    """
    if operator is None:
        operator = ImexBdfOperator(sys, coeffs, hist.dt)
    return operator.step(hist, tNext)

def savUpdate(phiN, psiIm, thetaIm, dt, psi):
    """ phi_{n+1} = phi_n / (1 + dt theta / (Psi + psi)).
        Returns (phiNext, clamped); a denominator below 1 / MAX_PHI_GROWTH (zero and negative
        ones included) caps phi_{n+1} at MAX_PHI_GROWTH phi_n.
    """
    denominator = 1.0 + dt * thetaIm / (psiIm + psi)
    if not denominator >= EPS_DEN:
        return MAX_PHI_GROWTH * phiN, True
    return phiN / denominator, False

def scalingFactor(phiNext, psiIm, psi, beta):
    xi = np.float64(phiNext) / (psiIm + psi)
    upsilon = 1.0 - (1.0 - xi) ** beta
    return xi, upsilon

def applyUpdate(uIm, vIm, upsilon):
    return upsilon * uIm, upsilon * vIm

def recoveryCheck(phiNext, upsilon, psiIm, psi, epsTol=EPS_TOL):
    """ Restarts the SAV from the current state once it collapses below epsTol psi.
    """
    if phiNext < epsTol * psi:
        return upsilon * upsilon * psiIm + psi, True
    return phiNext, False

def startingSteps(sys, k, dt, u0, v0, t0=0.0, count=None):
    """ States at t_1..t_{k-1} from an explicit Runge-Kutta method of order k-1.
    """
    _checkOrder(k)
    if k == 1:
        return []
    tableau = tableauForOrder(k - 1)
    count = k - 1 if count is None else min(count, k - 1)
    states = []
    u = np.asarray(u0, dtype=float)
    v = np.asarray(v0, dtype=float)
    t = t0
    for j in range(count):
        u, v = rkStep(sys, t, u, v, dt, tableau)
        t = t0 + (j + 1) * dt
        states.append(State(t, u, v, acceleration(sys, u, v, t)))
    return states

def exactStartingSteps(sys, k, dt, exact, t0=0.0, count=None):
    """ States at t_1..t_{k-1} taken from a known solution 'exact': t -> (u, v).
    """
    _checkOrder(k)
    count = k - 1 if count is None else min(count, k - 1)
    states = []
    for j in range(1, count + 1):
        t = t0 + j * dt
        u, v = (np.asarray(x, dtype=float).reshape(sys.nDof) for x in exact(t))
        states.append(State(t, u, v, acceleration(sys, u, v, t)))
    return states

@dataclass(frozen=True)
class SavRunConfig:
    k: int
    dt: float
    psi: float
    tEnd: float
    epsTol: float = EPS_TOL
    beta: Optional[int] = None

    def __post_init__(self):
        _checkOrder(self.k)
        if not self.dt > 0.0:
            raise ValueError("dt must be positive, got {}.".format(self.dt))
        if not self.psi > 0.0:
            raise ValueError("psi must be positive, got {}.".format(self.psi))
        if not 0.0 < self.epsTol < 1.0:
            raise ValueError("epsTol must lie in (0, 1), got {}.".format(self.epsTol))
        if self.tEnd < 0.0:
            raise ValueError("tEnd must be non-negative, got {}.".format(self.tEnd))
        if self.beta is None:
            object.__setattr__(self, "beta", betaParameter(self.k))
        if self.beta < 2 or 2 * self.beta <= self.k + 1:
            raise ValueError("beta = {} violates beta >= 2 and 2 beta > k + 1 for k = {}.".format(self.beta, self.k))

def _integrate(sys, k, dt, tEnd, u0, v0, cfg, scheme, exact=None):
    validateSystem(sys).require()
    coeffs = bdfCoefficients(k)
    nSteps = stepCount(dt, tEnd)
    rec = TrajectoryRecorder(scheme, sys.nDof, dt, nSteps)
    sav = cfg is not None

    u0 = np.array(u0, dtype=float).reshape(sys.nDof)
    v0 = np.array(v0, dtype=float).reshape(sys.nDof)
    a0 = initialAcceleration(sys, u0, v0, 0.0)

    phi = np.nan
    if sav:
        psi = cfg.psi
        rec.psi = psi
        phi = pseudoEnergy(sys, u0, v0) + psi
    rec.append(0.0, u0, v0, a0, phi if k == 1 else np.nan)

    hist = HistoryBuffer(k, dt)
    hist.push(u0, v0)

    if exact is None:
        starting = startingSteps(sys, k, dt, u0, v0, count=nSteps)
        rec.startupSolves = len(starting) * (tableauForOrder(k - 1).stages if k > 1 else 0)
    else:
        starting = exactStartingSteps(sys, k, dt, exact, count=nSteps)
        rec.startupSolves = len(starting)
    for state in starting:
        step = len(rec)
        if not state.isFinite():
            if sav:
                raise NonFiniteState(step, "Non-finite state in the starting procedure at step {}.".format(step))
            rec.markDivergent(step)
            return rec.finish()
        rec.append(state.t, state.u, state.v, state.a)
        hist.push(state.u, state.v)

    if not hist.isFull():
        return rec.finish()

    if sav and k >= 2:
        last = hist.entry(0)
        phi = pseudoEnergy(sys, last[0], last[1]) + psi
        rec.setPhi(k - 1, phi)

    operator = ImexBdfOperator(sys, coeffs, dt)
    for n in range(k - 1, nSteps):
        tNext = (n + 1) * dt
        uIm, vIm = operator.step(hist, tNext)
        if sav:
            psiIm = pseudoEnergy(sys, uIm, vIm)
            thetaIm = theta(sys, uIm, vIm, tNext)
            phiNext, clamped = savUpdate(phi, psiIm, thetaIm, dt, psi)
            xi, upsilon = scalingFactor(phiNext, psiIm, psi, cfg.beta)
            u, v = applyUpdate(uIm, vIm, upsilon)
            phiNext, triggered = recoveryCheck(phiNext, upsilon, psiIm, psi, cfg.epsTol)
            phi = phiNext
            rec.diagnostics.append(StepDiagnostics(n + 1, xi, upsilon, phi, psiIm, thetaIm, triggered, clamped))
            if triggered:
                rec.recoveryEvents.append(n + 1)
                logger.debug("%s: SAV recovery at step %d (phi reset to %.6e)", scheme, n + 1, phi)
            if clamped:
                rec.clampEvents.append(n + 1)
                logger.debug("%s: SAV update capped at step %d", scheme, n + 1)
        else:
            u, v = uIm, vIm
        a = acceleration(sys, u, v, tNext)
        if not (finiteState(u, v, a) and np.isfinite(phi if sav else 0.0)):
            if sav:
                raise NonFiniteState(n + 1)
            logger.warning("%s diverged at step %d (t = %g)", scheme, n + 1, tNext)
            rec.markDivergent(n + 1)
            break
        rec.append(tNext, u, v, a, phi)
        hist.push(u, v)

    rec.linearSolves = operator.solves
    if rec.recoveryEvents or rec.clampEvents:
        logger.info("%s: %d recovery events, %d capped updates over %d steps",
                    scheme, len(rec.recoveryEvents), len(rec.clampEvents), nSteps)
    return rec.finish()

def integrateSav(sys, cfg, u0, v0, exact=None):
    """ IMEX-BDFk-SAV run over [0, cfg.tEnd].

        Phi starts at Psi(u0, v0) + psi; for k >= 2 the first k-1 steps come from a
        Runge-Kutta starter of order k-1 (or from 'exact': t -> (u, v) when given) and
        Phi is re-seeded from the last starting state. Each step then solves the implicit-explicit predictor, updates Phi,
        scales the predictor by Upsilon = 1 - (1 - Xi)^beta and restarts Phi if it
        collapsed. Accelerations are recomputed from the equation of motion.
    """
    scheme = "imex-bdf{}-sav".format(cfg.k)
    with np.errstate(over="ignore", invalid="ignore"):
        return _integrate(sys, cfg.k, cfg.dt, cfg.tEnd, u0, v0, cfg, scheme, exact)

def integrateImexBdf(sys, k, dt, tEnd, u0, v0, exact=None):
    """ Conventional IMEX-BDFk (no SAV). Divergence truncates and flags the trajectory.
    """
    _checkOrder(k)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        return _integrate(sys, k, dt, tEnd, u0, v0, None, "imex-bdf{}".format(k), exact)
