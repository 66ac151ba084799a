#!/usr/bin/env python
# -*- coding: utf-8 -*-
#
#  Leading local truncation error of IMEX-BDFk-SAV on the forced damped SDOF
#  u'' + 2 zeta w0 u' + w0^2 u = p0 sin(wf t), and the exact-history one-step
#  measurements it is checked against.
#
#  License: MIT
#
#  Copyright (c) 2020 Joerg Beckers

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Tuple

import numpy as np

from .bdfsav import (bdfCoefficients, betaParameter, HistoryBuffer, ImexBdfOperator, savUpdate, scalingFactor,
                     applyUpdate, SUPPORTED_ORDERS)
from .errors import UnsupportedOrder
from .metrics import convergenceSlope
from .model import pseudoEnergy, theta
from .problems import linearSdof

logger = logging.getLogger(__name__)

# Base time-step (in periods) of the smallest-error level per order; each check halves it twice.
BASE_LEVELS = {1: 2e-3, 2: 4e-3, 3: 8e-3, 4: 1.2e-2, 5: 2e-2}

LEVEL_COUNT = 3

@dataclass(frozen=True)
class LteParams:
    omega0: float = 2.0 * math.pi
    zeta: float = 0.2
    u0: float = 1.0
    v0: float = 1.0
    p0: float = 1.0
    omegaF: float = 4.0 * math.pi

    def __post_init__(self):
        if not self.omega0 > 0.0:
            raise ValueError("omega0 must be positive.")
        if not 0.0 <= self.zeta < 1.0:
            raise ValueError("zeta must lie in [0, 1).")

    @property
    def kappa(self):
        """ v0 / (w0 u0), defined only for u0 != 0.
        """
        if self.u0 == 0.0:
            raise ValueError("kappa is undefined for u0 = 0.")
        return self.v0 / (self.omega0 * self.u0)

    @property
    def period(self):
        return 2.0 * math.pi / self.omega0

    def problem(self):
        return linearSdof(self.zeta, self.omega0, self.p0, self.omegaF, self.u0, self.v0)

def _checkOrder(k):
    if k not in SUPPORTED_ORDERS:
        raise UnsupportedOrder("No leading-term formula for k = {}.".format(k))

def errorConstant(k):
    """ c_k = 1 / ((k + 1) H_k): 1/2, 2/9, 3/22, 12/125, 10/137.
    """
    _checkOrder(k)
    return Fraction(1, k + 1) / bdfCoefficients(k).exactH

def lteLeadingTerm(k, p):
    """ Coefficients (tau_u, tau_v) of dt^(k+1) in the one-step error (numerical - exact) of a
        step starting at t = 0 from (u0, v0).

        Each is a rational prefactor times the free-response bracket plus p0 wf times the
        forcing bracket. The brackets are written with u0 kappa = v0 / w0 and v0 / kappa = w0 u0
        so that u0 = 0 is allowed.
    """
    _checkOrder(k)
    w, z, u0, v0, wf = p.omega0, p.zeta, p.u0, p.v0, p.omegaF
    z2 = z * z
    a1 = 1.0 - 4.0 * z2
    a2 = 1.0 - 2.0 * z2
    a3 = 1.0 - 12.0 * z2 + 16.0 * z2 * z2
    a4 = 3.0 - 16.0 * z2 + 16.0 * z2 * z2

    # (prefactor, (a, b), (c, d)) with tau_u ~ u0 a + (v0 / w) b and tau_v ~ v0 c - (w u0) d
    free = {
        1: (-w ** 2 / 2.0, (1.0, 2.0 * z), (a1, 2.0 * z)),
        2: (-2.0 * w ** 3 / 9.0, (-2.0 * z, a1), (-4.0 * z * a2, a1)),
        3: (3.0 * w ** 4 / 22.0, (a1, 4.0 * z * a2), (a3, 4.0 * z * a2)),
        4: (12.0 * w ** 5 / 125.0, (-4.0 * z * a2, a3), (-2.0 * z * a4, a3)),
        5: (-10.0 * w ** 6 / 137.0, (a3, 2.0 * z * a4), (1.0 - 24.0 * z2 + 80.0 * z2 * z2 - 64.0 * z2 ** 3, 2.0 * z * a4)),
    }
    forced = {
        1: (0.5, (0.0, 1.0)),
        2: (2.0 / 9.0, (1.0, -2.0 * w * z)),
        3: (-3.0 / 22.0, (2.0 * w * z, w ** 2 * a1 + wf ** 2)),
        4: (-12.0 / 125.0, (w ** 2 * a1 + wf ** 2, -2.0 * w * z * (2.0 * w ** 2 * a2 + wf ** 2))),
        5: (10.0 / 137.0, (2.0 * w * z * (2.0 * w ** 2 * a2 + wf ** 2),
                           w ** 4 * a3 + w ** 2 * wf ** 2 * a1 + wf ** 4)),
    }
    pref, (a, b), (c, d) = free[k]
    fPref, (fu, fv) = forced[k]
    pw = p.p0 * wf
    tauU = pref * (u0 * a + (v0 / w) * b) + fPref * pw * fu
    tauV = pref * (v0 * c - (w * u0) * d) + fPref * pw * fv
    return tauU, tauV

def lteSeriesCoefficient(k, p):
    """ c_k y^(k+1)(0) of the first-order modal system y' = A y + b(t), computed as
        A^(k+1) y0 + sum_i A^(k-i) b^(i)(0).
    """
    _checkOrder(k)
    w, z = p.omega0, p.zeta
    A = np.array([[0.0, 1.0], [-w * w, -2.0 * z * w]])
    derivative = np.linalg.matrix_power(A, k + 1) @ np.array([p.u0, p.v0])
    for i in range(k + 1):
        bi = np.array([0.0, p.p0 * p.omegaF ** i * math.sin(0.5 * math.pi * i)])
        derivative = derivative + np.linalg.matrix_power(A, k - i) @ bi
    c = float(errorConstant(k))
    return c * float(derivative[0]), c * float(derivative[1])

def _seededStep(sys, k, dt, exact, tn):
    """ One IMEX-BDFk predictor from exact history at tn, tn - dt, ..., tn - (k-1) dt.
    """
    coeffs = bdfCoefficients(k)
    hist = HistoryBuffer(k, dt)
    for j in range(k - 1, -1, -1):
        hist.push(*exact(tn - j * dt))
    operator = ImexBdfOperator(sys, coeffs, dt)
    return operator.step(hist, tn + dt)

def _savFactors(sys, k, dt, exact, psi, tn):
    uN, vN = exact(tn)
    uIm, vIm = _seededStep(sys, k, dt, exact, tn)
    tNext = tn + dt
    psiN = pseudoEnergy(sys, uN, vN)
    psiIm = pseudoEnergy(sys, uIm, vIm)
    thetaIm = theta(sys, uIm, vIm, tNext)
    return uIm, vIm, psiN, psiIm, thetaIm

def measuredOneStepError(sys, k, dt, exact, psi=None, tn=0.0, withSav=True):
    """ (u_{n+1} - u(t_{n+1}), v_{n+1} - v(t_{n+1})) for one step from exact history with
        Phi_n = Psi(u(tn), v(tn)) + psi. With withSav False the plain IMEX-BDFk step is measured.
    """
    _checkOrder(k)
    uIm, vIm, psiN, psiIm, thetaIm = _savFactors(sys, k, dt, exact, psi, tn)
    u, v = uIm, vIm
    if withSav:
        if psi is None or not psi > 0.0:
            raise ValueError("A SAV step needs a positive psi.")
        phiNext, _ = savUpdate(psiN + psi, psiIm, thetaIm, dt, psi)
        _, upsilon = scalingFactor(phiNext, psiIm, psi, betaParameter(k))
        u, v = applyUpdate(uIm, vIm, upsilon)
    uEx, vEx = exact(tn + dt)
    return u - uEx, v - vEx

def savDeviation(sys, k, dt, exact, psi, tn=0.0):
    """ |SAV step - plain step| = |1 - Xi|^beta max|u_im| for one exactly seeded step, with
        1 - Xi = (Psi_im - Psi_n + dt Theta_im) / (Psi_im + psi + dt Theta_im) free of the
        cancellation in 1 - Phi / (Psi + psi).
    """
    uIm, _, psiN, psiIm, thetaIm = _savFactors(sys, k, dt, exact, psi, tn)
    oneMinusXi = (psiIm - psiN + dt * thetaIm) / (psiIm + psi + dt * thetaIm)
    return abs(oneMinusXi) ** betaParameter(k) * float(np.max(np.abs(uIm)))

def defaultDtLevels(k, period, count=LEVEL_COUNT):
    _checkOrder(k)
    base = BASE_LEVELS[k] * period
    return [base / 2.0 ** i for i in range(count)]

def richardsonCoefficient(dts, taus, order):
    """ Leading coefficient a of tau = a dt^order + b dt^(order+1), least squares over the levels.
    """
    dts = np.asarray(dts, dtype=float)
    taus = np.asarray(taus, dtype=float)
    if dts.size < 2:
        raise ValueError("Richardson fitting needs at least two levels.")
    design = np.column_stack((np.ones_like(dts), dts))
    solution, *_ = np.linalg.lstsq(design, taus / dts ** order, rcond=None)
    return float(solution[0])

def savContributionSlope(sys, k, dts, exact, psi, tn=0.0):
    """ Log-log slope of savDeviation over 'dts'; 2 beta is expected.
    """
    deviations = [savDeviation(sys, k, dt, exact, psi, tn) for dt in dts]
    return convergenceSlope(dts, deviations).slope

@dataclass(frozen=True)
class LteCheck:
    k: int
    predictedU: float
    predictedV: float
    measuredU: float
    measuredV: float
    savSlope: float
    expectedSavSlope: int
    dts: Tuple[float, ...] = field(default_factory=tuple)

    @staticmethod
    def _ratio(measured, predicted):
        return measured / predicted if predicted != 0.0 else math.nan

    @property
    def ratioU(self):
        return self._ratio(self.measuredU, self.predictedU)

    @property
    def ratioV(self):
        return self._ratio(self.measuredV, self.predictedV)

def lteCheck(k, p, psi=None, dts=None, savDts=None):
    """ Predicted against Richardson-measured leading coefficients for order k, plus the
        slope of the SAV contribution.
    """
    _checkOrder(k)
    problem = p.problem()
    psi = problem.psiRecommended if psi is None else psi
    dts = defaultDtLevels(k, p.period) if dts is None else list(dts)
    tauU, tauV = zip(*(measuredOneStepError(problem.system, k, dt, problem.exact, psi) for dt in dts))
    measuredU = richardsonCoefficient(dts, [float(x[0]) for x in tauU], k + 1)
    measuredV = richardsonCoefficient(dts, [float(x[0]) for x in tauV], k + 1)
    predictedU, predictedV = lteLeadingTerm(k, p)
    if savDts is None:
        savDts = [max(dts) / 2.0 ** i for i in range(2, 6)]
    slope = savContributionSlope(problem.system, k, sorted(savDts), problem.exact, psi)
    result = LteCheck(k, predictedU, predictedV, measuredU, measuredV, slope, 2 * betaParameter(k), tuple(dts))
    logger.info("k=%d: tau_u ratio %.4f, tau_v ratio %.4f, SAV slope %.2f (expected %d)",
                k, result.ratioU, result.ratioV, slope, result.expectedSavSlope)
    return result
