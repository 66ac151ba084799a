#!/usr/bin/env python
# -*- coding: utf-8 -*-
#
#  Comparison integrators: Newmark trapezoidal rule, generalized-alpha, Bathe,
#  central difference (standard and Park-Underwood), classical RK4 and the
#  conventional IMEX-BDFk, plus the Newton-Raphson solver the implicit ones share.
#
#  License: MIT
#
#  Copyright (c) 2020 Joerg Beckers

import logging
from dataclasses import dataclass

import numpy as np

from .bdfsav import integrateImexBdf
from .errors import NonConvergence
from .model import validateSystem, acceleration, initialAcceleration, cholesky
from .rungekutta import rkStep, CLASSICAL_RK4
from .trajectory import TrajectoryRecorder, stepCount, finiteState

logger = logging.getLogger(__name__)

__all__ = ["NewtonConfig", "NewtonResult", "BaselineScheme", "BASELINE_SCHEMES", "newtonSolve",
           "finiteDifferenceJacobian", "integrateImexBdf", "integrateNewmarkTr", "integrateGeneralizedAlpha",
           "integrateBathe", "integrateCentralDifference", "integrateRk4", "generalizedAlphaParameters"]

@dataclass(frozen=True)
class NewtonConfig:
    """ absTol bounds the infinity norm of the residual. With 'finiteDifference' set,
        analytic tangents are ignored and central differences are used.
    """
    absTol: float = 1e-7
    maxIter: int = 50
    finiteDifference: bool = False
    fdRelStep: float = 1e-7

    def __post_init__(self):
        if not self.absTol > 0.0:
            raise ValueError("absTol must be positive.")
        if self.maxIter < 1:
            raise ValueError("maxIter must be at least 1.")

@dataclass(frozen=True)
class NewtonResult:
    x: np.ndarray
    iterations: int
    residualNorm: float

@dataclass(frozen=True)
class BaselineScheme:
    """ A comparison scheme and its sub-stage count, used to run it at nSub * dt for equal solve budgets.
    """
    id: str
    nSub: int

BASELINE_SCHEMES = {
    "imex-bdf": BaselineScheme("imex-bdf", 1),
    "newmark-tr": BaselineScheme("newmark-tr", 1),
    "generalized-alpha": BaselineScheme("generalized-alpha", 1),
    "bathe": BaselineScheme("bathe", 2),
    "central-difference": BaselineScheme("central-difference", 1),
    "cd-park-underwood": BaselineScheme("cd-park-underwood", 1),
    "rk4": BaselineScheme("rk4", 4),
}

def _fdSteps(x, relStep):
    return np.maximum(relStep, relStep * np.abs(x))

def finiteDifferenceJacobian(fun, x, relStep=1e-7):
    """ Central-difference Jacobian of fun at x.
    """
    x = np.asarray(x, dtype=float)
    h = _fdSteps(x, relStep)
    columns = []
    for i in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp[i] += h[i]
        xm[i] -= h[i]
        columns.append((np.asarray(fun(xp), dtype=float) - np.asarray(fun(xm), dtype=float)) / (2.0 * h[i]))
    return np.column_stack(columns) if columns else np.zeros((0, 0))

def newtonSolve(residual, jacobian, x0, cfg=None):
    """ Newton-Raphson on residual(x) = 0. At least one correction is always taken, so
        linear residuals converge in exactly one iteration.
    """
    cfg = cfg or NewtonConfig()
    if jacobian is None or cfg.finiteDifference:
        jacobian = lambda x: finiteDifferenceJacobian(residual, x, cfg.fdRelStep)

    x = np.array(x0, dtype=float, ndmin=1)
    r = np.atleast_1d(np.asarray(residual(x), dtype=float))
    norm = float(np.max(np.abs(r))) if r.size else 0.0
    iterations = 0
    while True:
        if not np.isfinite(norm):
            raise NonConvergence(x, norm, iterations, reason="non-finite residual")
        if iterations > 0 and norm <= cfg.absTol:
            return NewtonResult(x, iterations, norm)
        if iterations >= cfg.maxIter:
            raise NonConvergence(x, norm, iterations, reason="iteration cap reached")
        J = np.atleast_2d(np.asarray(jacobian(x), dtype=float))
        try:
            dx = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError as e:
            raise NonConvergence(x, norm, iterations, reason="singular Jacobian ({})".format(e))
        x = x + dx
        iterations += 1
        r = np.atleast_1d(np.asarray(residual(x), dtype=float))
        norm = float(np.max(np.abs(r)))

def _tangent(sys, u, v, t, newton):
    """ (d fNl/du, d fNl/dv) at (u, v, t).
    """
    n = sys.nDof
    if not sys.hasNonlinearForce:
        return np.zeros((n, n)), np.zeros((n, n))
    if sys.fNlTangent is not None and not newton.finiteDifference:
        Ju, Jv = sys.fNlTangent(u, v, t)
        return np.atleast_2d(np.asarray(Ju, dtype=float)), np.atleast_2d(np.asarray(Jv, dtype=float))
    Ju = finiteDifferenceJacobian(lambda x: sys.fNl(x, v, t), u, newton.fdRelStep)
    Jv = finiteDifferenceJacobian(lambda x: sys.fNl(u, x, t), v, newton.fdRelStep)
    return Ju, Jv

class _NewmarkFamilyStepper():
    """ Newmark kinematics with generalized-alpha force interpolation:

            (1-am) M a1 + am M a0 + (1-af) [C v1 + K u1 + fNl1 - fExt1] + af [C v0 + K u0 + fNl0 - fExt0] = 0
            a1 = (u1 - u0 - dt v0 - dt^2 (1/2 - beta) a0) / (beta dt^2)
            v1 = v0 + dt ((1 - gamma) a0 + gamma a1)

        am = af = 0 with beta = 1/4, gamma = 1/2 is the trapezoidal rule.
    """

    def __init__(self, sys, newton, alphaM=0.0, alphaF=0.0, beta=0.25, gamma=0.5):
        self.sys = sys
        self.newton = newton
        self.alphaM = alphaM
        self.alphaF = alphaF
        self.beta = beta
        self.gamma = gamma

    def step(self, t, u, v, a, dt):
        sys = self.sys
        am, af, beta, gamma = self.alphaM, self.alphaF, self.beta, self.gamma
        t1 = t + dt
        c0 = 1.0 / (beta * dt * dt)
        c1 = gamma / (beta * dt)
        uStar = u + dt * v + dt * dt * (0.5 - beta) * a
        vStar = v + dt * (1.0 - gamma) * a
        if af != 0.0:
            oldForce = af * (sys.C @ v + sys.K @ u + sys.fNl(u, v, t) - sys.fExt(t))
        else:
            oldForce = 0.0
        oldInertia = am * (sys.M @ a) if am != 0.0 else 0.0
        fExt1 = sys.fExt(t1)

        def kinematics(u1):
            a1 = c0 * (u1 - uStar)
            return a1, vStar + dt * gamma * a1

        def residual(u1):
            a1, v1 = kinematics(u1)
            return ((1.0 - am) * (sys.M @ a1) + oldInertia
                    + (1.0 - af) * (sys.C @ v1 + sys.K @ u1 + sys.fNl(u1, v1, t1) - fExt1) + oldForce)

        def jacobian(u1):
            a1, v1 = kinematics(u1)
            Ju, Jv = _tangent(sys, u1, v1, t1, self.newton)
            return (1.0 - am) * c0 * sys.M + (1.0 - af) * (c1 * (sys.C + Jv) + sys.K + Ju)

        result = newtonSolve(residual, jacobian, uStar + dt * dt * beta * a, self.newton)
        a1, v1 = kinematics(result.x)
        return t1, result.x, v1, a1, [result.iterations]

class _BatheStepper():
    """ Two sub-steps: the trapezoidal rule over gamma dt, then

            v1 = v0 + dt (s0 a0 + s1 ag + s2 a1),  u1 = u0 + dt (q0 v0 + q1 vg + q2 v1)

        with s0 = q0 = s1 = q1 = 1/(4 - 2 gamma), s2 = q2 = (1 - gamma)/(2 - gamma),
        equilibrium enforced at t + dt. gamma = 1/2 gives the standard Bathe method.
    """

    def __init__(self, sys, newton, gamma=0.5):
        if not 0.0 < gamma < 1.0:
            raise ValueError("Bathe splitting parameter must lie in (0, 1), got {}.".format(gamma))
        self.sys = sys
        self.newton = newton
        self.gamma = gamma
        self.trapezoidal = _NewmarkFamilyStepper(sys, newton)
        self.s01 = 1.0 / (4.0 - 2.0 * gamma)
        self.s2 = (1.0 - gamma) / (2.0 - gamma)

    def step(self, t, u, v, a, dt):
        sys = self.sys
        tg, ug, vg, ag, iters = self.trapezoidal.step(t, u, v, a, self.gamma * dt)
        s01, s2 = self.s01, self.s2
        t1 = t + dt
        uBase = u + dt * s01 * (v + vg)
        vBase = v + dt * s01 * (a + ag)
        fExt1 = sys.fExt(t1)

        def kinematics(u1):
            v1 = (u1 - uBase) / (s2 * dt)
            a1 = (v1 - vBase) / (s2 * dt)
            return v1, a1

        def residual(u1):
            v1, a1 = kinematics(u1)
            return sys.M @ a1 + sys.C @ v1 + sys.K @ u1 + sys.fNl(u1, v1, t1) - fExt1

        def jacobian(u1):
            v1, a1 = kinematics(u1)
            Ju, Jv = _tangent(sys, u1, v1, t1, self.newton)
            return sys.M / (s2 * s2 * dt * dt) + (sys.C + Jv) / (s2 * dt) + sys.K + Ju

        result = newtonSolve(residual, jacobian, ug + (1.0 - self.gamma) * dt * vg, self.newton)
        v1, a1 = kinematics(result.x)
        return t1, result.x, v1, a1, iters + [result.iterations]

def _runImplicit(sys, scheme, stepper, dt, tEnd, u0, v0):
    validateSystem(sys).require()
    nSteps = stepCount(dt, tEnd)
    rec = TrajectoryRecorder(scheme, sys.nDof, dt, nSteps)
    u = np.array(u0, dtype=float).reshape(sys.nDof)
    v = np.array(v0, dtype=float).reshape(sys.nDof)
    a = initialAcceleration(sys, u, v, 0.0)
    rec.append(0.0, u, v, a)
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(nSteps):
            t = n * dt
            try:
                _, u, v, a, iterations = stepper.step(t, u, v, a, dt)
            except NonConvergence as e:
                if np.isfinite(e.residualNorm):
                    raise e.atStep(n + 1)
                logger.warning("%s: non-finite residual at step %d, run flagged divergent", scheme, n + 1)
                rec.markDivergent(n + 1)
                break
            rec.newtonIterations.extend(iterations)
            rec.linearSolves += sum(iterations)
            if not finiteState(u, v, a):
                logger.warning("%s diverged at step %d", scheme, n + 1)
                rec.markDivergent(n + 1)
                break
            rec.append((n + 1) * dt, u, v, a)
    return rec.finish()

def integrateNewmarkTr(sys, dt, tEnd, u0, v0, newton=None):
    """ Newmark trapezoidal rule (beta = 1/4, gamma = 1/2) with Newton on the displacement.
    """
    stepper = _NewmarkFamilyStepper(sys, newton or NewtonConfig())
    return _runImplicit(sys, "newmark-tr", stepper, dt, tEnd, u0, v0)

def generalizedAlphaParameters(rhoInf):
    """ (alphaM, alphaF, beta, gamma) of the generalized-alpha method for spectral radius rhoInf at infinity.
    """
    if not 0.0 <= rhoInf <= 1.0:
        raise ValueError("rhoInf must lie in [0, 1], got {}.".format(rhoInf))
    alphaM = (2.0 * rhoInf - 1.0) / (rhoInf + 1.0)
    alphaF = rhoInf / (rhoInf + 1.0)
    gamma = 0.5 - alphaM + alphaF
    beta = 0.25 * (1.0 - alphaM + alphaF) ** 2
    return alphaM, alphaF, beta, gamma

def integrateGeneralizedAlpha(sys, rhoInf, dt, tEnd, u0, v0, newton=None):
    """ Generalized-alpha with interpolated forces; rhoInf = 1 reproduces the trapezoidal rule.
    """
    alphaM, alphaF, beta, gamma = generalizedAlphaParameters(rhoInf)
    stepper = _NewmarkFamilyStepper(sys, newton or NewtonConfig(), alphaM, alphaF, beta, gamma)
    return _runImplicit(sys, "generalized-alpha", stepper, dt, tEnd, u0, v0)

def integrateBathe(sys, gamma, dt, tEnd, u0, v0, newton=None):
    stepper = _BatheStepper(sys, newton or NewtonConfig(), gamma)
    return _runImplicit(sys, "bathe", stepper, dt, tEnd, u0, v0)

def integrateCentralDifference(sys, dt, tEnd, u0, v0, variant="standard"):
    """ Explicit central difference in velocity form:

            v_half = v_n + dt/2 a_n,  u_{n+1} = u_n + dt v_half,  v_{n+1} = v_half + dt/2 a_{n+1}

        'standard' solves (M + dt/2 C) a_{n+1} = f_ext - K u_{n+1} - C v_half - f_nl(u_{n+1}) and
        requires f_nl independent of v. 'park_underwood' evaluates damping and f_nl with the
        lagged velocity v_half + dt/2 a_n and solves with M alone.
    """
    if variant not in ("standard", "park_underwood"):
        raise ValueError("Unknown central difference variant '{}'.".format(variant))
    if variant == "standard" and sys.isVelocityDependent():
        raise ValueError("Standard central difference needs a velocity-independent f_nl; use 'park_underwood'.")
    validateSystem(sys).require()
    scheme = "central-difference" if variant == "standard" else "cd-park-underwood"
    nSteps = stepCount(dt, tEnd)
    rec = TrajectoryRecorder(scheme, sys.nDof, dt, nSteps)
    u = np.array(u0, dtype=float).reshape(sys.nDof)
    v = np.array(v0, dtype=float).reshape(sys.nDof)
    a = initialAcceleration(sys, u, v, 0.0)
    rec.append(0.0, u, v, a)
    factor = cholesky(sys.M + 0.5 * dt * sys.C) if variant == "standard" else None
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(nSteps):
            t1 = (n + 1) * dt
            vHalf = v + 0.5 * dt * a
            u = u + dt * vHalf
            if factor is not None:
                a = factor.solve(sys.fExt(t1) - sys.K @ u - sys.C @ vHalf - sys.fNl(u, vHalf, t1))
            else:
                vLagged = vHalf + 0.5 * dt * a
                a = sys.massSolve(sys.fExt(t1) - sys.K @ u - sys.C @ vLagged - sys.fNl(u, vLagged, t1))
            v = vHalf + 0.5 * dt * a
            rec.linearSolves += 1
            if not finiteState(u, v, a):
                logger.warning("%s diverged at step %d", scheme, n + 1)
                rec.markDivergent(n + 1)
                break
            rec.append(t1, u, v, a)
    return rec.finish()

def integrateRk4(sys, dt, tEnd, u0, v0):
    """ Classical fourth-order Runge-Kutta on the first-order form; four mass solves per step.
    """
    validateSystem(sys).require()
    nSteps = stepCount(dt, tEnd)
    rec = TrajectoryRecorder("rk4", sys.nDof, dt, nSteps)
    u = np.array(u0, dtype=float).reshape(sys.nDof)
    v = np.array(v0, dtype=float).reshape(sys.nDof)
    rec.append(0.0, u, v, initialAcceleration(sys, u, v, 0.0))
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(nSteps):
            u, v = rkStep(sys, n * dt, u, v, dt, CLASSICAL_RK4)
            t1 = (n + 1) * dt
            a = acceleration(sys, u, v, t1)
            rec.linearSolves += CLASSICAL_RK4.stages
            if not finiteState(u, v, a):
                logger.warning("rk4 diverged at step %d", n + 1)
                rec.markDivergent(n + 1)
                break
            rec.append(t1, u, v, a)
    return rec.finish()
