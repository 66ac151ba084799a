#!/usr/bin/env python
# -*- coding: utf-8 -*-
#
#  Benchmark systems with their initial data, pseudo-energy estimates and exact solutions.
#
#  License: MIT
#
#  Copyright (c) 2020 Joerg Beckers

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
import scipy.integrate
import scipy.optimize

from .bdfsav import STARTERS, RUNGE_KUTTA_STARTER, EXACT_STARTER
from .model import SecondOrderSystem, acceleration

CLOSED_FORM = "closed_form"
QUADRATURE = "quadrature"
HIGH_RESOLUTION_RUN = "high_resolution_run"

REFERENCE_POLICIES = (CLOSED_FORM, QUADRATURE, HIGH_RESOLUTION_RUN)

# Ratio between the recommended SAV floor and the estimated maximum pseudo-energy.
PSI_FACTOR = 100.0

@dataclass(frozen=True)
class BenchmarkProblem:
    """ A system plus everything a run needs to start and be judged.

        'exact' maps a time t to the exact (u, v) vectors when the problem has one.
        'period' is the natural (linear) or exact (pendulum) period, used to scale time-steps.
        'starter' is how the IMEX-BDF runs obtain their first k-1 states unless a run overrides it.
    """
    problemId: str
    system: SecondOrderSystem
    u0: np.ndarray
    v0: np.ndarray
    tEnd: float
    psiMaxEstimate: float
    referencePolicy: str
    exact: Optional[Callable] = None
    period: Optional[float] = None
    referenceStep: Optional[float] = None
    extras: dict = field(default_factory=dict)
    starter: str = RUNGE_KUTTA_STARTER

    def __post_init__(self):
        if self.referencePolicy not in REFERENCE_POLICIES:
            raise ValueError("Unknown reference policy '{}'.".format(self.referencePolicy))
        if self.referencePolicy != HIGH_RESOLUTION_RUN and self.exact is None:
            raise ValueError("Reference policy '{}' needs an exact solution.".format(self.referencePolicy))
        if self.starter not in STARTERS:
            raise ValueError("Unknown starter '{}'; choose from {}.".format(self.starter, ", ".join(STARTERS)))
        if self.starter == EXACT_STARTER and self.exact is None:
            raise ValueError("The exact starter needs an exact solution.")

    @property
    def psiRecommended(self):
        return PSI_FACTOR * self.psiMaxEstimate

    def exactStates(self, times):
        """ Exact (U, V), each of shape (len(times), nDof).
        """
        if self.exact is None:
            raise ValueError("Problem '{}' has no exact solution.".format(self.problemId))
        times = np.asarray(times, dtype=float)
        U = np.empty((times.size, self.system.nDof))
        V = np.empty((times.size, self.system.nDof))
        for i, t in enumerate(times):
            U[i], V[i] = self.exact(float(t))
        return U, V

    def referenceAcceleration(self, t, u, v):
        return acceleration(self.system, u, v, t)

    def withEndTime(self, tEnd):
        return replace(self, tEnd=tEnd, extras=dict(self.extras))

def _vector(x):
    return np.atleast_1d(np.array(x, dtype=float))

# --- linear SDOF --------------------------------------------------------------

class _LinearSdofSolution():
    """ Closed-form response of u'' + 2 zeta w0 u' + w0^2 u = p0 sin(wf t).
    """

    def __init__(self, zeta, omega0, p0, omegaF, u0, v0):
        eta = (omega0 ** 2 - omegaF ** 2) ** 2 + (2.0 * zeta * omega0 * omegaF) ** 2
        if eta == 0.0:
            raise ValueError("Undamped resonant forcing (omegaF = omega0, zeta = 0) has no bounded closed form.")
        self.zeta = zeta
        self.omega0 = omega0
        self.omegaF = omegaF
        self.omegaD = omega0 * math.sqrt(1.0 - zeta * zeta)
        self.p = p0 / eta
        self.A = u0 + 2.0 * self.p * zeta * omega0 * omegaF
        self.B = ((v0 + zeta * omega0 * u0) / self.omegaD
                  + self.p * (omegaF / self.omegaD) * (omegaF ** 2 - omega0 ** 2 + 2.0 * zeta ** 2 * omega0 ** 2))

    def __call__(self, t):
        z, w0, wf, wd = self.zeta, self.omega0, self.omegaF, self.omegaD
        decay = math.exp(-z * w0 * t)
        cd, sd = math.cos(wd * t), math.sin(wd * t)
        cf, sf = math.cos(wf * t), math.sin(wf * t)
        u = decay * (self.A * cd + self.B * sd) + self.p * ((w0 ** 2 - wf ** 2) * sf - 2.0 * w0 * wf * z * cf)
        v = (decay * ((-z * w0 * self.A + wd * self.B) * cd + (-z * w0 * self.B - wd * self.A) * sd)
             + self.p * wf * ((w0 ** 2 - wf ** 2) * cf + 2.0 * w0 * wf * z * sf))
        return _vector(u), _vector(v)

def linearSdof(zeta=0.2, omega0=2.0 * math.pi, p0=1.0, omegaF=None, u0=0.0, v0=0.0, tEnd=None):
    """ Damped SDOF m = 1, c = 2 zeta w0, k = w0^2 under p0 sin(wf t), wf defaulting to 2 w0.
    """
    if not omega0 > 0.0:
        raise ValueError("omega0 must be positive.")
    if not 0.0 <= zeta < 1.0:
        raise ValueError("zeta must lie in [0, 1).")
    omegaF = 2.0 * omega0 if omegaF is None else omegaF
    solution = _LinearSdofSolution(zeta, omega0, p0, omegaF, u0, v0)
    period = 2.0 * math.pi / omega0

    def fExt(t):
        return np.array([p0 * math.sin(omegaF * t)])

    system = SecondOrderSystem([[1.0]], [[2.0 * zeta * omega0]], [[omega0 ** 2]], fExt=fExt if p0 != 0.0 else None,
                               velocityDependent=False, name="linear-sdof")
    uAmplitude = abs(u0) + 2.0 * abs(p0) / omega0 ** 2
    psiMax = 0.5 * v0 ** 2 + 0.5 * omega0 ** 2 * uAmplitude ** 2
    return BenchmarkProblem("linear-sdof", system, _vector(u0), _vector(v0),
                            10.0 * period if tEnd is None else tEnd, psiMax, CLOSED_FORM,
                            exact=solution, period=period,
                            extras={"zeta": zeta, "omega0": omega0, "p0": p0, "omegaF": omegaF})

# --- Van der Pol ----------------------------------------------------------------

def vanDerPolLimitCycleVelocity(uHat, mu):
    """ Approximate limit-cycle velocity as a function of displacement on (-sqrt 3, sqrt 3).
    """
    uHat = np.asarray(uHat, dtype=float)
    base = np.sqrt(np.clip(3.0 - uHat ** 2, 0.0, None))
    return np.where(uHat < -1.0, base, base + mu * (-uHat ** 3 / 3.0 + uHat + 2.0 / 3.0))

def vanDerPolPsiMax(mu, k1=1.0, m=1.0):
    """ Largest 1/2 m v^2 + 1/2 k1 u^2 along the approximate limit cycle.
    """
    root3 = math.sqrt(3.0)
    energy = lambda x: 0.5 * m * float(vanDerPolLimitCycleVelocity(x, mu)) ** 2 + 0.5 * k1 * x * x
    best = 0.0
    for lo, hi in ((-root3, -1.0), (-1.0, root3)):
        res = scipy.optimize.minimize_scalar(lambda x: -energy(x), bounds=(lo, hi), method="bounded",
                                             options={"xatol": 1e-10})
        best = max(best, -res.fun, energy(lo), energy(hi))
    return best

def vanDerPol(mu=2.0, k1=1.0, u0=2.0, v0=0.0, m=1.0, tEnd=15.0):
    """ m u'' - mu (1 - u^2) u' + k1 u = 0 with the nonlinear damping moved into f_nl.
    """
    if not mu > 0.0:
        raise ValueError("mu must be positive.")

    def fNl(u, v, t):
        return -mu * (1.0 - u * u) * v

    def fNlTangent(u, v, t):
        return np.diag(2.0 * mu * u * v), np.diag(-mu * (1.0 - u * u))

    system = SecondOrderSystem([[m]], [[0.0]], [[k1]], fNl=fNl, fNlTangent=fNlTangent,
                               velocityDependent=True, name="van-der-pol")
    psiMax = max(vanDerPolPsiMax(mu, k1, m), 0.5 * m * v0 ** 2 + 0.5 * k1 * u0 ** 2)
    return BenchmarkProblem("van-der-pol", system, _vector(u0), _vector(v0), tEnd, psiMax, HIGH_RESOLUTION_RUN,
                            period=2.0 * math.pi * math.sqrt(m / k1), referenceStep=4e-5,
                            extras={"mu": mu})

# --- Duffing SDOF -------------------------------------------------------------

def duffingSdof(m=1.0, c=1.0, k1=1.0, k3=20.0, p0=500.0, omegaP=2.0 * math.pi, u0=5.0, v0=-10.0, tEnd=1.0):
    """ m u'' + c u' + k1 u + k3 u^3 = p0 cos(wp t).
    """
    def fNl(u, v, t):
        return k3 * u ** 3

    def fNlTangent(u, v, t):
        return np.diag(3.0 * k3 * u ** 2), np.zeros((1, 1))

    def fExt(t):
        return np.array([p0 * math.cos(omegaP * t)])

    system = SecondOrderSystem([[m]], [[c]], [[k1]], fNl=fNl if k3 != 0.0 else None, fExt=fExt,
                               fNlTangent=fNlTangent, velocityDependent=False, name="duffing")
    psiMax = 0.5 * m * v0 ** 2 + 0.5 * k1 * (u0 + 2.0 * p0 / k1) ** 2
    return BenchmarkProblem("duffing", system, _vector(u0), _vector(v0), tEnd, psiMax, HIGH_RESOLUTION_RUN,
                            period=2.0 * math.pi * math.sqrt(m / k1), referenceStep=5e-6,
                            extras={"k3": k3, "p0": p0})

# --- simple pendulum ----------------------------------------------------------

class PendulumSolution():
    """ Exact swing of theta'' + w^2 sin(theta) = 0 below the separatrix.

        With k = sin(theta_max / 2) and sin(theta / 2) = k sin(phi), the time to rise from
        theta = 0 to theta is the integral of dphi / (w sqrt(1 - k^2 sin^2 phi)); it is evaluated
        by adaptive quadrature and inverted by bracketing on each quarter period.
    """

    def __init__(self, gOverL, theta0, v0):
        if not gOverL > 0.0:
            raise ValueError("g/L must be positive.")
        self.omega = math.sqrt(gOverL)
        cosMax = math.cos(theta0) - v0 * v0 / (2.0 * gOverL)
        if cosMax <= -1.0:
            raise ValueError("Initial energy reaches the separatrix; the pendulum does not oscillate.")
        self.thetaMax = math.acos(min(cosMax, 1.0))
        self.modulus = math.sin(0.5 * self.thetaMax)
        self.quarter = self.timeOfPhase(0.5 * math.pi)
        self.period = 4.0 * self.quarter
        if self.modulus == 0.0:
            self.tau0 = 0.0
            return
        rise = self.timeOfAngle(abs(theta0))
        Q = self.quarter
        if theta0 >= 0.0 and v0 >= 0.0:
            self.tau0 = rise
        elif theta0 >= 0.0:
            self.tau0 = 2.0 * Q - rise
        elif v0 < 0.0:
            self.tau0 = 2.0 * Q + rise
        else:
            self.tau0 = 4.0 * Q - rise

    @property
    def firstPeakTime(self):
        """ Time of the first maximum of theta in [0, period).
        """
        return math.fmod(self.quarter - self.tau0 + self.period, self.period)

    def timeOfPhase(self, phi):
        m = self.modulus ** 2
        value, _ = scipy.integrate.quad(lambda s: 1.0 / (self.omega * math.sqrt(1.0 - m * math.sin(s) ** 2)),
                                        0.0, phi, epsabs=1e-14, epsrel=1e-13, limit=200)
        return value

    def timeOfAngle(self, theta):
        """ Time to rise from 0 to theta, 0 <= theta <= theta_max.
        """
        ratio = math.sin(0.5 * theta) / self.modulus
        return self.timeOfPhase(math.asin(min(max(ratio, -1.0), 1.0)))

    def phaseOfTime(self, tau):
        if tau <= 0.0:
            return 0.0
        if tau >= self.quarter:
            return 0.5 * math.pi
        return scipy.optimize.brentq(lambda p: self.timeOfPhase(p) - tau, 0.0, 0.5 * math.pi,
                                     xtol=1e-15, rtol=1e-15, maxiter=200)

    def __call__(self, t):
        if self.modulus == 0.0:
            return _vector(0.0), _vector(0.0)
        Q = self.quarter
        tau = math.fmod(self.tau0 + t, 4.0 * Q)
        if tau < 0.0:
            tau += 4.0 * Q
        quarter = min(int(tau // Q), 3)
        local = (tau, 2.0 * Q - tau, tau - 2.0 * Q, 4.0 * Q - tau)[quarter]
        phi = self.phaseOfTime(local)
        theta = 2.0 * math.asin(self.modulus * math.sin(phi))
        speed = 2.0 * self.omega * self.modulus * math.cos(phi)
        thetaSign = 1.0 if quarter < 2 else -1.0
        speedSign = 1.0 if quarter in (0, 3) else -1.0
        return _vector(thetaSign * theta), _vector(speedSign * speed)

def simplePendulum(gOverL=1.0, theta0=0.0, v0=1.95, tEnd=None):
    """ theta'' + (g/L) sin(theta) = 0, all of it in f_nl. The default run covers two periods.
    """
    solution = PendulumSolution(gOverL, theta0, v0)

    def fNl(u, v, t):
        return gOverL * np.sin(u)

    def fNlTangent(u, v, t):
        return np.diag(gOverL * np.cos(u)), np.zeros((1, 1))

    system = SecondOrderSystem([[1.0]], [[0.0]], [[0.0]], fNl=fNl, fNlTangent=fNlTangent,
                               velocityDependent=False, name="pendulum")
    psiMax = 0.5 * v0 ** 2 + gOverL * (1.0 - math.cos(theta0))
    return BenchmarkProblem("pendulum", system, _vector(theta0), _vector(v0),
                            2.0 * solution.period if tEnd is None else tEnd, psiMax, QUADRATURE,
                            exact=solution, period=solution.period,
                            extras={"thetaMax": solution.thetaMax, "quarter": solution.quarter,
                                    "firstPeakTime": solution.firstPeakTime})

# --- spring pendulum ----------------------------------------------------------

def springPendulum(m=1.0, k=98.1, L0=0.5, g=9.81, amplitude=0.1, frequency=2.0 * math.pi, tEnd=2.0):
    """ Elastic pendulum in radial stretch x and angle theta, forced so that
        x(t) = theta(t) = amplitude sin(frequency t):

            f_x     = x'' + (k/m) x - (L0 + x) theta'^2 - g cos(theta)
            f_theta = theta'' + (2 x' theta' + g sin(theta)) / (L0 + x)

        The IMEX-BDF runs take their starting states from the manufactured solution.
    """
    A, w = amplitude, frequency

    def manufactured(t):
        s, c = math.sin(w * t), math.cos(w * t)
        return A * s, A * w * c, -A * w * w * s

    def fNl(u, v, t):
        x, th = u
        xd, thd = v
        length = L0 + x
        if not length > 0.0:
            return np.full(2, np.nan)
        return np.array([-length * thd * thd - g * math.cos(th), (2.0 * xd * thd + g * math.sin(th)) / length])

    def fNlTangent(u, v, t):
        x, th = u
        xd, thd = v
        length = L0 + x
        radial = 2.0 * xd * thd + g * math.sin(th)
        Ju = np.array([[-thd * thd, g * math.sin(th)],
                       [-radial / length ** 2, g * math.cos(th) / length]])
        Jv = np.array([[0.0, -2.0 * length * thd],
                       [2.0 * thd / length, 2.0 * xd / length]])
        return Ju, Jv

    def fExt(t):
        q, qd, qdd = manufactured(t)
        length = L0 + q
        fx = qdd + (k / m) * q - length * qd * qd - g * math.cos(q)
        fth = qdd + (2.0 * qd * qd + g * math.sin(q)) / length
        return np.array([fx, fth])

    def exact(t):
        q, qd, _ = manufactured(t)
        return np.array([q, q]), np.array([qd, qd])

    system = SecondOrderSystem(np.eye(2), np.zeros((2, 2)), np.diag([k / m, 0.0]), fNl=fNl, fExt=fExt,
                               fNlTangent=fNlTangent, velocityDependent=True, name="spring-pendulum")
    psiMax = max(A * A * w * w, 0.5 * (k / m) * A * A)
    q0, qd0, _ = manufactured(0.0)
    return BenchmarkProblem("spring-pendulum", system, np.array([q0, q0]), np.array([qd0, qd0]), tEnd, psiMax,
                            CLOSED_FORM, exact=exact, period=2.0 * math.pi / w, extras={"L0": L0},
                            starter=EXACT_STARTER)

# --- Duffing chain --------------------------------------------------------------

def _chainMatrix(N, coefficient):
    A = np.zeros((N, N))
    for i in range(N):
        A[i, i] = 2.0 * coefficient if i < N - 1 else coefficient
        if i > 0:
            A[i, i - 1] = A[i - 1, i] = -coefficient
    return A

def duffingChain(N=20, m=1.0, c=0.3, k1=1.0, k3=10.0, omegaP=1.0, p0=1.0, tEnd=50.0):
    """ N masses in series, DOF 1 tied to ground, harmonic load on DOF N; each link
        carries a linear spring k1, a dashpot c and a cubic spring k3.
    """
    N = int(N)
    if N < 2:
        raise ValueError("A chain needs at least two degrees of freedom.")

    def stretches(u):
        return np.diff(np.concatenate(([0.0], u)))

    def fNl(u, v, t):
        d3 = k3 * stretches(u) ** 3
        f = d3.copy()
        f[:-1] -= d3[1:]
        return f

    def fNlTangent(u, v, t):
        s = 3.0 * k3 * stretches(u) ** 2
        diag = s.copy()
        diag[:-1] += s[1:]
        J = np.diag(diag) - np.diag(s[1:], 1) - np.diag(s[1:], -1)
        return J, np.zeros((N, N))

    def fExt(t):
        f = np.zeros(N)
        f[-1] = p0 * math.cos(omegaP * t)
        return f

    K = _chainMatrix(N, k1)
    system = SecondOrderSystem(m * np.eye(N), _chainMatrix(N, c), K, fNl=fNl if k3 != 0.0 else None, fExt=fExt,
                               fNlTangent=fNlTangent, velocityDependent=False, name="duffing-chain")
    fMax = np.zeros(N)
    fMax[-1] = abs(p0)
    uMax = 2.0 * np.linalg.solve(K, fMax)
    psiMax = 0.5 * float(uMax @ K @ uMax)
    return BenchmarkProblem("duffing-chain", system, np.zeros(N), np.zeros(N), tEnd, psiMax, HIGH_RESOLUTION_RUN,
                            period=2.0 * math.pi / omegaP, referenceStep=5e-5, extras={"N": N})

PROBLEMS = {
    "linear-sdof": linearSdof,
    "van-der-pol": vanDerPol,
    "duffing": duffingSdof,
    "pendulum": simplePendulum,
    "spring-pendulum": springPendulum,
    "duffing-chain": duffingChain,
}

def makeProblem(problemId, **overrides):
    """ Builds a registered problem, passing 'overrides' to its constructor.
    """
    try:
        constructor = PROBLEMS[problemId]
    except KeyError:
        raise KeyError("Unknown problem '{}'; choose one of {}.".format(problemId, ", ".join(PROBLEMS)))
    try:
        return constructor(**overrides)
    except TypeError as e:
        raise ValueError("Bad parameters for problem '{}': {}".format(problemId, e))
