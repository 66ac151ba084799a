#!/usr/bin/env python
# -*- coding: utf-8 -*-
#
#  Reference solutions: exact callbacks where a problem has one, otherwise two independent
#  high-resolution runs that have to agree before either is used.
#
#  License: MIT
#
#  Copyright (c) 2020 Joerg Beckers

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import scipy.integrate
import scipy.interpolate

from .baselines import integrateRk4, integrateBathe
from .errors import ReferenceMismatch, NonFiniteState
from .metrics import globalErrorNorm
from .model import acceleration
from .problems import CLOSED_FORM, QUADRATURE
from .trajectory import stepCount

logger = logging.getLogger(__name__)

REFERENCE_SOURCES = ("rk4", "dop853", "bathe")

DEFAULT_PAIR = ("rk4", "bathe")

DEFAULT_TOLERANCE = 1e-8

# Tolerance the pendulum quadrature is evaluated to.
QUADRATURE_UNCERTAINTY = 1e-12

# Closed-form references are resampled this much finer for the ranges eps is scaled by,
# up to SPAN_MAX_POINTS samples.
SPAN_REFINEMENT = 16
SPAN_MAX_POINTS = 16001

@dataclass(frozen=True)
class ReferenceData:
    """ Reference states on a time grid; 'uncertainty' is the mutual global difference
        of the two generating runs (0 for closed forms). 'spans', when set, holds the
        max - min of u, v and a over the whole interval rather than over the samples.
    """
    t: np.ndarray
    u: np.ndarray
    v: np.ndarray
    a: np.ndarray
    uncertainty: float
    source: str
    spans: Optional[Tuple[float, float, float]] = None

def timeGrid(dt, tEnd):
    """ The grid t_n = n dt every integrator samples on.
    """
    return np.arange(stepCount(dt, tEnd) + 1) * dt

def _accelerations(problem, times, U, V):
    return np.array([problem.referenceAcceleration(float(t), U[i], V[i]) for i, t in enumerate(times)])

def _denseSpans(problem, times):
    count = max(times.size, min(SPAN_REFINEMENT * (times.size - 1) + 1, SPAN_MAX_POINTS))
    dense = np.linspace(float(times[0]), float(times[-1]), count)
    U, V = problem.exactStates(dense)
    return tuple(float(np.max(Z) - np.min(Z)) for Z in (U, V, _accelerations(problem, dense, U, V)))

class _RunInterpolant():
    """ Fine fixed-step run resampled by cubic Hermite interpolation (u from (u, v), v from (v, a)).
    """

    def __init__(self, traj):
        if traj.divergent:
            raise NonFiniteState(traj.divergedAtStep, "Reference run '{}' diverged at step {}.".format(
                traj.scheme, traj.divergedAtStep))
        self.tEnd = float(traj.t[-1])
        self._u = scipy.interpolate.CubicHermiteSpline(traj.t, traj.u, traj.v, axis=0)
        self._v = scipy.interpolate.CubicHermiteSpline(traj.t, traj.v, traj.a, axis=0)

    def __call__(self, times):
        return self._u(times), self._v(times)

class _DenseOdeInterpolant():
    def __init__(self, problem, tEnd, rtol=1e-13, atol=1e-13):
        sys = problem.system
        n = sys.nDof

        def rhs(t, y):
            return np.concatenate((y[n:], acceleration(sys, y[:n], y[n:], t)))

        y0 = np.concatenate((problem.u0, problem.v0))
        scale = max(1.0, float(np.max(np.abs(y0))))
        sol = scipy.integrate.solve_ivp(rhs, (0.0, tEnd), y0, method="DOP853", dense_output=True,
                                        rtol=rtol, atol=atol * scale)
        if not sol.success:
            raise NonFiniteState(None, "DOP853 reference failed: {}".format(sol.message))
        self.n = n
        self._sol = sol.sol

    def __call__(self, times):
        Y = self._sol(np.asarray(times, dtype=float)).T
        return Y[:, :self.n], Y[:, self.n:]

class ReferenceGenerator():
    """ Builds the reference source(s) for a problem once and samples them on any grid up to tEnd.
    """

    def __init__(self, problem, pair=DEFAULT_PAIR, dtRef=None, tol=DEFAULT_TOLERANCE, tEnd=None, batheGamma=0.5):
        self.problem = problem
        self.tol = tol
        self.tEnd = problem.tEnd if tEnd is None else tEnd
        self.exact = problem.referencePolicy in (CLOSED_FORM, QUADRATURE)
        self.pair = tuple(pair)
        if self.exact:
            return
        if len(self.pair) != 2 or self.pair[0] == self.pair[1]:
            raise ValueError("A reference pair needs two different sources, got {}.".format(self.pair))
        for source in self.pair:
            if source not in REFERENCE_SOURCES:
                raise KeyError("Unknown reference source '{}'; choose from {}.".format(
                    source, ", ".join(REFERENCE_SOURCES)))
        dtRef = dtRef or problem.referenceStep
        if not dtRef or dtRef <= 0.0:
            raise ValueError("Problem '{}' needs a positive reference step.".format(problem.problemId))
        nFine = max(1, int(math.ceil(self.tEnd / dtRef - 1e-9)))
        self.dtRef = self.tEnd / nFine
        self.batheGamma = batheGamma
        self._sources = [self._build(source) for source in self.pair]

    def _build(self, source):
        problem = self.problem
        logger.info("Building %s reference for '%s' (dt = %.3g, tEnd = %g)", source, problem.problemId,
                    self.dtRef, self.tEnd)
        if source == "dop853":
            return _DenseOdeInterpolant(problem, self.tEnd)
        if source == "rk4":
            traj = integrateRk4(problem.system, self.dtRef, self.tEnd, problem.u0, problem.v0)
        else:
            traj = integrateBathe(problem.system, self.batheGamma, self.dtRef, self.tEnd, problem.u0, problem.v0)
        return _RunInterpolant(traj)

    def sample(self, times):
        times = np.asarray(times, dtype=float)
        problem = self.problem
        if self.exact:
            U, V = problem.exactStates(times)
            if problem.referencePolicy == QUADRATURE:
                return ReferenceData(times, U, V, _accelerations(problem, times, U, V), QUADRATURE_UNCERTAINTY,
                                     QUADRATURE)
            return ReferenceData(times, U, V, _accelerations(problem, times, U, V), 0.0, CLOSED_FORM,
                                 _denseSpans(problem, times))
        if times[-1] > self.tEnd * (1.0 + 1e-12):
            raise ValueError("Requested reference up to t = {} beyond the generated {}.".format(times[-1], self.tEnd))
        (U1, V1), (U2, V2) = (source(times) for source in self._sources)
        difference = max(globalErrorNorm(U1, U2), globalErrorNorm(V1, V2))
        if not difference < self.tol:
            raise ReferenceMismatch(difference, self.tol, self.pair)
        logger.info("Reference pair %s agrees to %.2e on %d samples", "/".join(self.pair), difference, times.size)
        return ReferenceData(times, U1, V1, _accelerations(problem, times, U1, V1), difference,
                             "/".join(self.pair))

def referenceSolution(problem, times, pair=DEFAULT_PAIR, dtRef=None, tol=DEFAULT_TOLERANCE):
    """ Reference states of 'problem' on 'times' following its reference policy.
    """
    times = np.asarray(times, dtype=float)
    generator = ReferenceGenerator(problem, pair, dtRef, tol, tEnd=float(times[-1]))
    return generator.sample(times)
