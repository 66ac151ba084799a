#!/usr/bin/env python
# -*- coding: utf-8 -*-
#
#  States, per-step SAV diagnostics and the trajectory container filled by every integrator.
#
#  License: MIT
#
#  Copyright (c) 2020 Joerg Beckers

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .model import pseudoEnergy

@dataclass(frozen=True)
class State:
    t: float
    u: np.ndarray
    v: np.ndarray
    a: np.ndarray

    def isFinite(self):
        return bool(np.all(np.isfinite(self.u)) and np.all(np.isfinite(self.v)) and np.all(np.isfinite(self.a)))

@dataclass(frozen=True)
class SavState:
    """ The scalar auxiliary variable and its floor; psi stays fixed over a run.
    """
    phi: float
    psi: float

    def __post_init__(self):
        if not self.psi > 0.0:
            raise ValueError("SAV floor psi must be positive, got {}.".format(self.psi))
        if not self.phi > 0.0:
            raise ValueError("SAV must be positive, got {}.".format(self.phi))

@dataclass(frozen=True)
class StepDiagnostics:
    step: int
    xi: float
    upsilon: float
    phi: float
    psiIm: float
    thetaIm: float
    recoveryTriggered: bool = False
    clamped: bool = False

@dataclass
class Trajectory:
    """ Time-ordered states of one integrator run.

        'phi' holds the SAV per step (NaN where a scheme carries none or during
        the starting procedure). A divergent run is truncated after the last
        finite state and flagged.
    """
    scheme: str
    dt: float
    t: np.ndarray
    u: np.ndarray
    v: np.ndarray
    a: np.ndarray
    phi: np.ndarray
    diagnostics: List[StepDiagnostics] = field(default_factory=list)
    recoveryEvents: List[int] = field(default_factory=list)
    clampEvents: List[int] = field(default_factory=list)
    newtonIterations: List[int] = field(default_factory=list)
    linearSolves: int = 0
    startupSolves: int = 0
    divergent: bool = False
    divergedAtStep: Optional[int] = None
    completed: bool = True
    psi: float = np.nan

    @property
    def nSteps(self):
        return len(self.t) - 1

    def state(self, n):
        return State(float(self.t[n]), self.u[n], self.v[n], self.a[n])

    @property
    def finalState(self):
        return self.state(len(self.t) - 1)

    def savState(self, n):
        """ SAV at step n, or None where the run carries none.
        """
        if np.isnan(self.psi) or np.isnan(self.phi[n]):
            return None
        return SavState(float(self.phi[n]), float(self.psi))

    def pseudoEnergies(self, sys):
        return np.array([pseudoEnergy(sys, self.u[n], self.v[n]) for n in range(len(self.t))])

    def isFinite(self):
        return bool(np.all(np.isfinite(self.u)) and np.all(np.isfinite(self.v)) and np.all(np.isfinite(self.a)))

    @property
    def avgNewtonIterations(self):
        """ Mean Newton iterations per sub-step; 1 for non-iterative schemes.
        """
        if not self.newtonIterations:
            return 1.0
        return float(np.mean(self.newtonIterations))

    def phiIncreases(self):
        """ Steps n+1 with phi_{n+1} above phi_n by more than one ulp, recovery steps excluded.
        """
        recovered = set(self.recoveryEvents)
        increases = []
        for n in range(1, len(self.phi)):
            prev, curr = self.phi[n - 1], self.phi[n]
            if np.isnan(prev) or np.isnan(curr) or n in recovered:
                continue
            if curr > np.nextafter(prev, np.inf):
                increases.append(n)
        return increases

def stepCount(dt, tEnd):
    """ Number of uniform steps of size dt covering [0, tEnd].
    """
    if dt <= 0.0:
        raise ValueError("Time-step must be positive, got {}.".format(dt))
    if tEnd < 0.0:
        raise ValueError("Duration must be non-negative, got {}.".format(tEnd))
    return int(round(tEnd / dt))

class TrajectoryRecorder():
    """ Preallocated storage an integrator appends states to.
    """

    def __init__(self, scheme, nDof, dt, nSteps):
        self.scheme = scheme
        self.dt = dt
        self._t = np.full(nSteps + 1, np.nan)
        self._u = np.full((nSteps + 1, nDof), np.nan)
        self._v = np.full((nSteps + 1, nDof), np.nan)
        self._a = np.full((nSteps + 1, nDof), np.nan)
        self._phi = np.full(nSteps + 1, np.nan)
        self._count = 0
        self.diagnostics = []
        self.recoveryEvents = []
        self.clampEvents = []
        self.newtonIterations = []
        self.linearSolves = 0
        self.startupSolves = 0
        self.divergedAtStep = None
        self.completed = True
        self.psi = np.nan

    def __len__(self):
        return self._count

    def append(self, t, u, v, a, phi=np.nan):
        n = self._count
        self._t[n] = t
        self._u[n] = u
        self._v[n] = v
        self._a[n] = a
        self._phi[n] = phi
        self._count += 1
        return n

    def setPhi(self, n, phi):
        self._phi[n] = phi

    def markDivergent(self, step):
        self.divergedAtStep = step

    def finish(self):
        n = self._count
        return Trajectory(scheme=self.scheme,
                          dt=self.dt,
                          t=self._t[:n].copy(),
                          u=self._u[:n].copy(),
                          v=self._v[:n].copy(),
                          a=self._a[:n].copy(),
                          phi=self._phi[:n].copy(),
                          diagnostics=list(self.diagnostics),
                          recoveryEvents=list(self.recoveryEvents),
                          clampEvents=list(self.clampEvents),
                          newtonIterations=list(self.newtonIterations),
                          linearSolves=self.linearSolves,
                          startupSolves=self.startupSolves,
                          divergent=self.divergedAtStep is not None,
                          divergedAtStep=self.divergedAtStep,
                          completed=self.completed and self.divergedAtStep is None,
                          psi=self.psi)

def finiteState(u, v, a):
    return bool(np.all(np.isfinite(u)) and np.all(np.isfinite(v)) and np.all(np.isfinite(a)))
