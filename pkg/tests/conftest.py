#!/usr/bin/env python
# -*- coding: utf-8 -*-
#
#  Shared fixtures and helpers for the test-suite.
#
#  License: MIT
#
#  Copyright (c) 2020 Joerg Beckers

import math

import numpy as np
import pytest

from imexsav.metrics import globalErrorNorm
from imexsav.model import SecondOrderSystem
from imexsav.problems import linearSdof

TWO_PI = 2.0 * math.pi

def randomLinearSystem(n, seed):
    """ Unforced linear system with SPD mass and stiffness and Rayleigh damping.
    """
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    K = Q @ np.diag(rng.uniform(1.0, 50.0, n)) @ Q.T
    K = 0.5 * (K + K.T)
    M = np.diag(rng.uniform(0.5, 2.0, n))
    C = 0.05 * M + 0.002 * K
    return SecondOrderSystem(M, C, K, name="random-linear")

def displacementError(problem, traj):
    """ Relative global displacement error of a run against the problem's exact solution.
    """
    U, _ = problem.exactStates(traj.t)
    return globalErrorNorm(traj.u, U)

@pytest.fixture
def sdof():
    return linearSdof()

@pytest.fixture
def freeSdof():
    """ Unforced damped SDOF released from u = 1.
    """
    return linearSdof(p0=0.0, u0=1.0)

@pytest.fixture
def undampedSdof():
    return linearSdof(zeta=0.0, p0=0.0, u0=1.0)
