#!/usr/bin/env python
# -*- coding: utf-8 -*-
#
#  The semi-discrete structural system M a + C v + K u + f_nl(u, v, t) = f_ext(t),
#  its energy functionals and the dense SPD linear algebra shared by all integrators.
#
#  License: MIT
#
#  Copyright (c) 2020 Joerg Beckers

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Tuple

import numpy as np
import scipy.linalg

from .errors import StructuralError, NotPositiveDefinite, InvalidSystem

logger = logging.getLogger(__name__)

# Relative tolerance on max |A - A^T|.
TOL_SYM = 1e-12

# Relative diagonal shift for the semi-definiteness check.
TOL_PSD = 1e-10

@dataclass(frozen=True)
class CholeskyFactor:
    """ Lower-triangular factor L with L L^T equal to the factorized matrix.
    """
    L: np.ndarray

    def solve(self, b):
        return solveSpd(self, b)

@dataclass(frozen=True)
class MatrixCheck:
    name: str
    passed: bool
    message: str = ""

@dataclass(frozen=True)
class ValidationReport:
    """ Pass/fail per matrix. Any failure is fatal for the integrators.
    """
    checks: Tuple[MatrixCheck, ...]

    @property
    def ok(self):
        return all(check.passed for check in self.checks)

    def get(self, name):
        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError("No check named '{0}'.".format(name))

    def require(self):
        """ Raises 'InvalidSystem' unless every check passed.
        """
        if not self.ok:
            raise InvalidSystem(self)
        return self

def _asMatrix(A, nDof):
    if A is None:
        return np.zeros((nDof, nDof))
    return np.atleast_2d(np.array(A, dtype=float))

def _readOnly(A):
    A.setflags(write=False)
    return A

class SecondOrderSystem():
    """ Mass, damping and stiffness matrices plus the nonlinear and external force callbacks.

        fNl(u, v, t) and fExt(t) must be pure functions returning vectors of length nDof.
        fNlTangent(u, v, t), when given, returns the pair (d fNl/du, d fNl/dv) used by the
        Newton-based integrators; finite differences are used otherwise.
        Instances are immutable and may be shared between concurrent runs.
    """

    def __init__(self, M, C=None, K=None, fNl=None, fExt=None, fNlTangent=None, velocityDependent=None, name=""):
        M = np.atleast_2d(np.array(M, dtype=float))
        nDof = M.shape[0]
        self.nDof = nDof
        self.name = name
        self._raw = {"M": _readOnly(M), "C": _readOnly(_asMatrix(C, nDof)), "K": _readOnly(_asMatrix(K, nDof))}
        self._fNl = fNl
        self._fExt = fExt
        self.fNlTangent = fNlTangent
        self._velocityDependent = velocityDependent

    def rawMatrix(self, name):
        """ Returns the matrix 'name' exactly as supplied.
        """
        return self._raw[name]

    def _symmetric(self, name):
        A = self._raw[name]
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            return A
        return _readOnly(0.5 * (A + A.T))

    @cached_property
    def M(self):
        return self._symmetric("M")

    @cached_property
    def C(self):
        return self._symmetric("C")

    @cached_property
    def K(self):
        return self._symmetric("K")

    @property
    def hasNonlinearForce(self):
        return self._fNl is not None

    def fNl(self, u, v, t):
        if self._fNl is None:
            return np.zeros(self.nDof)
        return np.asarray(self._fNl(u, v, t), dtype=float)

    def fExt(self, t):
        if self._fExt is None:
            return np.zeros(self.nDof)
        return np.asarray(self._fExt(t), dtype=float)

    @cached_property
    def massFactor(self):
        return cholesky(self.M)

    @cached_property
    def _massDiagonal(self):
        M = self.M
        if np.count_nonzero(M - np.diag(np.diag(M))) == 0:
            return np.diag(M).copy()
        return None

    def massSolve(self, b):
        """ Solves M x = b with the cached factorization.
        """
        d = self._massDiagonal
        if d is not None:
            return b / d
        return solveSpd(self.massFactor, b)

    def isVelocityDependent(self):
        """ Whether fNl depends on v, as declared or else checked at random states.
        """
        if self._velocityDependent is not None:
            return bool(self._velocityDependent)
        if self._fNl is None:
            return False
        rng = np.random.default_rng(12345)
        for _ in range(3):
            u = rng.standard_normal(self.nDof)
            t = float(rng.uniform(0.0, 1.0))
            f1 = self.fNl(u, rng.standard_normal(self.nDof), t)
            f2 = self.fNl(u, rng.standard_normal(self.nDof), t)
            if not np.allclose(f1, f2, rtol=1e-12, atol=1e-14):
                return True
        return False

    def __repr__(self):
        return "SecondOrderSystem(name={!r}, nDof={})".format(self.name, self.nDof)

def cholesky(Msym):
    """ Dense Cholesky factorization; raises 'NotPositiveDefinite' on a non-positive pivot.
    """
    A = np.atleast_2d(np.asarray(Msym, dtype=float))
    if A.shape[0] != A.shape[1]:
        raise StructuralError("Cholesky needs a square matrix, got shape {}.".format(A.shape))
    if not np.all(np.isfinite(A)):
        raise NotPositiveDefinite("Matrix contains non-finite entries.")
    try:
        L = scipy.linalg.cholesky(A, lower=True, check_finite=False)
    except np.linalg.LinAlgError as e:
        raise NotPositiveDefinite(str(e))
    if np.any(np.diag(L) <= 0.0):
        raise NotPositiveDefinite("Zero pivot in Cholesky factorization.")
    return CholeskyFactor(L)

def solveSpd(factor, b):
    """ Returns x with (L L^T) x = b.
    """
    return scipy.linalg.cho_solve((factor.L, True), np.asarray(b, dtype=float), check_finite=False)

def _asymmetry(A):
    scale = np.max(np.abs(A))
    if scale == 0.0:
        return 0.0
    return np.max(np.abs(A - A.T)) / scale

def _checkDefinite(name, A):
    try:
        cholesky(A)
    except NotPositiveDefinite as e:
        return MatrixCheck(name, False, "not positive definite: {}".format(e))
    return MatrixCheck(name, True)

def _checkSemiDefinite(name, A):
    n = A.shape[0]
    if not np.any(A):
        return MatrixCheck(name, True, "zero matrix")
    shift = TOL_PSD * np.trace(A) / n
    if shift <= 0.0:
        return MatrixCheck(name, False, "non-positive trace, matrix is indefinite")
    try:
        cholesky(A + shift * np.eye(n))
    except NotPositiveDefinite:
        return MatrixCheck(name, False, "not positive semi-definite")
    return MatrixCheck(name, True)

def validateSystem(sys):
    """ Checks M for positive definiteness and C, K for positive semi-definiteness.
        Shape mismatches and asymmetric input raise 'StructuralError'.
    """
    nDof = sys.nDof
    for name in ("M", "C", "K"):
        A = sys.rawMatrix(name)
        if A.ndim != 2 or A.shape != (nDof, nDof):
            raise StructuralError("{} has shape {}, expected ({n}, {n}).".format(name, A.shape, n=nDof))
        asym = _asymmetry(A)
        if asym > TOL_SYM:
            raise StructuralError("{} is not symmetric (relative asymmetry {:.2e}).".format(name, asym))

    checks = [_checkDefinite("M", sys.M), _checkSemiDefinite("C", sys.C), _checkSemiDefinite("K", sys.K)]

    zero = np.zeros(nDof)
    f0 = sys.fNl(zero, zero, 0.0)
    if f0.shape != (nDof,):
        raise StructuralError("fNl returned shape {}, expected ({},).".format(f0.shape, nDof))
    checks.append(MatrixCheck("fNl", bool(np.all(np.isfinite(f0))), "" if np.all(np.isfinite(f0)) else "fNl(0, 0, 0) is not finite"))

    report = ValidationReport(tuple(checks))
    if not report.ok:
        logger.debug("Validation failed for %r: %s", sys, [c for c in report.checks if not c.passed])
    return report

def pseudoEnergy(sys, u, v):
    """ 1/2 v^T M v + 1/2 u^T K u.
    """
    kinetic = max(float(v @ (sys.M @ v)), 0.0)
    potential = max(float(u @ (sys.K @ u)), 0.0)
    return 0.5 * kinetic + 0.5 * potential

def theta(sys, u, v, t):
    """ Rate at which the pseudo-energy is dissipated: v^T (C v - f_ext + f_nl).
    """
    return float(v @ (sys.C @ v - sys.fExt(t) + sys.fNl(u, v, t)))

def acceleration(sys, u, v, t):
    """ Acceleration from the equation of motion at the state (u, v, t).
    """
    return sys.massSolve(sys.fExt(t) - sys.C @ v - sys.K @ u - sys.fNl(u, v, t))

def initialAcceleration(sys, u0, v0, t0=0.0):
    return acceleration(sys, np.asarray(u0, dtype=float), np.asarray(v0, dtype=float), t0)

def residual(sys, u, v, a, t):
    """ M a + C v + K u + f_nl - f_ext.
    """
    return sys.M @ a + sys.C @ v + sys.K @ u + sys.fNl(u, v, t) - sys.fExt(t)

def nonlinearForceBound(sys, traj):
    """ max_n |L^-1 f_nl(u_n, v_n, t_n)|^2 along a trajectory, L the mass Cholesky factor.
    """
    L = sys.massFactor.L
    bound = 0.0
    for n in range(len(traj.t)):
        f = sys.fNl(traj.u[n], traj.v[n], traj.t[n])
        y = scipy.linalg.solve_triangular(L, f, lower=True, check_finite=False)
        bound = max(bound, float(y @ y))
    return bound

def nonlinearPsiFloor(sys, traj, dt):
    """ psi = 2 dt^2 max |L^-1 f_nl|^2 measured on a pre-pass trajectory.
    """
    return 2.0 * dt * dt * nonlinearForceBound(sys, traj)
