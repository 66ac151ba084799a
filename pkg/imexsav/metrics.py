#!/usr/bin/env python
# -*- coding: utf-8 -*-
#
#  Error measures: relative global norms, instantaneous errors, period elongation and
#  amplitude decay, convergence slopes and the psi-plateau threshold.
#
#  License: MIT
#
#  Copyright (c) 2020 Joerg Beckers

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
import scipy.stats

from .errors import UndefinedNorm

# Errors below this are treated as round-off when selecting points for a slope fit.
ROUND_OFF_FLOOR = 1e-12

SATURATION_CEILING = 1e-2

def _pair(z, zRef):
    z = np.asarray(z, dtype=float)
    zRef = np.asarray(zRef, dtype=float)
    if z.shape != zRef.shape:
        raise ValueError("Series shapes differ: {} vs {}.".format(z.shape, zRef.shape))
    return z, zRef

def globalErrorNorm(z, zRef):
    """ sqrt(sum (z_n - zRef_n)^2 / sum zRef_n^2) over all samples and DOFs.
    """
    z, zRef = _pair(z, zRef)
    denominator = float(np.sum(zRef * zRef))
    if denominator == 0.0:
        raise UndefinedNorm("Reference series is identically zero; relative norm undefined.")
    return math.sqrt(float(np.sum((z - zRef) ** 2)) / denominator)

def instantaneousErrors(Z, ZRef, span=None):
    """ Per-sample error eps_n = max_i |z_n^i - zRef_n^i| / (max zRef - min zRef).

        'span' replaces max zRef - min zRef when the reference is known between the samples.
        Returns (epsSeries, epsMax).
    """
    Z, ZRef = _pair(Z, ZRef)
    if Z.ndim == 1:
        Z = Z[:, None]
        ZRef = ZRef[:, None]
    if span is None:
        span = float(np.max(ZRef) - np.min(ZRef))
    if span == 0.0:
        raise UndefinedNorm("Reference series is constant; instantaneous error undefined.")
    series = np.max(np.abs(Z - ZRef), axis=1) / span
    return series, float(np.max(series)) if series.size else 0.0

@dataclass(frozen=True)
class PeadReport:
    """ Period elongation and amplitude decay at one peak. With valid = False
        the response lost its oscillation about equilibrium and the values are None.
    """
    valid: bool
    pe: Optional[float] = None
    ad: Optional[float] = None
    pePct: Optional[float] = None
    adPct: Optional[float] = None
    peakTime: Optional[float] = None
    peakValue: Optional[float] = None

INVALID_PEAD = PeadReport(False)

def _localMaxima(u):
    inner = np.arange(1, len(u) - 1)
    mask = (u[inner] >= u[inner - 1]) & (u[inner] > u[inner + 1])
    return inner[mask]

def periodElongationAmplitudeDecay(traj, exactPeriod, exactPeak, cycleIndex=1, exactPeakTime=None,
                                   dof=0, rollover=math.pi):
    """ PE = numerical - exact peak time, AD = exact - numerical peak value, both at the
        discrete maximum nearest the exact peak (by default (cycleIndex + 1/4) periods after
        an upward zero crossing at t = 0), refined by a parabola through the three samples
        around it. Percentages are relative to the exact peak time and value.
    """
    if exactPeakTime is None:
        exactPeakTime = (cycleIndex + 0.25) * exactPeriod
    t = np.asarray(traj.t, dtype=float)
    u = np.asarray(traj.u, dtype=float)
    u = u[:, dof] if u.ndim == 2 else u
    if traj.divergent or len(t) < 3 or not np.all(np.isfinite(u)):
        return INVALID_PEAD
    if rollover is not None and np.any(np.abs(u) > rollover):
        return INVALID_PEAD
    if t[-1] < exactPeakTime:
        return INVALID_PEAD

    peaks = _localMaxima(u)
    if peaks.size == 0:
        return INVALID_PEAD
    i = int(peaks[np.argmin(np.abs(t[peaks] - exactPeakTime))])
    if abs(t[i] - exactPeakTime) > 0.5 * exactPeriod:
        return INVALID_PEAD

    dt = t[i + 1] - t[i]
    curvature = u[i - 1] - 2.0 * u[i] + u[i + 1]
    offset = 0.5 * (u[i - 1] - u[i + 1]) / curvature if curvature != 0.0 else 0.0
    peakTime = t[i] + offset * dt
    peakValue = u[i] - 0.25 * (u[i - 1] - u[i + 1]) * offset

    pe = peakTime - exactPeakTime
    ad = exactPeak - peakValue
    return PeadReport(True, pe, ad, 100.0 * pe / exactPeakTime, 100.0 * ad / exactPeak, peakTime, peakValue)

class SlopeFit(NamedTuple):
    slope: float
    intercept: float
    rSquared: float

def convergenceSlope(dts, errors):
    """ Least-squares line through (log dt, log error).
    """
    dts = np.asarray(dts, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if dts.shape != errors.shape:
        raise ValueError("dts and errors differ in length.")
    if dts.size < 3:
        raise ValueError("A slope fit needs at least 3 points, got {}.".format(dts.size))
    if not (np.all(dts > 0.0) and np.all(errors > 0.0) and np.all(np.isfinite(errors))):
        raise ValueError("Time-steps and errors must be positive and finite for a log-log fit.")
    fit = scipy.stats.linregress(np.log(dts), np.log(errors))
    return SlopeFit(float(fit.slope), float(fit.intercept), float(fit.rvalue ** 2))

def asymptoticWindow(dts, errors, floor=0.0, ceiling=SATURATION_CEILING):
    """ Points whose error sits above 10x the reference uncertainty (or round-off) and below
        the saturation ceiling. Non-finite errors are dropped.
    """
    dts = np.asarray(dts, dtype=float)
    errors = np.asarray(errors, dtype=float)
    lower = 10.0 * max(floor, ROUND_OFF_FLOOR)
    keep = np.isfinite(errors) & (errors > lower) & (errors < ceiling)
    return dts[keep], errors[keep]

def plateauThreshold(ratios, errors, tolerance=0.1):
    """ Smallest ratio from which on all errors stay within 'tolerance' of each other
        (max/min - 1 < tolerance). None when even the last point is not finite.
    """
    order = np.argsort(np.asarray(ratios, dtype=float))
    ratios = np.asarray(ratios, dtype=float)[order]
    errors = np.asarray(errors, dtype=float)[order]
    threshold = None
    hi = lo = None
    for i in range(len(ratios) - 1, -1, -1):
        e = errors[i]
        if not (np.isfinite(e) and e > 0.0):
            break
        hi = e if hi is None else max(hi, e)
        lo = e if lo is None else min(lo, e)
        if hi / lo - 1.0 >= tolerance:
            break
        threshold = float(ratios[i])
    return threshold

@dataclass(frozen=True)
class ErrorReport:
    globalNormU: float
    globalNormV: float
    globalNormA: float
    epsMaxU: float
    epsMaxV: float
    epsMaxA: float
    epsSeries: np.ndarray
    avgNewtonIters: float
    wallTime: float
    linearSolves: int
    nSteps: int
    divergent: bool

def _safe(fn, *args):
    try:
        return fn(*args)
    except UndefinedNorm:
        return math.nan

def errorReport(traj, ref, wallTime=math.nan):
    """ Compares a trajectory with reference data sampled on the same grid. A run that
        diverged (or stopped early) gets infinite errors.
    """
    if traj.divergent or len(traj.t) != len(ref.t):
        inf = math.inf
        return ErrorReport(inf, inf, inf, inf, inf, inf, np.full(len(traj.t), np.nan), traj.avgNewtonIterations,
                           wallTime, traj.linearSolves, traj.nSteps, True)
    if not np.allclose(traj.t, ref.t, rtol=0.0, atol=1e-9 * max(1.0, abs(float(ref.t[-1])))):
        raise ValueError("Trajectory and reference are sampled on different grids.")
    spanU, spanV, spanA = ref.spans or (None, None, None)
    seriesU, epsU = instantaneousErrors(traj.u, ref.u, spanU)
    return ErrorReport(globalNormU=globalErrorNorm(traj.u, ref.u),
                       globalNormV=_safe(globalErrorNorm, traj.v, ref.v),
                       globalNormA=_safe(globalErrorNorm, traj.a, ref.a),
                       epsMaxU=epsU,
                       epsMaxV=_safe(lambda z, r: instantaneousErrors(z, r, spanV)[1], traj.v, ref.v),
                       epsMaxA=_safe(lambda z, r: instantaneousErrors(z, r, spanA)[1], traj.a, ref.a),
                       epsSeries=seriesU,
                       avgNewtonIters=traj.avgNewtonIterations,
                       wallTime=wallTime,
                       linearSolves=traj.linearSolves,
                       nSteps=traj.nSteps,
                       divergent=False)
