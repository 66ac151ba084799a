#!/usr/bin/env python
# -*- coding: utf-8 -*-
#
#  Explicit Runge-Kutta stepping of the first-order form y = (u, v), y' = (v, M^-1 (f_ext - C v - K u - f_nl)).
#
#  License: MIT
#
#  Copyright (c) 2020 Joerg Beckers

from dataclasses import dataclass
from typing import Tuple

from .errors import UnsupportedOrder
from .model import acceleration

@dataclass(frozen=True)
class ButcherTableau:
    name: str
    order: int
    a: Tuple[Tuple[float, ...], ...]
    b: Tuple[float, ...]
    c: Tuple[float, ...]

    @property
    def stages(self):
        return len(self.b)

FORWARD_EULER = ButcherTableau("forward-euler", 1, ((),), (1.0,), (0.0,))

EXPLICIT_MIDPOINT = ButcherTableau("explicit-midpoint", 2,
                                   ((), (0.5,)),
                                   (0.0, 1.0),
                                   (0.0, 0.5))

KUTTA3 = ButcherTableau("kutta3", 3,
                        ((), (0.5,), (-1.0, 2.0)),
                        (1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0),
                        (0.0, 0.5, 1.0))

CLASSICAL_RK4 = ButcherTableau("rk4", 4,
                               ((), (0.5,), (0.0, 0.5), (0.0, 0.0, 1.0)),
                               (1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0),
                               (0.0, 0.5, 0.5, 1.0))

TABLEAU_BY_ORDER = {1: FORWARD_EULER, 2: EXPLICIT_MIDPOINT, 3: KUTTA3, 4: CLASSICAL_RK4}

def tableauForOrder(order):
    try:
        return TABLEAU_BY_ORDER[order]
    except KeyError:
        raise UnsupportedOrder("No explicit Runge-Kutta starter of order {}.".format(order))

def rkStep(sys, t, u, v, dt, tableau):
    """ One explicit Runge-Kutta step. Returns (u, v) at t + dt; every stage costs one mass solve.
    """
    ku = []
    kv = []
    for i in range(tableau.stages):
        ui = u.copy()
        vi = v.copy()
        for j, aij in enumerate(tableau.a[i]):
            if aij != 0.0:
                ui = ui + dt * aij * ku[j]
                vi = vi + dt * aij * kv[j]
        ku.append(vi)
        kv.append(acceleration(sys, ui, vi, t + tableau.c[i] * dt))
    uNext = u.copy()
    vNext = v.copy()
    for i, bi in enumerate(tableau.b):
        if bi != 0.0:
            uNext = uNext + dt * bi * ku[i]
            vNext = vNext + dt * bi * kv[i]
    return uNext, vNext
