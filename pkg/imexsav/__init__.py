#!/usr/bin/env python
# -*- coding: utf-8 -*-
#
#  License: MIT
#
#  Copyright (c) 2020 Joerg Beckers

__all__ = ["model", "trajectory", "bdfsav", "rungekutta", "baselines", "schemes", "problems", "reference",
           "metrics", "lteoracle", "commands", "application", "cli", "errors"]

__version__ = "1.0.0"

from .model import SecondOrderSystem, validateSystem, pseudoEnergy, theta, acceleration, initialAcceleration
from .bdfsav import SavRunConfig, integrateSav, integrateImexBdf, bdfCoefficients, betaParameter
from .trajectory import State, SavState, Trajectory
from .baselines import (NewtonConfig, integrateNewmarkTr, integrateGeneralizedAlpha, integrateBathe,
                        integrateCentralDifference, integrateRk4)
from .problems import BenchmarkProblem, makeProblem, PROBLEMS
from .schemes import SchemeConfig, runScheme
from .application import BenchmarkApplication
