#!/usr/bin/env python
# -*- coding: utf-8 -*-
#
#  Exceptions raised by the integrators, problems and metrics.
#  
#  License: MIT
#  
#  Copyright (c) 2020 Joerg Beckers

class ImexSavError(Exception):
    """ Base class of all errors raised by this package.
    """
    pass

class StructuralError(ImexSavError, ValueError):
    """ Matrices of wrong shape or not symmetric within tolerance.
    """
    pass

class NotPositiveDefinite(ImexSavError):
    """ A Cholesky factorization hit a non-positive pivot.
    """
    pass

class InvalidSystem(ImexSavError):
    """ An integrator was asked to run a system whose validation failed.
    """
    def __init__(self, report):
        self.report = report
        failed = ", ".join(check.name for check in report.checks if not check.passed)
        super().__init__("System failed validation ({}).".format(failed))

class UnsupportedOrder(ImexSavError, ValueError):
    pass

class NonFiniteState(ImexSavError):
    def __init__(self, step, message=None):
        self.step = step
        super().__init__(message or "Non-finite state at step {}.".format(step))

class NonConvergence(ImexSavError):
    """ Newton iteration exceeded its iteration cap or hit a singular Jacobian.
    """
    def __init__(self, lastIterate, residualNorm, iterations, step=None, reason=""):
        self.lastIterate = lastIterate
        self.residualNorm = residualNorm
        self.iterations = iterations
        self.step = step
        self.reason = reason
        msg = "Newton did not converge after {} iterations (residual {:.3e})".format(iterations, residualNorm)
        if step is not None:
            msg += " at step {}".format(step)
        if reason:
            msg += ": " + reason
        super().__init__(msg + ".")

    def atStep(self, step):
        """ Returns a copy of this exception tagged with the time-step index.
        """
        return NonConvergence(self.lastIterate, self.residualNorm, self.iterations, step, self.reason)

class UndefinedNorm(ImexSavError, ValueError):
    pass

class ReferenceMismatch(ImexSavError):
    def __init__(self, difference, threshold, pair):
        self.difference = difference
        self.threshold = threshold
        self.pair = pair
        super().__init__("Reference schemes {} disagree: global difference {:.3e} exceeds {:.1e}.".format(
            "/".join(pair), difference, threshold))
