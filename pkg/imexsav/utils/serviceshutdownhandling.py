#!/usr/bin/env python
# -*- coding: utf-8 -*-
#
#  Encapsulates signal handling for a graceful stop of a running sweep.
#
#  License: MIT
#
#  Copyright (c) 2020 Joerg Beckers

import signal
import threading

class SweepShutdownException(Exception):
    """ Raised in the main thread on SIGINT or SIGTERM.
    """
    pass

def sweepShutdownHandler(signum, frame):
    raise SweepShutdownException("Received signal {}.".format(signum))

def initSweepShutdownHandling():
    """ Installs the handler for SIGINT and SIGTERM. Returns False when called outside
        the main thread, where signal handlers cannot be installed.
    """
    if threading.current_thread() is not threading.main_thread():
        return False
    signal.signal(signal.SIGTERM, sweepShutdownHandler)
    signal.signal(signal.SIGINT, sweepShutdownHandler)
    return True

def restoreDefaultHandling():
    if threading.current_thread() is not threading.main_thread():
        return
    signal.signal(signal.SIGTERM, signal.SIG_DFL)
    signal.signal(signal.SIGINT, signal.default_int_handler)
