#!/usr/bin/env python
# -*- coding: utf-8 -*-
#
#  Worker threads that drain a queue of independent sweep cells.
#
#  License: MIT
#
#  Copyright (c) 2020 Joerg Beckers

import logging
import queue
import threading
from abc import ABC, abstractmethod

logger = logging.getLogger(__name__)

class CellHandlerBase(ABC):
    """ This abstract class describes the basic structure of a sweep cell handler.
        Derive this class and implement the 'prepare' and 'invoke' methods.
        'prepare' is called once by every worker before it takes its first cell and
        'invoke' is called for every cell. All handlers of one sweep share the same
        dictionary; writes to it must hold the access lock.
    """
    def __init__(self):
        self.sharedDict = dict()
        self.shutdownFlag = threading.Event()
        self.accessLock = threading.Lock()
        return super().__init__()

    def setSharedDict(self, sharedDict):
        self.sharedDict = sharedDict

    def setShutdownFlag(self, shutdownFlag):
        """ Supplies the handler with the application's shutdown flag.
            Long-running 'invoke' implementations should check it between runs.
        """
        self.shutdownFlag = shutdownFlag

    def setAccessLock(self, accessLock):
        self.accessLock = accessLock

    def aborted(self):
        return self.shutdownFlag.is_set()

    @abstractmethod
    def prepare(self):
        pass

    @abstractmethod
    def invoke(self, cell):
        """ Runs one cell and returns its result.
        """
        pass

class SweepWorkerThread(threading.Thread):
    """ Takes (index, cell) pairs from 'cellQueue' until it is empty or 'shutdownEvent'
        is set, and stores each result (or the exception it raised) under its index.
    """
    def __init__(self, shutdownEvent, accessLock, cellHandler, cellQueue, results):
        threading.Thread.__init__(self, daemon=True)
        if not isinstance(cellHandler, CellHandlerBase):
            raise TypeError("'cellHandler' must be a derivative of 'CellHandlerBase'.")
        self.shutdownEvent = shutdownEvent
        self.accessLock = accessLock
        self.cellHandler = cellHandler
        self.cellQueue = cellQueue
        self.results = results
        return

    def run(self):
        with self.accessLock:
            self.cellHandler.prepare()

        while not self.shutdownEvent.is_set():
            try:
                index, cell = self.cellQueue.get_nowait()
            except queue.Empty:
                break
            try:
                result = self.cellHandler.invoke(cell)
            except Exception as e:
                logger.error("Cell %d (%r) failed: %s", index, cell, e)
                result = e
            with self.accessLock:
                self.results[index] = result
            self.cellQueue.task_done()
        return
