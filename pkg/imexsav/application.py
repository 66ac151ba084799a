#!/usr/bin/env python
# -*- coding: utf-8 -*-
#
#  Main loop of the benchmark application: command dispatch and the threaded sweep runner.
#
#  License: MIT
#
#  Copyright (c) 2020 Joerg Beckers

import logging
import queue
import threading

from tqdm import tqdm

from .utils import serviceshutdownhandling as ServiceShutdownHandling
from .utils import commandmapping as CommandMapping
from .utils import workerthreads as WorkerThreads

logger = logging.getLogger(__name__)

class BenchmarkApplication():
    """ This class holds the registered sub-commands and runs sweep cells on worker threads.
    """

    def __init__(self, jobs=1, sharedDict=None, progress=False):
        if jobs < 1:
            raise ValueError("'jobs' must be 1 or greater.")
        self._jobs = jobs
        self._progress = progress

        # Sub-commands by name.
        self._cmdMap = CommandMapping.CommandMap()

        # Shared between the cell handlers of a sweep (e.g. cached references).
        if not sharedDict is None:
            self._sharedDict = sharedDict
        else:
            self._sharedDict = dict()

        self._shutdownFlag = threading.Event()
        self._dataLock = threading.Lock()

    def addCommand(self, callback, name=None, help=""):
        """ Registers a sub-command. Returns the number of registered commands.
        """
        self._cmdMap.add(CommandMapping.Command(callback, name, help))
        return len(self._cmdMap)

    def getCommand(self, name):
        try:
            return self._cmdMap[name]
        except KeyError:
            raise KeyError("Unknown command '{}'.".format(name))

    def commandNames(self):
        return list(self._cmdMap.keys())

    def getSharedDict(self):
        return self._sharedDict

    def getShutdownFlag(self):
        return self._shutdownFlag

    def getAccessLock(self):
        return self._dataLock

    def runCells(self, cellHandler, cells, description=None):
        """ Runs every cell through 'cellHandler' on up to 'jobs' threads and returns the
            results in cell order. The first exception raised by a cell is re-raised after
            all workers stopped. On shutdown the workers finish their current cell and
            SweepShutdownException propagates with the partial results attached.
        """
        if not isinstance(cellHandler, WorkerThreads.CellHandlerBase):
            raise TypeError("Your 'cellHandler' must be derived from 'WorkerThreads.CellHandlerBase'!")
        cells = list(cells)
        cellHandler.setSharedDict(self._sharedDict)
        cellHandler.setShutdownFlag(self._shutdownFlag)
        cellHandler.setAccessLock(self._dataLock)

        cellQueue = queue.Queue()
        for index, cell in enumerate(cells):
            cellQueue.put((index, cell))
        results = dict()
        workers = [WorkerThreads.SweepWorkerThread(self._shutdownFlag, self._dataLock, cellHandler, cellQueue, results)
                   for _ in range(min(self._jobs, max(len(cells), 1)))]

        bar = tqdm(total=len(cells), desc=description, disable=not self._progress, leave=False)
        try:
            for worker in workers:
                worker.start()
            done = 0
            while any(worker.is_alive() for worker in workers):
                for worker in workers:
                    worker.join(0.1)
                with self._dataLock:
                    finished = len(results)
                bar.update(finished - done)
                done = finished
        except ServiceShutdownHandling.SweepShutdownException as e:
            # Let the workers finish the cell they are on.
            self._shutdownFlag.set()
            for worker in workers:
                worker.join()
            e.partialResults = [results.get(i) for i in range(len(cells))]
            raise
        finally:
            bar.close()

        ordered = [results.get(i) for i in range(len(cells))]
        for result in ordered:
            if isinstance(result, Exception):
                raise result
        return ordered

    def run(self, name, args):
        """ Executes the named command with signal handling installed.
        """
        command = self.getCommand(name)
        installed = ServiceShutdownHandling.initSweepShutdownHandling()
        try:
            logger.info("Running '%s' on %d worker thread(s)", name, self._jobs)
            return command.execute(args)
        finally:
            if installed:
                ServiceShutdownHandling.restoreDefaultHandling()
