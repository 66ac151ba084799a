#!/usr/bin/env python
# -*- coding: utf-8 -*-
#
#  Sub-commands of the benchmark application, looked up by name.
#
#  License: MIT
#
#  Copyright (c) 2020 Joerg Beckers

import inspect

class CallbackFunction():
    """ A command function together with its signature.

        Arguments are handed over as a dictionary and checked against the
        signature before the call, so a misspelt option fails with KeyError
        instead of a TypeError deep inside the command.

        cb = CallbackFunction(cmdConverge, "converge")
        cb.invoke({"spec": spec, "runCells": runner})
    """

    def __init__(self, callbackFunction, name=None):
        if not callable(callbackFunction):
            raise TypeError("Command callbacks must be callable, got {!r}.".format(callbackFunction))
        self._function = callbackFunction
        self._name = name or callbackFunction.__name__
        self._accepted = frozenset(inspect.signature(callbackFunction).parameters)

    def getName(self):
        return self._name

    def hasParameter(self, parameterName):
        return parameterName in self._accepted

    def invoke(self, args):
        if not isinstance(args, dict):
            raise TypeError("Command arguments must be a dictionary, got {}.".format(type(args).__name__))
        unknown = sorted(key for key in args if not self.hasParameter(key))
        if unknown:
            raise KeyError("Command '{}' takes no argument(s) {}.".format(self._name, ", ".join(unknown)))
        return self._function(**args)

class Command():
    """ A named sub-command with its one-line help; the help defaults to the
        first docstring line of the callback.
    """

    def __init__(self, callback, name=None, help=""):
        self._callback = CallbackFunction(callback, name)
        self._help = help or (inspect.getdoc(callback) or "").split("\n")[0]

    def getName(self):
        return self._callback.getName()

    def getHelp(self):
        return self._help

    def execute(self, args):
        return self._callback.invoke(args)

class CommandMap(dict):
    """ Registered commands by name.
    """

    def add(self, command):
        name = command.getName()
        if name in self:
            raise KeyError("Command '{}' is already registered.".format(name))
        self[name] = command
