#!/usr/bin/env python
# -*- coding: utf-8 -*-
#
#  License: MIT
#
#  Copyright (c) 2020 Joerg Beckers

__all__ = ["commandmapping", "configfile", "csvoutput", "serviceshutdownhandling", "workerthreads"]
