#!/usr/bin/env python
# -*- coding: utf-8 -*-
#
#  Optional key = value run files, turned into command-line flags so that
#  flags given on the command line always win.
#
#  License: MIT
#
#  Copyright (c) 2020 Joerg Beckers

import configparser
import logging

logger = logging.getLogger(__name__)

SECTION = "run"

_TRUE = ("1", "true", "yes", "on")
_FALSE = ("0", "false", "no", "off", "")

def readConfigFile(path):
    """ Reads 'key = value' lines ('#' comments) into a dict of strings. Keys are
        long flag names without the leading dashes.
    """
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"),
                                       inline_comment_prefixes=("#",))
    parser.optionxform = str
    with open(path, "r") as fh:
        text = fh.read()
    try:
        parser.read_string("[{}]\n{}".format(SECTION, text), source=str(path))
    except configparser.Error as e:
        raise ValueError("Cannot parse config file '{}': {}".format(path, e))
    return dict(parser.items(SECTION))

def _givenOnCommandLine(key, argv):
    flag = "--" + key
    return any(token == flag or token.startswith(flag + "=") for token in argv)

def configArguments(values, argv, listKeys=(), flagKeys=()):
    """ Flag tokens for every file value whose flag is absent from 'argv'.
        List keys expand 'a, b' into one flag per item; flag keys take a boolean.
    """
    tokens = []
    for key, raw in values.items():
        key = key.strip().lstrip("-")
        if _givenOnCommandLine(key, argv):
            logger.debug("Config value '%s' overridden on the command line", key)
            continue
        value = raw.strip()
        if key in flagKeys:
            if value.lower() in _TRUE:
                tokens.append("--" + key)
            elif value.lower() not in _FALSE:
                raise ValueError("Config key '{}' expects a boolean, got '{}'.".format(key, value))
        elif key in listKeys:
            for item in value.split(","):
                if item.strip():
                    tokens.extend(["--" + key, item.strip()])
        else:
            tokens.extend(["--" + key, value])
    return tokens
