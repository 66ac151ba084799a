#!/usr/bin/env python
# -*- coding: utf-8 -*-
#
#  CSV rows with 17 significant digits and the JSON run summary.
#
#  License: MIT
#
#  Copyright (c) 2020 Joerg Beckers

import csv
import json
import math
import sys
from contextlib import contextmanager

import numpy as np

def formatValue(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.17g" % float(value)
    return str(value)

@contextmanager
def _openOutput(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh

def writeRows(path, fieldnames, rows):
    """ Writes the header and every row; missing columns stay empty. 'path' None means stdout.
    """
    with _openOutput(path) as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames, extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({key: formatValue(row.get(key)) for key in fieldnames})
    return len(rows)

def jsonSafe(value):
    """ Replaces NaN and infinities by None and numpy scalars/arrays by plain Python values.
    """
    if isinstance(value, dict):
        return {str(k): jsonSafe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonSafe(v) for v in value]
    if isinstance(value, np.ndarray):
        return jsonSafe(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value

def summaryPath(out):
    return None if out is None or out == "-" else str(out) + ".summary.json"

def writeSummary(out, summary):
    """ Writes the summary next to the CSV, or to stderr when the CSV went to stdout.
    """
    text = json.dumps(jsonSafe(summary), indent=2, sort_keys=True)
    path = summaryPath(out)
    if path is None:
        sys.stderr.write(text + "\n")
    else:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    return path
