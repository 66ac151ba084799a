#!/usr/bin/env python
# -*- coding: utf-8 -*-
#
#  Command-line front end: imexsav {converge, psi-sweep, stability, benchmark, lte-check}.
#
#  License: MIT
#
#  Copyright (c) 2020 Joerg Beckers

import argparse
import logging
import sys

from .application import BenchmarkApplication
from .commands import (RunSpec, cmdConverge, cmdPsiSweep, cmdStability, cmdBenchmark, cmdLteCheck,
                       CONVERGE_FIELDS, PSI_SWEEP_FIELDS, STABILITY_FIELDS, BENCHMARK_FIELDS, LTE_FIELDS, LTE_TOLERANCE,
                       PLATEAU_TOLERANCE)
from .bdfsav import STARTERS
from .errors import ImexSavError
from .problems import PROBLEMS
from .reference import DEFAULT_PAIR, DEFAULT_TOLERANCE, REFERENCE_SOURCES
from .schemes import PSI_SOURCES, RECOMMENDED_PSI
from .utils.configfile import readConfigFile, configArguments
from .utils.csvoutput import writeRows, writeSummary
from .utils.serviceshutdownhandling import SweepShutdownException

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED_RUNS = 1
EXIT_ERROR = 2
EXIT_INTERRUPTED = 130

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

COMMANDS = {
    "converge": (cmdConverge, CONVERGE_FIELDS, "global errors per (scheme, dt) and fitted convergence slopes"),
    "psi-sweep": (cmdPsiSweep, PSI_SWEEP_FIELDS, "global errors against psi/Psi_max at fixed dt"),
    "stability": (cmdStability, STABILITY_FIELDS, "boundedness and Phi monotonicity over many decades of dt"),
    "benchmark": (cmdBenchmark, BENCHMARK_FIELDS, "cost/accuracy table with every scheme at n_sub * dt"),
    "lte-check": (cmdLteCheck, LTE_FIELDS, "predicted against measured leading truncation-error coefficients"),
}

# Config keys that may carry comma-separated lists, and boolean switches.
LIST_KEYS = ("scheme", "k", "dt", "psi-ratio", "param")
FLAG_KEYS = ("progress",)

def _keyValue(text):
    key, sep, value = text.partition("=")
    if not sep or not key.strip():
        raise argparse.ArgumentTypeError("expected KEY=VALUE, got '{}'".format(text))
    try:
        return key.strip(), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError("value of '{}' must be a number".format(key.strip()))

def _dtRange(text):
    parts = [p for p in text.replace(",", " ").split() if p]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected LO,HI,N, got '{}'".format(text))
    try:
        return float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError("expected LO,HI,N, got '{}'".format(text))

def _pair(text):
    parts = tuple(p.strip() for p in text.split(",") if p.strip())
    if len(parts) != 2 or any(p not in REFERENCE_SOURCES for p in parts):
        raise argparse.ArgumentTypeError("expected two of {} separated by a comma".format(", ".join(REFERENCE_SOURCES)))
    return parts

def _commonArguments():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="key = value file; flags given here win")
    common.add_argument("--problem", default="linear-sdof", choices=sorted(PROBLEMS))
    common.add_argument("--param", action="append", type=_keyValue, default=[], metavar="KEY=VALUE",
                        help="problem parameter override (repeatable), e.g. zeta=0.1")
    common.add_argument("--scheme", action="append", default=[], metavar="ID",
                        help="imex-bdf{k}-sav, imex-bdf{k}, newmark-tr, generalized-alpha, bathe, "
                             "central-difference, cd-park-underwood, rk4 (repeatable)")
    common.add_argument("--k", action="append", type=int, default=[], help="adds imex-bdf{k}-sav (repeatable)")
    common.add_argument("--dt", action="append", type=float, default=[], help="time-step (repeatable)")
    common.add_argument("--dt-range", type=_dtRange, metavar="LO,HI,N", help="N log-spaced time-steps")
    common.add_argument("--psi", type=float, help="SAV floor; default 100 x Psi_max estimate")
    common.add_argument("--psi-source", choices=PSI_SOURCES, default=RECOMMENDED_PSI,
                        help="stability: psi without --psi, 100 x Psi_max or 2 dt^2 max|L^-1 f_nl|^2 from a pre-pass")
    common.add_argument("--starter", choices=STARTERS, help="IMEX-BDF starting states; default per problem")
    common.add_argument("--psi-ratio", action="append", type=float, default=[],
                        help="psi/Psi_max values for psi-sweep (repeatable)")
    common.add_argument("--t-end", type=float, help="run duration")
    common.add_argument("--steps", type=int, help="stability: steps per run (t_end = steps * dt)")
    common.add_argument("--out", metavar="PATH", help="CSV file (default stdout); summary goes to PATH.summary.json")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--jobs", type=int, default=1, help="worker threads")
    common.add_argument("--reference-pair", type=_pair, default=DEFAULT_PAIR, metavar="A,B")
    common.add_argument("--reference-dt", type=float, help="fine step of the reference runs")
    common.add_argument("--reference-tol", type=float, default=DEFAULT_TOLERANCE)
    common.add_argument("--period-fraction", type=float, help="benchmark: dt = period / N")
    common.add_argument("--rho-inf", type=float, default=0.0, help="generalized-alpha spectral radius")
    common.add_argument("--bathe-gamma", type=float, default=0.5, help="Bathe splitting ratio")
    common.add_argument("--eps-tol", type=float, default=1e-7, help="SAV recovery threshold")
    common.add_argument("--newton-tol", type=float, default=1e-7)
    common.add_argument("--random-sets", type=int, default=0, help="lte-check: extra random parameter sets")
    common.add_argument("--lte-tolerance", type=float, default=LTE_TOLERANCE,
                        help="lte-check: allowed |measured/predicted - 1|")
    common.add_argument("--plateau-tolerance", type=float, default=PLATEAU_TOLERANCE,
                        help="psi-sweep: allowed relative spread of the error plateau")
    common.add_argument("--progress", action="store_true", help="show a progress bar")
    common.add_argument("-v", "--verbose", action="count", default=0)
    return common

def buildParser():
    parser = argparse.ArgumentParser(prog="imexsav",
                                     description="IMEX-BDFk-SAV time integration benchmarks for structural dynamics.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True
    common = _commonArguments()
    for name, (_, fields, help) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help, description=help,
                       epilog="CSV columns: " + ", ".join(fields))
    return parser

def configureLogging(verbosity):
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr)

def specFromArgs(args):
    return RunSpec(problem=args.problem,
                   params=dict(args.param),
                   schemes=tuple(args.scheme),
                   orders=tuple(args.k),
                   dts=tuple(args.dt),
                   dtRange=args.dt_range,
                   psi=args.psi,
                   psiRatios=tuple(args.psi_ratio),
                   tEnd=args.t_end,
                   steps=args.steps,
                   out=args.out,
                   seed=args.seed,
                   jobs=args.jobs,
                   referencePair=tuple(args.reference_pair),
                   referenceDt=args.reference_dt,
                   referenceTol=args.reference_tol,
                   periodFraction=args.period_fraction,
                   rhoInf=args.rho_inf,
                   batheGamma=args.bathe_gamma,
                   epsTol=args.eps_tol,
                   newtonTol=args.newton_tol,
                   randomSets=args.random_sets,
                   progress=args.progress,
                   starter=args.starter,
                   psiSource=args.psi_source,
                   lteTolerance=args.lte_tolerance,
                   plateauTolerance=args.plateau_tolerance)

def parseArguments(argv):
    parser = buildParser()
    args = parser.parse_args(argv)
    if args.config:
        extra = configArguments(readConfigFile(args.config), argv, LIST_KEYS, FLAG_KEYS)
        args = parser.parse_args([argv[0]] + extra + list(argv[1:]))
    return args

def createApplication(jobs=1, progress=False):
    app = BenchmarkApplication(jobs=jobs, progress=progress)
    for name, (callback, _, help) in COMMANDS.items():
        app.addCommand(callback, name, help)
    return app

def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parseArguments(argv)
    configureLogging(args.verbose)

    fields = COMMANDS[args.command][1]
    try:
        spec = specFromArgs(args)
        app = createApplication(spec.jobs, spec.progress)
        result = app.run(args.command, {"spec": spec, "runCells": app.runCells})
    except SweepShutdownException as e:
        rows = [r for r in getattr(e, "partialResults", []) if isinstance(r, dict)]
        writeRows(args.out, fields, rows)
        logger.warning("Interrupted; wrote %d completed rows", len(rows))
        return EXIT_INTERRUPTED
    except ImexSavError as e:
        logger.error("%s failed: %s", args.command, e)
        return EXIT_ERROR
    except (ValueError, KeyError) as e:
        logger.error("Invalid arguments: %s", e)
        return EXIT_ERROR

    writeRows(args.out, result.fieldnames, result.rows)
    path = writeSummary(args.out, result.summary)
    logger.info("%s: %d rows%s", args.command, len(result.rows), "" if path is None else ", summary in " + path)
    if not result.ok:
        logger.warning("%s: some runs failed or missed their tolerance; see the CSV and summary", args.command)
        return EXIT_FAILED_RUNS
    return EXIT_OK

if __name__ == "__main__":
    sys.exit(main())
