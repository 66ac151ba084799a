#!/usr/bin/env python
# -*- coding: utf-8 -*-
#
#  imexsav - Example: the simple pendulum at a tenth of its period with and without SAV.
#
#  License: MIT
#
#  Copyright (c) 2020 Joerg Beckers

import argparse
import logging

import numpy as np

from imexsav import makeProblem, SchemeConfig, runScheme
from imexsav.metrics import periodElongationAmplitudeDecay

def main():
    cmdLineParser = argparse.ArgumentParser(prog="example1", usage="%(prog)s [options]")
    cmdLineParser.add_argument("--fraction", help="dt = T1 / fraction", type=float, default=100.0)
    cmdLineParser.add_argument("--k", help="BDF order", type=int, default=5)
    args = cmdLineParser.parse_args()

    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")

    pendulum = makeProblem("pendulum")
    T1 = pendulum.period
    dt = T1 / args.fraction

    for schemeId in ("imex-bdf{}-sav".format(args.k), "imex-bdf{}".format(args.k)):
        traj = runScheme(pendulum, SchemeConfig(schemeId, dt))
        if traj.divergent:
            print("{:>16}: diverged at step {}".format(schemeId, traj.divergedAtStep))
            continue
        pead = periodElongationAmplitudeDecay(traj, T1, pendulum.extras["thetaMax"])
        energies = traj.pseudoEnergies(pendulum.system)
        if pead.valid:
            print("{:>16}: PE/1.25T1 = {:+.4f} %, AD/theta_max = {:+.4f} %, max Psi = {:.4f}".format(
                schemeId, pead.pePct, pead.adPct, np.max(energies)))
        else:
            print("{:>16}: oscillation about equilibrium lost".format(schemeId))

if __name__ == "__main__":
    main()
