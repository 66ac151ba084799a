#!/usr/bin/env python
# -*- coding: utf-8 -*-
#
#  License: MIT
#
#  Copyright (c) 2020 Joerg Beckers

import setuptools

with open("README.md", "r") as fh:
    long_description = fh.read()

setuptools.setup(
    name="imexsav",
    version="1.0.0",
    author="Joerg Beckers",
    author_email="pypi@jobe-software.de",
    description="IMEX-BDFk-SAV time integration and benchmarks for nonlinear structural dynamics.",
    license="MIT",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=setuptools.find_packages(exclude=["tests", "tests.*"]),
    install_requires=[
        "numpy>=1.17",
        "scipy>=1.4",
        "tqdm>=4.0",
    ],
    extras_require={
        "test": ["pytest>=6.0"],
    },
    entry_points={
        "console_scripts": ["imexsav=imexsav.cli:main"],
    },
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    python_requires='>=3.8',
)
