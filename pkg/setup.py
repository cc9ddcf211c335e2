#!/usr/bin/env python3
"""
Setup script for the nomlog interpreter.

MIT License
Copyright (c) 2025 nomlog contributors
See LICENSE file for details.
"""
from setuptools import setup

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

setup(
    name="nomlog",
    version="0.1.0",
    author="nomlog contributors",
    author_email="",
    description="An interpreter for nominal logic programs with names, abstraction and freshness",
    long_description=long_description,
    long_description_content_type="text/markdown",
    url="",
    py_modules=[
        "config", "corpus", "elaborator", "engine", "formulas", "frontend", "main", "oracle",
        "solver", "sorts", "syntax", "terms", "typecheck", "utils",
    ],
    data_files=[("programs", [
        "programs/lambda.apl", "programs/lambda.batch",
        "programs/refs.apl", "programs/refs.batch",
        "programs/deptypes.apl", "programs/deptypes.batch",
        "programs/linear.apl", "programs/linear.batch",
        "programs/pi.apl", "programs/pi.batch",
        "programs/dyadic.apl", "programs/dyadic.batch",
        "programs/cbv.apl", "programs/cbv.batch",
        "programs/incomplete.apl", "programs/desk.apl",
    ])],
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Topic :: Software Development :: Interpreters",
    ],
    python_requires=">=3.8",
    install_requires=[
        "lark>=1.1.0",
        "pyyaml>=6.0",
    ],
    extras_require={
        "test": [
            "pytest>=7.0",
            "hypothesis>=6.0",
        ],
    },
    entry_points={
        "console_scripts": [
            "nomlog=main:main",
        ],
    },
)
