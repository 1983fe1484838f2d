"""Generalized Moran process on undirected graphs: simulation, exact solvers and bounds."""

import os

import numba

if "NUMBA_THREADING_LAYER" not in os.environ:
    # prefer OpenMP; the system TBB is often too old and only produces a warning
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

__version__ = "0.1.0"
