"""Finite-depth laboratory for two Schoenflies counterexample domains."""

import os

# the bundled TBB is too old for numba and triggers a warning on every parallel call
os.environ.setdefault("NUMBA_THREADING_LAYER", "omp")

__version__ = "0.1.0"
