"""Shared fixtures: the verified symmetry catalog and a small converged
solver state, both expensive enough to build once per session."""

import time

import numpy as np
import pytest

from zollforge import SolverConfig, SphereFunction, hamilton_iterate
from zollforge.symmetry import build_catalog


@pytest.fixture(scope="session")
def catalog_build():
    """(entries, wall-clock seconds) of a full catalog build."""
    t0 = time.perf_counter()
    entries = build_catalog()
    return entries, time.perf_counter() - t0


@pytest.fixture(scope="session")
def quick_state():
    """Converged zonal degree-3 state at l_max 8, t = 0.01."""
    f = SphereFunction.harmonic(3, 0, l_max=8)
    config = SolverConfig(l_max=8, t_values=(0.01,), n_angles=128)
    state = hamilton_iterate(f, 0.01, config)
    assert state.converged, f"fixture state failed to converge: {state.residual_h:.3e}"
    return state
