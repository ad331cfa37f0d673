"""Pytest configuration and fixtures."""

import pytest
import sys
from pathlib import Path

import numpy as np

# Add src directory to path for imports
src_path = Path(__file__).parent.parent / 'src'
sys.path.insert(0, str(src_path))

from zak_dd_sim.grid import DDGrid  # noqa: E402


@pytest.fixture
def rng():
    """Create a seeded random generator."""
    return np.random.default_rng(20240611)


@pytest.fixture
def small_grid():
    """Create an 8 x 8 grid at the default oversampling."""
    return DDGrid(M=8, N=8)


@pytest.fixture
def link_grid():
    """Create the 16 x 16 grid used by the link-level experiments."""
    return DDGrid(M=16, N=16)
