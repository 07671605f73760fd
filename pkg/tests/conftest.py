"""Shared fixtures for the stable_convolve test suite."""

import json

import numpy as np
import pytest

from stable_convolve.spectral import burgers_modes, power_law_modes
from stable_convolve.types import GridSpec, ModeEntry, ModeSet, StableLaw


@pytest.fixture
def law():
    return StableLaw(alpha=1.5)


@pytest.fixture
def small_modes():
    """Four modes gamma_k = k^2, beta_k = k^-2.5."""
    return power_law_modes(4, beta_exp=1.25)


@pytest.fixture
def single_mode():
    return ModeSet(modes=[ModeEntry(k=1, gamma=1.0, beta=1.0)])


@pytest.fixture
def burgers8():
    return burgers_modes(8, beta_exp=1.25)


@pytest.fixture
def unit_grid():
    return GridSpec(horizon=1.0, n_steps=256)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def write_config(tmp_path):
    """Write a config document to tmp_path and return its path."""

    def _write(document, name="config.json"):
        path = tmp_path / name
        path.write_text(json.dumps(document), encoding="utf-8")
        return path

    return _write
