"""Shared fixtures: tiny datasets and networks reused across the suite."""

import numpy as np
import pytest

from gibbsnn.data import synth_blobs, split
from gibbsnn.network import Network
from gibbsnn.presets import mlp


@pytest.fixture(scope="session")
def blob_data():
    """Small two-class blob set with known irrelevant dimensions."""
    ds = synth_blobs(400, 6, classes=2, irrelevant_fraction=0.5, seed=3)
    return split(ds, (0.75, 0.25), seed=1)


@pytest.fixture(scope="session")
def tiny_net():
    spec, _ = mlp(6, 2, hidden=(5,), activation="mmelu")
    return Network(spec)
