"""Seeded random models and the worked example shared by the test modules."""

from pathlib import Path

import numpy as np

from musweep.cli import load_model
from musweep.plant import StateSpaceModel

DATA = Path(__file__).resolve().parent.parent / "data"
EXAMPLE_FILE = DATA / "example_model.json"


def example_model():
    return load_model(EXAMPLE_FILE)[0]


def random_stable_model(seed, n_states=4, n=2):
    """Random real model whose ``A`` has every eigenvalue left of ``-0.2``."""
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n_states, n_states))
    shift = np.max(np.linalg.eigvals(a).real) + 0.2 + rng.uniform()
    a -= shift * np.eye(n_states)
    return StateSpaceModel(a, rng.normal(size=(n_states, n)), rng.normal(size=(n, n_states)))


def random_complex(rng, shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def random_box(rng, n=2):
    """Random box nested in ``[-1, 1]^n``; some edges are degenerate on purpose."""
    x = np.sort(rng.uniform(-1.0, 1.0, size=(n, 2)), axis=1)
    pick = rng.uniform(size=n)
    x[pick < 0.1, 1] = x[pick < 0.1, 0]
    x[pick > 0.9] = [-1.0, 1.0]
    return x[:, 0], x[:, 1]
