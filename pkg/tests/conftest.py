import numpy as np
import pytest

from semelbow.matrix_core import GraphSignalMatrix


def sem_samples(n=20, density=0.2, radius=0.5, m=2000, seed=0):
    """X = (I - A*)^{-1} W for a random sparse symmetric hollow A* with spectral radius ``radius``."""
    rng = np.random.default_rng(seed)
    upper = np.triu(rng.random((n, n)) < density, 1)
    signs = rng.choice([-1.0, 1.0], size=(n, n))
    mags = rng.uniform(0.5, 1.0, size=(n, n))
    a = np.where(upper, signs * mags, 0.0)
    a = a + a.T
    a *= radius / np.max(np.abs(np.linalg.eigvalsh(a)))
    w = rng.standard_normal((n, m))
    x = np.linalg.solve(np.eye(n) - a, w)
    return x, a


@pytest.fixture
def small_signal():
    rng = np.random.default_rng(3)
    return GraphSignalMatrix(rng.standard_normal((6, 80)), output_nodes={4, 5})


def emo_like(n_inputs=12, m=300, seed=5):
    """Small dataset shaped like the soundscape table: inputs plus two correlated outputs."""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n_inputs, m))
    arousal = 0.8 * x[0] + 0.4 * x[1] + 0.3 * rng.standard_normal(m)
    valence = 0.6 * x[2] + 0.5 * arousal + 0.3 * rng.standard_normal(m)
    data = np.vstack([x, arousal, valence])
    names = [f"f{i + 1}" for i in range(n_inputs)] + ["Arousal", "Valence"]
    return GraphSignalMatrix(data, names, {n_inputs, n_inputs + 1})


@pytest.fixture
def emo_small():
    return emo_like()
