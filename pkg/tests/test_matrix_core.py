import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from semelbow.errors import InvalidInputError
from semelbow.matrix_core import (
    AdjacencyMatrix,
    GraphSignalMatrix,
    RandomSource,
    gaussian,
    spectral_norm,
    symmetrize_hollow,
)

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def test_spectral_norm_identity():
    assert spectral_norm(np.eye(3)) == pytest.approx(1.0, rel=1e-10)


def test_spectral_norm_diagonal():
    assert spectral_norm(np.diag([2.0, -5.0, 1.0])) == pytest.approx(5.0, rel=1e-10)


def test_spectral_norm_from_factors():
    rng = np.random.default_rng(0)
    u, _ = np.linalg.qr(rng.standard_normal((10, 10)))
    v, _ = np.linalg.qr(rng.standard_normal((10, 10)))
    s = np.diag([3.0, 1.0, 0.9, 0.8, 0.5, 0.4, 0.3, 0.2, 0.1, 0.05])
    assert spectral_norm(u @ s @ v.T, tol=1e-12) == pytest.approx(3.0, rel=1e-8)


def test_spectral_norm_start_orthogonal_to_leading_vector():
    # all-ones is orthogonal to e1 - e2, the leading right singular vector here
    m = np.array([[2.0, -2.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.5]])
    assert spectral_norm(m) == pytest.approx(np.linalg.norm(m, 2), rel=1e-8)


def test_spectral_norm_rejects_nonfinite():
    with pytest.raises(InvalidInputError):
        spectral_norm(np.array([[1.0, np.nan], [0.0, 1.0]]))


@settings(max_examples=60, deadline=None)
@given(arrays(float, (5, 4), elements=finite), st.floats(-50, 50).filter(lambda c: abs(c) > 1e-3))
def test_spectral_norm_homogeneous_and_bounded(m, c):
    s = spectral_norm(m, tol=1e-13)
    assert spectral_norm(c * m, tol=1e-13) == pytest.approx(abs(c) * s, rel=1e-6, abs=1e-9)
    fro = np.linalg.norm(m)
    cols = np.linalg.norm(m, axis=0).max() if m.size else 0.0
    assert s <= fro * (1 + 1e-9) + 1e-12
    assert s >= cols / np.sqrt(m.shape[0]) - 1e-9


@pytest.mark.parametrize(
    "m, mask, expected",
    [
        ([[0, 2], [4, 0]], (), [[0, 3], [3, 0]]),
        ([[1, 1], [1, 1]], (), [[0, 1], [1, 0]]),
        ([[0, 5], [5, 0]], [(0, 1)], [[0, 0], [0, 0]]),
    ],
)
def test_symmetrize_hollow_examples(m, mask, expected):
    a = symmetrize_hollow(np.array(m, float), mask)
    np.testing.assert_array_equal(a.weights, expected)


@settings(max_examples=60, deadline=None)
@given(arrays(float, (4, 4), elements=finite))
def test_symmetrize_hollow_idempotent_and_valid(m):
    once = symmetrize_hollow(m, [(0, 3)])
    twice = symmetrize_hollow(once.weights, [(0, 3)])
    np.testing.assert_array_equal(once.weights, twice.weights)
    w = once.weights
    assert np.array_equal(w, w.T)
    assert np.all(np.diag(w) == 0)
    assert w[0, 3] == 0 and w[3, 0] == 0


def test_adjacency_invariants_enforced():
    with pytest.raises(InvalidInputError):
        AdjacencyMatrix(np.array([[1.0, 0.0], [0.0, 0.0]]))
    with pytest.raises(InvalidInputError):
        AdjacencyMatrix(np.array([[0.0, 1.0], [2.0, 0.0]]))
    with pytest.raises(InvalidInputError):
        AdjacencyMatrix(np.array([[0.0, 1.0], [1.0, 0.0]]), frozenset({(0, 1)}))


def test_graph_signal_validation():
    with pytest.raises(InvalidInputError):
        GraphSignalMatrix(np.ones((1, 3)))
    with pytest.raises(InvalidInputError):
        GraphSignalMatrix(np.array([[1.0, np.inf], [0.0, 1.0]]))
    with pytest.raises(InvalidInputError):
        GraphSignalMatrix(np.ones((2, 3)), output_nodes={2})


def test_gaussian_zero_variance():
    np.testing.assert_array_equal(gaussian(RandomSource(1), 0.0, 0.0, 5), np.zeros(5))


def test_gaussian_sample_variance():
    z = gaussian(RandomSource(1), 0.0, 100.0, 100_000)
    assert 97.0 <= z.var(ddof=1) <= 103.0
    assert abs(z.mean()) < 0.2


def test_gaussian_deterministic():
    a = gaussian(RandomSource(1), 0.0, 1.0, 11)
    b = gaussian(RandomSource(1), 0.0, 1.0, 11)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, gaussian(RandomSource(2), 0.0, 1.0, 11))


def test_gaussian_negative_variance():
    with pytest.raises(InvalidInputError):
        gaussian(RandomSource(0), 0.0, -1.0, 3)


def test_spawn_is_deterministic_and_distinct():
    base = RandomSource(7)
    assert base.spawn(3).seed == RandomSource(7).spawn(3).seed
    seeds = {RandomSource(s).spawn(k).seed for s in (1, 2) for k in range(50)}
    assert len(seeds) == 100
