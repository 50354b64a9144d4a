import numpy as np
import pytest

from semelbow.errors import InvalidInputError
from semelbow.lasso_solver import lasso_lambda_max
from semelbow.synthetic import (
    ContainmentReport,
    GroundTruth,
    RunRecord,
    SyntheticScenario,
    beta_for,
    curve_samples,
    generate,
    ground_truth_interval,
    run_containment,
    run_one,
)


def test_beta_shapes():
    assert beta_for("s1").sum() == 20 and beta_for("S2").sum() == 10
    assert beta_for("s1")[:20].all() and not beta_for("s1")[20:].any()
    with pytest.raises(InvalidInputError):
        beta_for("s3")


def test_scenario_validation():
    with pytest.raises(InvalidInputError):
        SyntheticScenario(np.ones(5), r=30)
    with pytest.raises(InvalidInputError):
        SyntheticScenario.named("s1", z_axis="nope")
    with pytest.raises(InvalidInputError):
        SyntheticScenario.named("s1", noise_variance=-1)


def test_generate_is_deterministic():
    sc = SyntheticScenario.named("s1", seed=4)
    a, b = generate(sc, 7), generate(sc, 7)
    np.testing.assert_array_equal(a[0], b[0])
    np.testing.assert_array_equal(a[1], b[1])
    assert not np.array_equal(generate(sc, 8)[0], a[0])
    other = SyntheticScenario.named("s1", seed=5)
    assert not np.array_equal(generate(other, 7)[0], a[0])


def test_generate_shapes_and_variance():
    sc = SyntheticScenario.named("s2")
    x, y = generate(sc, 0)
    assert x.shape == (30, 200) and y.shape == (200,)
    assert 60 <= x.var() <= 140
    noise = y - sc.beta_true @ x
    assert 0.5 <= noise.var() <= 1.5


def test_noiseless_response():
    sc = SyntheticScenario.named("s2", noise_variance=0.0)
    x, y = generate(sc, 3)
    np.testing.assert_array_equal(y, sc.beta_true @ x)


def test_zero_beta_gives_zero_response():
    sc = SyntheticScenario(np.zeros(30), noise_variance=0.0)
    _, y = generate(sc, 0)
    assert not np.any(y)


def test_ground_truth_orthogonal_design():
    # X X^T = diag(d): beta_r = soft((Xy)_r, lam/2) / d_r, so the exact support
    # is recovered iff 2 max_{off} |Xy| <= lam < 2 min_{on} |Xy|.
    rng = np.random.default_rng(0)
    q, _ = np.linalg.qr(rng.standard_normal((50, 4)))
    x = (q * np.array([3.0, 2.0, 4.0, 1.0])).T
    y = np.array([1.0, 0.5, 0.05, 0.02]) @ x
    xy = np.abs(x @ y)
    lo_bound, hi_bound = 2 * max(xy[2], xy[3]), 2 * min(xy[0], xy[1])
    assert lo_bound < hi_bound
    grid = np.linspace(0.01, 1.2 * lasso_lambda_max(x, y), 400)
    truth = ground_truth_interval(x, y, grid, {0, 1})
    inside = grid[(grid >= lo_bound) & (grid < hi_bound)]
    assert truth == GroundTruth(inside.min(), inside.max(), True)


def test_ground_truth_absent_when_grid_too_high():
    sc = SyntheticScenario.named("s2")
    x, y = generate(sc, 0)
    lm = lasso_lambda_max(x, y)
    assert ground_truth_interval(x, y, [1.1 * lm, 2 * lm], sc.true_support) is None


def test_ground_truth_grid_must_increase():
    with pytest.raises(InvalidInputError):
        ground_truth_interval(np.ones((1, 3)), np.ones(3), [2.0, 1.0], {0})


def test_curve_sample_axes():
    grid = np.array([8.0, 4.0, 2.0])

    class S:
        def __init__(self, k, mse):
            self.support, self.mse = frozenset(range(k)), mse

    path = [S(0, 9.0), S(1, 3.0), S(3, 1.0)]
    assert [s[0] for s in curve_samples(grid, path, "lambda_gap")] == [0.0, 4.0, 6.0]
    assert [s[0] for s in curve_samples(grid, path, "support")] == [0.0, 1.0, 3.0]
    np.testing.assert_allclose([s[0] for s in curve_samples(grid, path, "log_inv_lambda")], [0, np.log(2), np.log(4)])
    assert [s[2] for s in curve_samples(grid, path, "support")] == [8.0, 4.0, 2.0]


def test_run_one_fields():
    rec = run_one(SyntheticScenario.named("s2", grid_points=60), 0)
    assert rec.detected[0] >= rec.detected[1]
    assert rec.truth is not None and rec.truth.lo <= rec.truth.hi
    if rec.contained:
        assert rec.overshoot == 0.0 and rec.overshoot_side == ""


def test_parallel_report_matches_serial():
    sc = SyntheticScenario.named("s2", runs=4, grid_points=40)
    a = run_containment(sc)
    b = run_containment(sc, workers=2)
    assert a.runs == b.runs


def _rec(run, truth, contained, side="", over=0.0):
    return RunRecord(run, run, 1.0, truth, (1.0, 0.5), 0.7, 1.0, 2.0, contained, over, side)


def test_report_counts():
    t = GroundTruth(0.1, 1.0, True)
    rep = ContainmentReport({}, [
        _rec(0, t, True),
        _rec(1, t, False, "low", 0.25),
        _rec(2, None, None),
        _rec(3, GroundTruth(0.1, 1.0, False), False, "high", 0.75),
    ])
    s = rep.summary()
    assert s["runs"] == 4 and s["evaluated"] == 3 and s["ground_truth_absent"] == 1
    assert s["contained"] == 1 and s["containment_rate"] == pytest.approx(1 / 3)
    assert s["violations"] == 2 and s["violations_low_end_only"] == 1
    assert s["mean_overshoot"] == pytest.approx(0.5)
    assert s["non_contiguous_truth"] == 1


def test_empty_report():
    assert ContainmentReport({}).summary()["containment_rate"] is None
