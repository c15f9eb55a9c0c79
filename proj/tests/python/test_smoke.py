import math

import numpy as np
import pytest

import udr


def test_truncate_and_divergences():
    assert udr.truncate(5.0, -1.0, 2.0) == 2.0
    assert udr.truncate(0.5, -1.0, 2.0) == 0.5
    assert udr.bregman_div("ls", 3.0, 1.0) == 4.0
    assert udr.bregman_div("lr", 1.0, 2.0) == pytest.approx(2 * math.log(3) - 3 * math.log(2), rel=1e-12)
    with pytest.raises(ValueError):
        udr.bregman_div("kl", 1.0, 2.0)


def test_ratio_objective_matches_numpy():
    fs = np.array([1.0, 2.0, 0.5])
    ft = np.array([3.0, 0.25])
    assert udr.ratio_objective("ls", fs, ft) == pytest.approx(np.mean(fs**2) - 2 * np.mean(ft), rel=1e-14)
    want = np.mean(np.log1p(fs)) + np.mean(np.log1p(ft) - np.log(ft))
    assert udr.ratio_objective("lr", fs, ft) == pytest.approx(want, rel=1e-14)


def test_gamma_sample_and_true_ratio():
    src, tgt = udr.gamma_shift_sample(2, 400, 300, seed=3)
    assert src.shape == (400, 2) and tgt.shape == (300, 2)
    assert (src > 0).all() and (tgt > 0).all()
    r = udr.true_ratio(2, src)
    np.testing.assert_allclose(r, 2 * src[:, 0] * src[:, 1], rtol=1e-12)
    again, _ = udr.gamma_shift_sample(2, 400, 300, seed=3)
    np.testing.assert_array_equal(src, again)


def test_regression_sample_has_antithetic_noise():
    X, Y = udr.regression_sample(0.2, 500, "target", seed=1)
    assert X.shape == (500, 5) and Y.shape == (500, 2)
    np.testing.assert_allclose(Y.sum(axis=1), udr.f0(X).sum(axis=1), atol=1e-12)


def test_fit_ratio_short_run():
    src, tgt = udr.gamma_shift_sample(1, 300, 300, seed=5)
    model = udr.fit_ratio(src, tgt, loss="ls", iterations=200, seed=7)
    pred = model.predict(src)
    assert pred.shape == (300, 1)
    assert np.isfinite(pred).all() and (pred >= 0).all()
    assert model.depth >= 1 and model.parameter_count > 0
    assert model.lipschitz_bound() > 0


def test_oracle_flow_and_w2():
    z = udr.sample_gaussian_oracle(2.0, 0.5, 4000, seed=11)
    assert abs(z.mean() - 2.0) < 0.05
    assert abs(z.std() - 0.5) < 0.05
    rng = np.random.default_rng(0)
    truth = 2.0 + 0.5 * rng.standard_normal(4000)
    assert udr.w2_1d(z, truth) < 0.05
    a = np.array([0.0, 1.0, 2.0])
    assert udr.w2_1d(a, a[::-1] + 1.0) == pytest.approx(1.0)


def test_fit_velocity_short_run():
    rng = np.random.default_rng(1)
    X = rng.uniform(-1, 1, size=(200, 1))
    Y = X + 0.5 * rng.standard_normal((200, 1))
    model = udr.fit_velocity(X, Y, iterations=50, seed=2)
    out = model.sample(np.array([0.5]), 100, steps=20)
    assert out.shape == (100, 1) and np.isfinite(out).all()


def test_run_experiment_is_deterministic():
    overrides = {"sizes": "60,120", "reps": "2", "iterations": "100", "n_test": "200"}
    a = udr.run_experiment("dre", overrides)
    b = udr.run_experiment("dre", overrides)
    assert a["csv"] == b["csv"]
    assert a["csv"].startswith("experiment,scenario,n,metric,mean,std,reps\n")
    assert a["failures"] == 0 and a["tasks"] == 4
    assert {r["metric"] for r in a["rows"]} == {"source_mse", "target_mse"}
    with pytest.raises(ValueError):
        udr.run_experiment("dre", {"colour": "red"})
