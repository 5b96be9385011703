"""Python binding smoke tests; the heavy coverage lives in the C++ suites."""

import math

import numpy as np
import pytest

import spdnn


def test_penalty_values():
    assert spdnn.clipped_norm(np.array([2.0, 0.5]), 1.0) == pytest.approx(1.5)
    assert spdnn.penalty_value(np.array([2.0, 0.5]), 0.1, 1.0) == pytest.approx(0.15)
    grad = spdnn.penalty_subgradient(np.array([0.0, 0.2, 0.9]), 1.0, 0.5)
    assert grad == pytest.approx([0.0, 2.0, 0.0])
    assert spdnn.l0_norm(np.array([1e-9, 0.3, 0.0]), 1e-6) == 1


def test_simulate_shapes_and_determinism():
    traj = spdnn.simulate("dgp1", 200, seed=5)
    assert traj.features.shape == (200, 4)
    assert traj.targets.shape == (200,)
    again = spdnn.simulate("dgp1", 200, seed=5)
    np.testing.assert_array_equal(traj.features, again.features)

    binary = spdnn.simulate("dgp3", 100, seed=1)
    assert set(np.unique(binary.targets)) <= {-1.0, 1.0}


def test_mean_function_and_bayes():
    assert spdnn.mean_function("dgp1", np.zeros(4)) == pytest.approx(0.4)
    assert spdnn.mean_function("dgp3", np.zeros(2)) == pytest.approx(0.10)
    assert spdnn.bayes_classifier("dgp3", np.zeros(2)) == 1
    assert spdnn.bayes_classifier("dgp4", np.zeros(3)) == -1


def test_train_and_evaluate():
    traj = spdnn.simulate("dgp2", 150, seed=3)
    net, history = spdnn.train(
        traj, widths=[8], lam=1e-3, tau=0.1, seed=7, max_epochs=25, patience=8
    )
    assert net.parameter_count == 2 * 8 + 8 + 8 + 1
    assert history["best_epoch"] >= 1
    assert len(history["train_loss"]) == history["stopped_epoch"]

    test = spdnn.simulate("dgp2", 400, seed=4)
    err = spdnn.evaluate_l2(net, test)
    assert err >= 0.0
    assert spdnn.evaluate_mse(net, test) >= 0.0

    x = test.features[0]
    assert math.isfinite(net.forward(x))

    restored = spdnn.Network.from_string(net.to_string())
    assert restored.forward(x) == net.forward(x)


def test_excess_risk_sign():
    traj = spdnn.simulate("dgp3", 120, seed=11)
    net, _ = spdnn.train(traj, widths=[6], seed=2, max_epochs=15, patience=5)
    test = spdnn.simulate("dgp3", 500, seed=12)
    risk = spdnn.evaluate_excess_risk(net, test)
    assert risk >= -2.0  # bounded below by the optimal hinge loss


def test_theory_calculators():
    sched = spdnn.schedule(1000.0, task="classification", nu4=1.0)
    assert sched["lambda"] == pytest.approx(math.log(1000.0) / 1000.0, rel=1e-12)
    assert sched["tau_max"] > 0.0

    assert spdnn.regression_rate(1000.0) > spdnn.regression_rate(100000.0)
    assert spdnn.classification_rate(1000.0) > 0.0
    with pytest.raises(ValueError):
        spdnn.schedule(1000.0, nu6=0.9)

    bound = spdnn.covering_bound(0.5, 3.0, 10.0, 2.0, 1, 0.3, 0.01, 1e-9, 1.5)
    assert bound > 0.0

    series = spdnn.simulate_exog_ar1(5000, seed=9)
    eps_hat = spdnn.dependence_diagnostic(np.asarray(series), 4)
    assert len(eps_hat) == 4
    assert all(e >= 0.0 for e in eps_hat)


def test_replicate_small():
    rows = spdnn.replicate(
        "dgp2", 60, 1, base_seed=5, i_max=10, i_step=10, j_max=10, j_step=10,
        widths=[4], max_epochs=10, patience=4, test_size=200, threads=1,
    )
    assert len(rows) == 2
    methods = {row["method"] for row in rows}
    assert methods == {"SPDNN", "NPDNN"}
    spdnn_row = next(r for r in rows if r["method"] == "SPDNN")
    assert spdnn_row["i"] is not None
    npdnn_row = next(r for r in rows if r["method"] == "NPDNN")
    assert npdnn_row["i"] is None
