"""Estimator facade: fit/predict surface and parameter handling."""
import math

import numpy as np
import pytest

from linkforge.estimator import LinkageSynthesizer


def circle_waypoints(n=100, r=0.7):
    t = np.linspace(0.0, 2 * math.pi, n)
    return np.stack([r * np.cos(t), r * np.sin(t)], axis=1)


def test_get_set_params_roundtrip():
    est = LinkageSynthesizer(solver="bb", max_nodes=4, samples=8, seed=3)
    params = est.get_params()
    assert params["solver"] == "bb"
    assert params["max_nodes"] == 4
    est2 = LinkageSynthesizer(**params)
    assert est2.get_params() == params
    est2.set_params(solver="sa")
    assert est2.solver == "sa"


def test_fit_sa_circle():
    est = LinkageSynthesizer(solver="sa", max_nodes=4, samples=8, seed=1,
                             iterations=300, regularization=0.0,
                             arbitrary_order=True)
    est.fit(circle_waypoints())
    assert hasattr(est, "linkage_")
    assert est.objective_ <= 0.2
    path = est.transform()
    assert path.shape == (8, 2)
    pts = est.predict([0.0, math.pi])
    assert pts.shape == (2, 2)
    assert est.score() == -est.objective_


def test_fit_bb_circle():
    est = LinkageSynthesizer(solver="bb", max_nodes=2, samples=8, resolution=4,
                             seed=0, node_limit=40, regularization=0.0,
                             arbitrary_order=True)
    est.fit(circle_waypoints())
    assert est.n_nodes_ == 1
    assert est.objective_ <= 1e-6


def test_waypoint_validation():
    est = LinkageSynthesizer()
    with pytest.raises(ValueError):
        est.fit(np.zeros((2, 2)))
    with pytest.raises(ValueError):
        est.fit(np.array([[0.0, 0.0], [1.0, np.nan], [2.0, 0.0]]))
    with pytest.raises(ValueError):
        est.fit(np.zeros((5, 3)))


def test_predict_requires_fit():
    est = LinkageSynthesizer()
    with pytest.raises(RuntimeError):
        est.predict([0.0])
