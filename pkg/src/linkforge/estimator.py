"""Estimator-style facade: fit a linkage to target waypoints, predict its path."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .annealing import SAConfig, run as sa_run
from .branchbound import Budget, solve_parallel
from .kinematics import ARBITRARY_ORDER, FIXED_ORDER, TargetCurve, motor_position, trace
from .model import SynthesisConfig
from .targets import default_box, default_lambda, resample_closed


def _validate_waypoints(X):
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != 2:
        raise ValueError("waypoints must be an (n, 2) array")
    if len(X) < 3:
        raise ValueError("need at least 3 waypoints")
    if not np.all(np.isfinite(X)):
        raise ValueError("waypoints must be finite")
    return X


class LinkageSynthesizer(BaseEstimator):
    """Searches linkage topology and geometry to trace the given waypoints.

    fit(X) resamples the waypoint polyline to ``samples`` points by equal arc
    length and runs the chosen solver; the winning design lands in
    ``linkage_`` / ``solution_``.  predict(t) evaluates the fitted
    end-effector at motor angles t.
    """

    def __init__(self, solver="sa", max_nodes=7, samples=20, resolution=8,
                 regularization="auto", seed=0, iterations=20000,
                 node_limit=2000, time_limit=None, workers=1,
                 arbitrary_order=False):
        self.solver = solver
        self.max_nodes = max_nodes
        self.samples = samples
        self.resolution = resolution
        self.regularization = regularization
        self.seed = seed
        self.iterations = iterations
        self.node_limit = node_limit
        self.time_limit = time_limit
        self.workers = workers
        self.arbitrary_order = arbitrary_order

    def fit(self, X, y=None):
        X = _validate_waypoints(X)
        mode = ARBITRARY_ORDER if self.arbitrary_order else FIXED_ORDER
        target = TargetCurve(samples=resample_closed(X, self.samples), mode=mode)
        lam = (default_lambda(target.samples) if self.regularization == "auto"
               else float(self.regularization))
        B, center = default_box(target.samples)
        if self.solver == "sa":
            cfg = SAConfig(i_max=self.iterations, seed=self.seed,
                           max_nodes=self.max_nodes, samples=self.samples,
                           lam=lam, box_side=B, box_center=center)
            out = sa_run(cfg, target)
            self.solution_ = out.solution(target)
        elif self.solver == "bb":
            cfg = SynthesisConfig.for_target(target, K=self.max_nodes,
                                             S=self.resolution, lam=lam)
            budget = Budget(node_limit=self.node_limit, time_limit=self.time_limit)
            result = solve_parallel(cfg, target, budget, workers=self.workers)
            if result.incumbent is None:
                raise RuntimeError("no feasible linkage found within budget")
            from .branchbound import solution_of

            self.solution_ = solution_of(result, cfg, target)
        else:
            raise ValueError(f"unknown solver {self.solver!r}")
        self.linkage_ = self.solution_.linkage
        self.target_ = target
        self.objective_ = self.solution_.objective_total
        self.n_nodes_ = self.linkage_.n_nodes
        return self

    def predict(self, t):
        """End-effector positions at motor angles t (requires fit)."""
        self._check_fitted()
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if self.linkage_.n_nodes == 1:
            return motor_position(self.linkage_.motor, t)
        from .kinematics import forward_kinematics

        return np.stack([forward_kinematics(self.linkage_, ti)[-1] for ti in t])

    def transform(self, X=None):
        """Fitted end-effector trajectory at the training sample grid."""
        self._check_fitted()
        return trace(self.linkage_, self.samples).end_effector()

    def score(self, X=None, y=None):
        self._check_fitted()
        return -self.objective_

    def _check_fitted(self):
        if not hasattr(self, "linkage_"):
            raise RuntimeError("call fit() first")
