"""Augmented-Lagrangian local solver: phases, contracts, determinism."""
import math

import numpy as np
import pytest

from helpers import central_difference_gradient, own_trace_target, planted_linkage
from linkforge.kinematics import (
    NearSingular,
    FixedNode,
    Linkage,
    MotorSpec,
    MovableNode,
    TargetCurve,
    objective,
    trace,
)
from linkforge.model import SynthesisConfig, build_geometric_exact, exact_assignment, validate
from linkforge.nlp import (
    NlpOptions,
    point_from_linkage,
    problem_from_assignment,
    refine_linkage,
    solve_phase1,
    solve_phase2,
)
from linkforge.topology import assignment_from_linkage
from test_kinematics import FOUR_BAR


def four_bar_problem(T=8, target=None, blocks=None, feasible_box=8.0):
    a = assignment_from_linkage(FOUR_BAR, 3)
    return problem_from_assignment(a, T=T, box_side=feasible_box, box_center=(0.0, 0.0),
                                   eps_area=1e-3 * feasible_box ** 2,
                                   target=target, blocks=blocks)


def four_bar_start(nlp, T=8):
    return nlp.pack_point(point_from_linkage(nlp, FOUR_BAR, trace(FOUR_BAR, T)))


def test_phase1_already_feasible():
    nlp = four_bar_problem()
    res = solve_phase1(nlp, four_bar_start(nlp))
    assert res.feasible
    assert res.max_violation <= 1e-9
    assert res.iterations <= 2


def test_phase1_restores_perturbed_lengths():
    nlp = four_bar_problem()
    point = point_from_linkage(nlp, FOUR_BAR, trace(FOUR_BAR, 8))
    # stretch the coupler's offsets on half the samples: inconsistent lengths
    mid = point[3].copy()
    mid[::2] = point[2][::2] + 1.05 * (mid[::2] - point[2][::2])
    point[3] = mid
    x0 = nlp.pack_point(point)
    assert nlp.max_violation(x0) > 1e-3
    res = solve_phase1(nlp, x0)
    assert res.feasible, (res.status, res.max_violation)
    assert res.max_violation <= 1e-6
    # extract geometry and verify by re-tracing through forward kinematics
    lk = nlp.to_linkage(nlp.pack_point(res.point))
    traj = trace(lk, 8)
    restored = res.point[3] * nlp.B + nlp.center
    assert np.max(np.abs(traj.positions[:, 2, :] - restored)) < 1e-3 * nlp.B


def test_phase1_infeasible_blocks():
    # block selection freezes both first-sample offsets into a nearly
    # collinear strip, so the triangle-area margin cannot be met by any
    # placement: a genuine infeasibility certificate
    tiny = 8.0 * 1e-4
    blocks = {(3, 1): (2.4, 3.2, -tiny, tiny), (3, 2): (2.4, 3.2, -tiny, tiny)}
    nlp = four_bar_problem(T=6, blocks=blocks)
    lk6 = trace(FOUR_BAR, 6)
    x0 = nlp.pack_point(point_from_linkage(nlp, FOUR_BAR, lk6))
    res = solve_phase1(nlp, x0)
    assert res.status == "infeasible"
    assert res.max_violation > 1e-4


def test_phase2_stationary_at_own_trace():
    target = own_trace_target(FOUR_BAR, 8)
    nlp = four_bar_problem(target=target)
    res = solve_phase2(nlp, four_bar_start(nlp))
    assert res.feasible
    assert res.objective <= 1e-10


def test_phase2_decreases_toward_offset_target():
    base = own_trace_target(FOUR_BAR, 8)
    target = TargetCurve(samples=base.samples + [0.05, -0.03])
    nlp = four_bar_problem(target=target)
    x0 = four_bar_start(nlp)
    start_obj = objective(FOUR_BAR, target).total
    res = solve_phase2(nlp, x0, NlpOptions(max_outer=30))
    assert res.max_violation <= 1e-6
    assert res.objective < start_obj
    # merit decreases within every outer iteration
    for entry in res.log:
        if "merit_start" in entry:
            assert entry["merit_end"] <= entry["merit_start"] + 1e-12


def test_phase2_rejects_far_from_feasible_start():
    target = own_trace_target(FOUR_BAR, 8)
    nlp = four_bar_problem(target=target)
    point = point_from_linkage(nlp, FOUR_BAR, trace(FOUR_BAR, 8))
    point[3] = point[3] + 0.5
    with pytest.raises(ValueError):
        solve_phase2(nlp, nlp.pack_point(point))


def test_armijo_contract_logged_steps():
    base = own_trace_target(FOUR_BAR, 8)
    target = TargetCurve(samples=base.samples + [0.05, 0.02])
    nlp = four_bar_problem(target=target)
    res = solve_phase2(nlp, four_bar_start(nlp), NlpOptions(log_steps=True, max_outer=5))
    steps = [e for e in res.log if "alpha" in e]
    assert steps
    for e in steps:
        assert e["merit"] <= e["armijo_bound"] + 1e-12
        assert e["slope"] < 0.0


def test_merit_gradient_matches_finite_differences():
    rng = np.random.default_rng(8)
    checked = 0
    for _ in range(12):
        K = int(rng.integers(3, 5))
        lk = planted_linkage(rng, K, T=6)
        a = assignment_from_linkage(lk, K)
        target = own_trace_target(lk, 6)
        nlp = problem_from_assignment(a, T=6, box_side=lk.box_side,
                                      box_center=lk.box_center,
                                      eps_area=1e-3 * lk.box_side ** 2, target=target)
        x0 = nlp.pack_point(point_from_linkage(nlp, lk, trace(lk, 6)))
        x = np.clip(x0 + rng.normal(scale=0.02, size=len(x0)), nlp.lb, nlp.ub)
        mu = nlp.init_multipliers()
        for arr in mu.values():
            arr += rng.normal(scale=0.1, size=arr.shape)
        rho = 7.0
        _, grad = nlp.merit_and_grad(x, mu, rho, True, None)
        fd = central_difference_gradient(
            lambda z: nlp.merit_and_grad(z, mu, rho, True, None)[0], x, 1e-7)
        mask = np.abs(grad) > 1e-6
        if not mask.any():
            continue
        rel = np.abs(grad[mask] - fd[mask]) / np.abs(grad[mask])
        assert np.max(rel) <= 1e-5
        checked += 1
    assert checked >= 8


def test_feasibility_certificate_against_exact_model():
    T = 8
    target = own_trace_target(FOUR_BAR, T)
    nlp = four_bar_problem(T=T, target=target)
    res = solve_phase1(nlp, four_bar_start(nlp), NlpOptions(feas_tol=1e-8))
    assert res.feasible
    lk = nlp.to_linkage(nlp.pack_point(res.point))
    cfg = SynthesisConfig(K=3, T=T, S=2, box_side=8.0, lam=0.0)
    model = build_geometric_exact(cfg)
    values = exact_assignment(cfg, lk)
    assert validate(model, values, tol=1e-6).satisfied


def test_solver_deterministic_logs():
    base = own_trace_target(FOUR_BAR, 8)
    target = TargetCurve(samples=base.samples + [0.04, -0.02])
    runs = []
    for _ in range(2):
        nlp = four_bar_problem(target=target)
        res = solve_phase2(nlp, four_bar_start(nlp), NlpOptions(max_outer=10))
        runs.append(res.log)
    assert runs[0] == runs[1]


def test_refine_at_optimum_returns_input():
    target = own_trace_target(FOUR_BAR, 8)
    out = refine_linkage(FOUR_BAR, target)
    assert out is FOUR_BAR or objective(out, target).total <= 1e-15


def test_refine_decreases_objective():
    base = own_trace_target(FOUR_BAR, 8)
    target = TargetCurve(samples=base.samples + [0.1, 0.05])
    before = objective(FOUR_BAR, target).total
    out = refine_linkage(FOUR_BAR, target)
    after = objective(out, target).total
    assert after < before


def test_refine_propagates_near_singular():
    margin = 1e-6
    rho = 2.0 - margin
    lk = Linkage(
        motor=MotorSpec(center=(-2.0, 0.0), radius=0.3, direction=1),
        joints=(FixedNode(position=(0.0, 0.0)),
                FixedNode(position=(rho, 0.0)),
                MovableNode(parents=(2, 3), lengths=(1.0, 1.0), orientation=1)),
        box_side=8.0,
    )
    target = own_trace_target(lk, 4)
    with pytest.raises(NearSingular):
        refine_linkage(lk, target)


def test_point_packing_roundtrip():
    nlp = four_bar_problem()
    x0 = four_bar_start(nlp)
    point = nlp.unpack_point(x0)
    x1 = nlp.pack_point(point)
    assert np.allclose(x0, x1, atol=1e-12)
