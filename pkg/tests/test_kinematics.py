"""Kinematics core: law-of-cosine placement, tracing, objectives, adjoint gradients."""
import math

import numpy as np
import pytest

from helpers import (
    central_difference_gradient,
    circle_intersection,
    own_trace_target,
    random_feasible_triangle,
    random_linkage,
)
from linkforge.kinematics import (
    ARBITRARY_ORDER,
    FixedNode,
    Linkage,
    MotorSpec,
    MovableNode,
    NearSingular,
    TargetCurve,
    TriangleInfeasible,
    forward_kinematics,
    is_valid,
    jacobian_adjoint,
    kinematic_jacobian_dets,
    law_of_cosine,
    link_pairs,
    max_length_spread,
    motor_position,
    objective,
    objective_or_inf,
    param_names,
    param_vector,
    trace,
    with_params,
    signed_area,
)

# Fixed four-bar used across the suite: motor r=1 at origin, ground pivot at
# (3, 0), coupler with equal 2.5 links.
FOUR_BAR = Linkage(
    motor=MotorSpec(center=(0.0, 0.0), radius=1.0, direction=1),
    joints=(
        FixedNode(position=(3.0, 0.0)),
        MovableNode(parents=(1, 2), lengths=(2.5, 2.5), orientation=1),
    ),
    box_side=8.0,
)


def test_motor_position_examples():
    m = MotorSpec(center=(0.0, 0.0), radius=1.0, direction=1)
    assert np.allclose(motor_position(m, 0.0), [0.0, 1.0])
    m2 = MotorSpec(center=(2.0, 3.0), radius=1.0, direction=1)
    assert np.allclose(motor_position(m2, math.pi / 2), [3.0, 3.0])
    lin = MotorSpec(kind="linear", center=(0.0, 0.0), velocity=(1.0, 0.0))
    assert np.allclose(motor_position(lin, math.pi), [math.pi, 0.0])


def test_law_of_cosine_isoceles_branches():
    p_plus = law_of_cosine((0, 0), (2, 0), math.sqrt(2), math.sqrt(2), 1)
    p_minus = law_of_cosine((0, 0), (2, 0), math.sqrt(2), math.sqrt(2), -1)
    assert np.allclose(p_plus, [1.0, -1.0])
    assert np.allclose(p_minus, [1.0, 1.0])


def test_law_of_cosine_derived_value():
    # Frozen from the circle-intersection oracle, computed ahead of the
    # implementation; rounds to (0.888, -1.337).
    oracle = circle_intersection((0, 1), 2.5, (3, 0), 2.5, 1)
    assert np.allclose(oracle, [0.8876275643042055, -1.3371173070873836], atol=1e-12)
    got = law_of_cosine((0, 1), (3, 0), 2.5, 2.5, 1)
    assert np.allclose(got, oracle, atol=1e-9)
    assert np.allclose(got, [0.888, -1.337], atol=1e-3)


def test_law_of_cosine_infeasible_far():
    with pytest.raises(TriangleInfeasible):
        law_of_cosine((0, 0), (5, 0), 1.0, 1.0, 1)


def test_law_of_cosine_infeasible_contained():
    # One circle strictly inside the other: |lji - lki| bound.
    with pytest.raises(TriangleInfeasible):
        law_of_cosine((0, 0), (0.1, 0), 3.0, 1.0, 1)


def test_law_of_cosine_oracle_equivalence():
    rng = np.random.default_rng(7)
    B = 4.0
    for _ in range(1000):
        nj, nk, lji, lki, sign = random_feasible_triangle(rng)
        got = law_of_cosine(nj, nk, lji, lki, sign)
        want = circle_intersection(nj, lji, nk, lki, sign)
        assert np.linalg.norm(got - want) <= 1e-9 * B


def test_mirror_symmetry():
    rng = np.random.default_rng(11)
    for _ in range(200):
        nj, nk, lji, lki, _ = random_feasible_triangle(rng)
        p = law_of_cosine(nj, nk, lji, lki, 1)
        q = law_of_cosine(nj, nk, lji, lki, -1)
        axis = (nk - nj) / np.linalg.norm(nk - nj)

        def cross2(a, b):
            return a[0] * b[1] - a[1] * b[0]

        # equal distance to the nj-nk line, mirrored sides
        assert abs(cross2(axis, p - nj) + cross2(axis, q - nj)) < 1e-9
        # midpoint lies on the line through nj and nk
        mid = 0.5 * (p + q)
        assert abs(cross2(axis, mid - nj)) < 1e-9


def test_forward_kinematics_motor_only():
    lk = Linkage(motor=MotorSpec(center=(0, 0), radius=1.0, direction=1))
    pos = forward_kinematics(lk, math.pi / 2)
    assert np.allclose(pos, [[1.0, 0.0]])


def test_forward_kinematics_four_bar():
    pos = forward_kinematics(FOUR_BAR, 0.0)
    assert np.allclose(pos[0], [0.0, 1.0])
    assert np.allclose(pos[1], [3.0, 0.0])
    oracle = circle_intersection((0, 1), 2.5, (3, 0), 2.5, 1)
    assert np.allclose(pos[2], oracle, atol=1e-9)


def test_forward_kinematics_infeasible_propagates_index():
    bad = Linkage(
        motor=MotorSpec(center=(0, 0), radius=1.0, direction=1),
        joints=(FixedNode(position=(3.0, 0.0)),
                MovableNode(parents=(1, 2), lengths=(0.5, 0.5), orientation=1)),
        box_side=8.0,
    )
    with pytest.raises(TriangleInfeasible) as exc:
        forward_kinematics(bad, 0.0)
    assert exc.value.node == 3


def test_trace_motor_quarter_turns():
    lk = Linkage(motor=MotorSpec(center=(0, 0), radius=1.0, direction=1))
    traj = trace(lk, 4)
    assert np.allclose(traj.node_path(1), [[1, 0], [0, -1], [-1, 0], [0, 1]], atol=1e-12)


def test_trace_single_sample_equals_fk_at_two_pi():
    traj = trace(FOUR_BAR, 1)
    assert np.allclose(traj.positions[0], forward_kinematics(FOUR_BAR, 2 * math.pi))


def test_trace_length_constancy_four_bar():
    traj = trace(FOUR_BAR, 64)
    assert max_length_spread(FOUR_BAR, traj) < 1e-9 * FOUR_BAR.box_side
    for i, j in link_pairs(FOUR_BAR):
        lens = np.linalg.norm(traj.positions[:, i - 1] - traj.positions[:, j - 1], axis=-1)
        want = 2.5
        assert np.allclose(lens, want, atol=1e-9)


def test_trace_period_closure():
    t1 = trace(FOUR_BAR, 16)
    t2 = trace(FOUR_BAR, 32)
    # shared sample times are the odd rows of the doubled grid
    assert np.allclose(t2.times[1::2], t1.times, atol=0, rtol=0)
    assert np.max(np.abs(t2.positions[1::2] - t1.positions)) <= 1e-12 * FOUR_BAR.box_side


def test_objective_self_trace_zero():
    target = own_trace_target(FOUR_BAR, 16)
    br = objective(FOUR_BAR, target, lam=0.0)
    assert br.total == pytest.approx(0.0, abs=1e-18)


def test_objective_lambda_counts_nodes():
    rng = np.random.default_rng(3)
    lk = random_linkage(rng, 7, T=8)
    target = own_trace_target(lk, 8)
    br = objective(lk, target, lam=0.01)
    assert br.regularization == pytest.approx(0.07)
    assert br.total == pytest.approx(0.07, abs=1e-12)


def test_objective_offset_circle_brute_force():
    lk = Linkage(motor=MotorSpec(center=(0, 0), radius=1.0, direction=1))
    shifted = Linkage(motor=MotorSpec(center=(1, 0), radius=1.0, direction=1))
    T = 4
    target = TargetCurve(samples=trace(shifted, T).end_effector())
    # brute force over the 4 sample pairs
    a = trace(lk, T).end_effector()
    b = target.samples
    want = (2 * math.pi / T) * sum(np.sum((a[q] - b[q]) ** 2) for q in range(T))
    assert want == pytest.approx(2 * math.pi)
    assert objective(lk, target).total == pytest.approx(want, rel=1e-12)


def test_objective_arbitrary_order_matches_shifted_samples():
    target_fixed = own_trace_target(FOUR_BAR, 12)
    rolled = np.roll(target_fixed.samples, 5, axis=0)
    fixed = objective(FOUR_BAR, TargetCurve(samples=rolled))
    arb = objective(FOUR_BAR, TargetCurve(samples=rolled, mode=ARBITRARY_ORDER))
    assert fixed.total > 1e-3
    assert arb.total == pytest.approx(0.0, abs=1e-15)
    assert sorted(arb.matching) == list(range(12))


def test_objective_or_inf_on_infeasible():
    bad = Linkage(
        motor=MotorSpec(center=(0, 0), radius=1.0, direction=1),
        joints=(FixedNode(position=(3.0, 0.0)),
                MovableNode(parents=(1, 2), lengths=(0.5, 0.5), orientation=1)),
        box_side=8.0,
    )
    target = TargetCurve(samples=np.zeros((8, 2)) + [[1.0, 0.0]])
    assert objective_or_inf(bad, target) == math.inf


def test_gradient_zero_at_own_trace_motor_only():
    lk = Linkage(motor=MotorSpec(center=(0.3, -0.2), radius=0.7, direction=-1))
    target = own_trace_target(lk, 8)
    g = jacobian_adjoint(lk, target)
    assert np.allclose(g, 0.0, atol=1e-14)


def _check_gradient(linkage, target, rel_tol=1e-5):
    g = jacobian_adjoint(linkage, target)
    x0 = param_vector(linkage)
    h = 1e-6 * linkage.box_side

    def f(x):
        return objective(with_params(linkage, x), target).tracking

    fd = central_difference_gradient(f, x0, h)
    mask = np.abs(g) > 1e-8
    assert mask.any()
    rel = np.abs(g[mask] - fd[mask]) / np.abs(g[mask])
    assert np.max(rel) <= rel_tol, (param_names(linkage), np.max(rel))


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(21)
    for n in (4, 5, 6):
        lk = random_linkage(rng, n, T=8)
        target = own_trace_target(lk, 8)
        # perturb the target so the gradient is nonzero
        target = TargetCurve(samples=target.samples + rng.normal(scale=0.05, size=target.samples.shape))
        _check_gradient(lk, target)


def test_gradient_arbitrary_order_matches_fd():
    rng = np.random.default_rng(22)
    lk = random_linkage(rng, 4, T=8)
    samples = own_trace_target(lk, 8).samples + rng.normal(scale=0.03, size=(8, 2))
    target = TargetCurve(samples=samples, mode=ARBITRARY_ORDER)
    _check_gradient(lk, target)


def test_gradient_near_singular_guard():
    margin = 1e-6
    rho = 2.0 - margin  # cos = rho/2 = 1 - margin/2 for unit links
    lk = Linkage(
        motor=MotorSpec(center=(-2.0, 0.0), radius=0.3, direction=1),
        joints=(FixedNode(position=(0.0, 0.0)),
                FixedNode(position=(rho, 0.0)),
                MovableNode(parents=(2, 3), lengths=(1.0, 1.0), orientation=1)),
        box_side=8.0,
    )
    target = own_trace_target(lk, 4)
    with pytest.raises(NearSingular) as exc:
        jacobian_adjoint(lk, target, margin=margin)
    assert exc.value.node == 4


def test_param_vector_roundtrip():
    rng = np.random.default_rng(5)
    lk = random_linkage(rng, 5, T=8)
    vec = param_vector(lk)
    assert len(vec) == len(param_names(lk))
    lk2 = with_params(lk, vec)
    assert np.allclose(trace(lk, 8).positions, trace(lk2, 8).positions)


def test_is_valid_margin():
    assert is_valid(FOUR_BAR, 32)
    bad = Linkage(
        motor=MotorSpec(center=(0, 0), radius=1.0, direction=1),
        joints=(FixedNode(position=(3.0, 0.0)),
                MovableNode(parents=(1, 2), lengths=(2.0, 2.0), orientation=1)),
        box_side=8.0,
    )
    # at t with motor at (0,1): distance to (3,0) is sqrt(10) < 4: fine, but at
    # motor (0,-1)?? keep simple: lengths 2,2 vs max separation 4 -> cos hits +-1
    assert not is_valid(bad, 64)


def test_kinematic_jacobian_dets_match_dense_oracle():
    rng = np.random.default_rng(17)
    lk = random_linkage(rng, 6, T=6)
    traj = trace(lk, 6)
    dets = kinematic_jacobian_dets(lk, traj)
    movable = lk.movable_indices()
    cols = {i: 2 * c for c, i in enumerate([1] + movable)}
    for q in range(6):
        dim = 2 * (1 + len(movable))
        J = np.zeros((dim, dim))
        # motor rows: rotation matrix block (|det| = 1)
        t = traj.times[q]
        s = float(lk.motor.direction)
        J[0:2, 0:2] = np.array([[math.cos(s * t), -math.sin(s * t)],
                                [math.sin(s * t), math.cos(s * t)]])
        for i in movable:
            nd = lk.node(i)
            j, k = nd.parents
            pi = traj.positions[q, i - 1]
            pj = traj.positions[q, j - 1]
            pk = traj.positions[q, k - 1]
            r = cols[i]
            J[r, r:r + 2] = 2 * (pi - pj)
            J[r + 1, r:r + 2] = 2 * (pi - pk)
            for parent, row in ((j, r), (k, r + 1)):
                if parent in cols:
                    c = cols[parent]
                    delta = pi - traj.positions[q, parent - 1]
                    J[row, c:c + 2] = -2 * delta
        assert abs(dets[q]) == pytest.approx(abs(np.linalg.det(J)), rel=1e-9)


def test_linkage_validation_errors():
    with pytest.raises(ValueError):
        Linkage(motor=MotorSpec(radius=-1.0)).validate()
    with pytest.raises(ValueError):
        Linkage(motor=MotorSpec(),
                joints=(MovableNode(parents=(1, 1), lengths=(1, 1), orientation=1),),
                box_side=4.0).validate()
    with pytest.raises(ValueError):
        # fixed end-effector
        Linkage(motor=MotorSpec(), joints=(FixedNode(position=(1, 1)),),
                box_side=4.0).validate()
    with pytest.raises(ValueError):
        MotorSpec(kind="linear", velocity=(0.0, 0.0)).validate()


def test_target_curve_validation():
    with pytest.raises(ValueError):
        TargetCurve(samples=np.zeros((2, 2))).validate()
    with pytest.raises(ValueError):
        TargetCurve(samples=np.array([[0, 0], [1, np.nan], [0, 1]])).validate()
    with pytest.raises(ValueError):
        TargetCurve(samples=np.zeros((4, 2)), mode="sideways").validate()


def test_signed_area_convention():
    # clockwise-rotation convention: d2 = rot_cw(d1) has positive area
    assert signed_area([1.0, 0.0], [0.0, -1.0]) == pytest.approx(1.0)
    assert signed_area([1.0, 0.0], [0.0, 1.0]) == pytest.approx(-1.0)
