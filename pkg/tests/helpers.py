"""Shared test oracles and random-instance generators."""
from __future__ import annotations

import math

import numpy as np

from linkforge.kinematics import (
    FixedNode,
    Linkage,
    MotorSpec,
    MovableNode,
    TargetCurve,
    TriangleInfeasible,
    signed_area,
    trace,
)


def circle_intersection(c1, r1, c2, r2, sign):
    """Independent circle-circle intersection oracle (quadratic construction).

    sign +1 picks the intersection clockwise of the c1->c2 direction, matching
    the law-of-cosine branch convention.
    """
    c1 = np.asarray(c1, dtype=float)
    c2 = np.asarray(c2, dtype=float)
    d = c2 - c1
    rho = math.hypot(d[0], d[1])
    a = (rho * rho + r1 * r1 - r2 * r2) / (2.0 * rho)
    h_sq = r1 * r1 - a * a
    if h_sq <= 0.0 or rho <= 0.0:
        raise ValueError("circles do not strictly intersect")
    h = math.sqrt(h_sq)
    base = c1 + (a / rho) * d
    perp = np.array([-d[1], d[0]]) / rho          # rot_ccw of the unit axis
    return base - sign * h * perp


def random_feasible_triangle(rng, box=2.0, cos_cap=0.9):
    """(nj, nk, lji, lki, sign) with the triangle strictly realizable."""
    while True:
        nj = rng.uniform(-box, box, size=2)
        nk = rng.uniform(-box, box, size=2)
        rho = np.linalg.norm(nk - nj)
        if rho < 0.1:
            continue
        lji = rng.uniform(0.2, 2.0) * rho
        lki = rng.uniform(0.2, 2.0) * rho
        cos = (rho * rho + lji * lji - lki * lki) / (2.0 * rho * lji)
        if abs(cos) < cos_cap:
            return nj, nk, lji, lki, (1 if rng.random() < 0.5 else -1)


def random_linkage(rng, n_nodes, T=16, box_side=4.0, cos_cap=0.85, area_min=0.02,
                   max_tries=2000):
    """Random kinematically well-conditioned linkage with n_nodes nodes.

    Node 2 is fixed, later nodes are movable with random lower parents.  The
    construction rejects candidates whose trace gets close to a triangle
    boundary (cos outside [-cos_cap, cos_cap]) or degenerate in area, so
    finite-difference gradient checks stay trustworthy.
    """
    for _ in range(max_tries):
        motor = MotorSpec(center=tuple(rng.uniform(-0.25, 0.25, size=2)),
                          radius=float(rng.uniform(0.25, 0.5)),
                          direction=1 if rng.random() < 0.5 else -1)
        joints = [FixedNode(position=tuple(rng.uniform(-1.2, 1.2, size=2)))]
        linkage = Linkage(motor=motor, joints=tuple(joints), box_side=box_side)
        ok = True
        for i in range(3, n_nodes + 1):
            linkage, ok = _attach_random_movable(rng, linkage, i, T, cos_cap, area_min)
            if not ok:
                break
        if not ok or linkage.n_nodes != n_nodes:
            continue
        return linkage.validate()
    raise RuntimeError(f"could not generate a valid {n_nodes}-node linkage")


def _attach_random_movable(rng, linkage, i, T, cos_cap, area_min, tries=60):
    base = trace(linkage, T)
    lower = list(range(1, i))
    for _ in range(tries):
        j, k = sorted(rng.choice(lower, size=2, replace=False))
        pj = base.positions[0, j - 1, :]
        pk = base.positions[0, k - 1, :]
        mid = 0.5 * (pj + pk)
        p = mid + rng.normal(scale=0.6, size=2)
        lji = float(np.linalg.norm(p - pj))
        lki = float(np.linalg.norm(p - pk))
        if min(lji, lki) < 0.15 or max(lji, lki) > linkage.box_side:
            continue
        sign = 1 if signed_area(p - pj, p - pk) > 0 else -1
        cand = Linkage(motor=linkage.motor,
                       joints=linkage.joints + (MovableNode(parents=(int(j), int(k)),
                                                            lengths=(lji, lki),
                                                            orientation=sign),),
                       box_side=linkage.box_side, box_center=linkage.box_center)
        try:
            traj = trace(cand, T, margin=1.0 - cos_cap)
        except TriangleInfeasible:
            continue
        d1 = traj.positions[:, i - 1, :] - traj.positions[:, j - 1, :]
        d2 = traj.positions[:, i - 1, :] - traj.positions[:, k - 1, :]
        if np.min(np.abs(signed_area(d1, d2))) < area_min:
            continue
        half = cand.box_side / 2.0
        rel = traj.positions - np.asarray(cand.box_center)
        if np.max(np.abs(rel)) > 0.95 * half:
            continue
        return cand, True
    return linkage, False


def linkage_from_topology(rng, assignment, T=8, box_side=None, box_center=(0.0, 0.0),
                          cos_cap=0.85, area_min=None, max_tries=500):
    """Realize a (U, F, C) topology geometrically (rejection sampling).

    Used slots become linkage nodes in slot order (the end-effector slot K is
    last), so the result maps back onto the same topology key.  Geometry
    scales with the box so curves keep the same shape at any coordinate scale.
    """
    used = [s for s in range(1, assignment.K + 1) if assignment.U[s] == 1]
    node_of_slot = {s: idx + 1 for idx, s in enumerate(used)}
    if box_side is None:
        box_side = 6.0
    scale = box_side / 6.0
    if area_min is None:
        area_min = 0.02 * scale * scale
    for _ in range(max_tries):
        motor = MotorSpec(center=(float(box_center[0] + scale * rng.uniform(-0.2, 0.2)),
                                  float(box_center[1] + scale * rng.uniform(-0.2, 0.2))),
                          radius=float(scale * rng.uniform(0.25, 0.5)),
                          direction=1 if rng.random() < 0.5 else -1)
        linkage = Linkage(motor=motor, joints=(), box_side=box_side, box_center=box_center)
        ok = True
        for s in used[1:]:
            if assignment.F[s] == 1:
                pos = (float(box_center[0] + scale * rng.uniform(-1.2, 1.2)),
                       float(box_center[1] + scale * rng.uniform(-1.2, 1.2)))
                linkage = Linkage(motor=linkage.motor,
                                  joints=linkage.joints + (FixedNode(position=pos),),
                                  box_side=box_side, box_center=box_center)
                continue
            j_slot, k_slot = assignment.parents_of(s)
            lo = min(node_of_slot[j_slot], node_of_slot[k_slot])
            hi = max(node_of_slot[j_slot], node_of_slot[k_slot])
            linkage, ok = _attach_movable_with_parents(rng, linkage, (lo, hi), T,
                                                       cos_cap, area_min)
            if not ok:
                break
        if ok:
            return linkage.validate()
    raise RuntimeError("could not realize the topology geometrically")


def _attach_movable_with_parents(rng, linkage, parents, T, cos_cap, area_min, tries=60):
    i = linkage.n_nodes + 1
    base = trace(linkage, T)
    j, k = parents
    scale = linkage.box_side / 6.0
    for _ in range(tries):
        pj = base.positions[0, j - 1, :]
        pk = base.positions[0, k - 1, :]
        mid = 0.5 * (pj + pk)
        p = mid + rng.normal(scale=0.6 * scale, size=2)
        lji = float(np.linalg.norm(p - pj))
        lki = float(np.linalg.norm(p - pk))
        if min(lji, lki) < 0.15 * scale or max(lji, lki) > linkage.box_side:
            continue
        sign = 1 if signed_area(p - pj, p - pk) > 0 else -1
        cand = Linkage(motor=linkage.motor,
                       joints=linkage.joints + (MovableNode(parents=(j, k),
                                                            lengths=(lji, lki),
                                                            orientation=sign),),
                       box_side=linkage.box_side, box_center=linkage.box_center)
        try:
            traj = trace(cand, T, margin=1.0 - cos_cap)
        except TriangleInfeasible:
            continue
        d1 = traj.positions[:, i - 1, :] - traj.positions[:, j - 1, :]
        d2 = traj.positions[:, i - 1, :] - traj.positions[:, k - 1, :]
        if np.min(np.abs(signed_area(d1, d2))) < area_min:
            continue
        half = cand.box_side / 2.0
        rel = traj.positions - np.asarray(cand.box_center)
        if np.max(np.abs(rel)) > 0.9 * half:
            continue
        return cand, True
    return linkage, False


def planted_linkage(rng, K, T=8, box_side=6.0):
    """Random valid linkage drawn from the enumerated K-slot topologies."""
    from linkforge.topology import enumerate_topologies

    options = list(enumerate_topologies(K))
    assignment = options[int(rng.integers(len(options)))]
    return linkage_from_topology(rng, assignment, T=T, box_side=box_side)


def lp_forward_feasible(U, F, C, K):
    """LP feasibility of the forward flux balance system (scipy oracle)."""
    from scipy.optimize import linprog

    edges = [(j, i) for i in range(2, K + 1) for j in range(1, i)]
    idx = {e: n for n, e in enumerate(edges)}
    A_eq = []
    b_eq = []
    for i in range(1, K):
        row = np.zeros(len(edges))
        for j in range(1, i):
            row[idx[(j, i)]] = 1.0
        for k in range(i + 1, K + 1):
            row[idx[(i, k)]] = -1.0
        A_eq.append(row)
        b_eq.append(-float(U[i]))
    bounds = [(0.0, float(C[j, i]) * K) for (j, i) in edges]
    res = linprog(np.zeros(len(edges)), A_eq=np.array(A_eq), b_eq=np.array(b_eq),
                  bounds=bounds, method="highs")
    return res.status == 0


def lp_reverse_feasible(U, F, C, K):
    """LP feasibility of the reverse (movable-chain) flux system."""
    from scipy.optimize import linprog

    edges = [(j, i) for i in range(2, K + 1) for j in range(1, i)]
    idx = {e: n for n, e in enumerate(edges)}
    A_eq = []
    b_eq = []
    for i in range(2, K + 1):
        row = np.zeros(len(edges))
        for j in range(1, i):
            row[idx[(j, i)]] = 1.0
        for k in range(i + 1, K + 1):
            row[idx[(i, k)]] = -1.0
        A_eq.append(row)
        b_eq.append(1.0 - float(F[i]))
    bounds = [(0.0, min(float(C[j, i]), 1.0 - float(F[j])) * K) for (j, i) in edges]
    res = linprog(np.zeros(len(edges)), A_eq=np.array(A_eq), b_eq=np.array(b_eq),
                  bounds=bounds, method="highs")
    return res.status == 0


def central_difference_gradient(func, x0, h):
    """Central finite differences of a scalar function (independent oracle)."""
    x0 = np.asarray(x0, dtype=float)
    g = np.zeros_like(x0)
    for i in range(len(x0)):
        xp = x0.copy()
        xm = x0.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (func(xp) - func(xm)) / (2.0 * h)
    return g


def own_trace_target(linkage, T, mode="fixed"):
    traj = trace(linkage, T)
    return TargetCurve(samples=traj.end_effector().copy(), mode=mode)
