"""Constructive variable assignments: from a traced linkage into each model.

These are the witnesses used by the validator and the soundness tests: given a
kinematically valid linkage and its trajectory, fill every model variable
(including SOS auxiliaries and selector bits) so the corresponding model is
satisfied exactly.
"""
from __future__ import annotations

import math

import numpy as np

from ..kinematics import LINEAR, ROTARY, trace
from ..topology import assignment_from_linkage
from .build import breakpoints, pwl_families, vn_C, vn_F, vn_Q, vn_R, vn_U, vn_dv, vn_pos, vn_sq
from .sectors import angular_margin, sector_table
from .sos import n_bits, sos1_bit_values, sos2_weights


class SectorMarginError(ValueError):
    """A traced triangle has no admitting sector (angle too close to 0 or pi)."""


def _slack_offsets(cfg):
    """Offsets for triangles of fixed/unused slots: comfortable positive area."""
    c = min(cfg.box_side / 2.0, math.sqrt(2.0 * cfg.eps_area))
    return np.array([c, 0.0]), np.array([0.0, -c])


def _selector_bits(values, assignment, K):
    for i in range(2, K + 1):
        for d in (1, 2):
            Cd = assignment.C1 if d == 1 else assignment.C2
            member = next(j for j in range(0, i) if Cd[j, i] == 1)
            for b, bit in enumerate(sos1_bit_values(member, i), start=1):
                values[f"IC{d}_{i}_b{b}"] = float(bit)


def topology_values(assignment):
    """Variable values (bits included) for a topological fragment."""
    K = assignment.K
    values = {}
    for i in range(1, K + 1):
        values[vn_U(i)] = float(assignment.U[i])
        values[vn_F(i)] = float(assignment.F[i])
    for i in range(2, K + 1):
        for d in (1, 2):
            Cd = assignment.C1 if d == 1 else assignment.C2
            for j in range(0, i):
                values[vn_C(d, j, i)] = float(Cd[j, i])
        for j in range(1, i):
            values[vn_Q(j, i)] = float(assignment.Q[j, i])
            values[vn_R(j, i)] = float(assignment.R[j, i])
    _selector_bits(values, assignment, K)
    values["D"] = float(assignment.D)
    return values


def base_assignment(cfg, linkage, trajectory=None):
    """Topology bits, node positions, offsets and motor variables."""
    if trajectory is None:
        trajectory = trace(linkage, cfg.T)
    if trajectory.n_samples != cfg.T:
        raise ValueError("trajectory sample count must match cfg.T")
    topo = assignment_from_linkage(linkage, cfg.K)
    n = linkage.n_nodes
    slot_of = {i: (cfg.K if i == n else i) for i in range(1, n + 1)}
    node_of = {s: i for i, s in slot_of.items()}
    values = {}
    for i in range(1, cfg.K + 1):
        values[vn_U(i)] = float(topo.U[i])
        values[vn_F(i)] = float(topo.F[i])
    for i in range(2, cfg.K + 1):
        for d in (1, 2):
            Cd = topo.C1 if d == 1 else topo.C2
            for j in range(0, i):
                values[vn_C(d, j, i)] = float(Cd[j, i])
        for j in range(1, i):
            values[vn_Q(j, i)] = float(topo.Q[j, i])
            values[vn_R(j, i)] = float(topo.R[j, i])
    _selector_bits(values, topo, cfg.K)
    values["D"] = float(topo.D)

    cx, cy = cfg.box_center
    pos = {}
    for s in range(1, cfg.K + 1):
        if s in node_of:
            path = trajectory.node_path(node_of[s])
        else:
            path = np.tile([cx, cy], (cfg.T, 1))
        pos[s] = path
        for q in range(1, cfg.T + 1):
            values[vn_pos(s, q, "x")] = float(path[q - 1, 0])
            values[vn_pos(s, q, "y")] = float(path[q - 1, 1])

    slack1, slack2 = _slack_offsets(cfg)
    center = np.array(linkage.motor.center, dtype=float)
    for d, s in pwl_families(cfg):
        if s == 1:
            dv = pos[1] - center
        else:
            parents = topo.parents_of(s)
            if parents is not None:
                j = parents[0] if d == 1 else parents[1]
                dv = pos[s] - pos[j]
            else:
                dv = np.tile(slack1 if d == 1 else slack2, (cfg.T, 1))
        for q in range(1, cfg.T + 1):
            values[vn_dv(d, s, q, "x")] = float(dv[q - 1, 0])
            values[vn_dv(d, s, q, "y")] = float(dv[q - 1, 1])

    values["XC"] = float(center[0])
    values["YC"] = float(center[1])
    if linkage.motor.kind == LINEAR:
        values["XV"] = float(linkage.motor.velocity[0])
        values["YV"] = float(linkage.motor.velocity[1])
    return values


def exact_assignment(cfg, linkage, trajectory=None):
    return base_assignment(cfg, linkage, trajectory)


def minlp_assignment(cfg, linkage, trajectory=None):
    """Exact assignment plus first-sample block weights."""
    values = base_assignment(cfg, linkage, trajectory)
    alphas = breakpoints(cfg)
    for i in range(3, cfg.K + 1):
        for d in (1, 2):
            for c in ("x", "y"):
                v = values[vn_dv(d, i, 1, c)]
                weights, seg = sos2_weights(v, alphas)
                for s, w in enumerate(weights):
                    values[f"blk{d}_{i}_{c}_{s}"] = w
                _fill_sos2_aux(values, f"blk{d}_{i}_{c}", seg, cfg.S)
    return values


def micp_assignment(cfg, linkage, trajectory=None):
    """Exact assignment augmented with chord weights and sector selectors.

    Raises SectorMarginError when a traced triangle's opening angle leaves no
    admitting sector; callers generating test linkages keep angles inside the
    safe band.
    """
    values = base_assignment(cfg, linkage, trajectory)
    alphas = breakpoints(cfg)
    for d, i in pwl_families(cfg):
        for q in range(1, cfg.T + 1):
            for c in ("x", "y"):
                v = values[vn_dv(d, i, q, c)]
                weights, seg = sos2_weights(v, alphas)
                for s, w in enumerate(weights):
                    values[f"lam{d}_{i}_q{q}_{c}_{s}"] = w
                _fill_sos2_aux(values, f"lam{d}_{i}_q{q}_{c}", seg, cfg.S)
                values[vn_sq(d, i, q, c)] = sum(w * alphas[s] ** 2
                                                for s, w in enumerate(weights))
    table = sector_table(cfg.S, angular_margin(cfg.eps_area, cfg.box_side))
    for i in range(2, cfg.K + 1):
        for q in range(1, cfg.T + 1):
            d1 = np.array([values[vn_dv(1, i, q, "x")], values[vn_dv(1, i, q, "y")]])
            d2 = np.array([values[vn_dv(2, i, q, "x")], values[vn_dv(2, i, q, "y")]])
            sec = table.best_sector(d1, d2)
            if sec is None:
                raise SectorMarginError(
                    f"slot {i} sample {q}: no sector admits the offset pair")
            for l in range(1, 2 * cfg.S + 1):
                values[f"gam_{i}_q{q}_{l}"] = 1.0 if l == sec.index else 0.0
            for b, bit in enumerate(sos1_bit_values(sec.index - 1, 2 * cfg.S), start=1):
                values[f"Igam_{i}_q{q}_b{b}"] = float(bit)
    return values


def _fill_sos2_aux(values, prefix, seg, S):
    for s in range(S):
        values[f"{prefix}_s{s}"] = 1.0 if s == seg else 0.0
    for b, bit in enumerate(sos1_bit_values(seg, S), start=1):
        values[f"{prefix}_seg_b{b}"] = float(bit)


def restrict_to_model(model, values):
    """Drop extras and verify coverage (validator raises on gaps anyway)."""
    return {name: values[name] for name in model.variables if name in values}
