"""Builders for the discretized synthesis program and its relaxations.

Variables use maximal coordinates: per-slot per-sample node positions n_i(t^q),
per-link slack offsets dv_d_i(t^q), and the motor center.  build_topological
emits the four combinatorial constraint sets, build_geometric_exact the
non-convex geometry, build_micp_relaxation swaps the non-convex rows for their
piecewise-linear / sector counterparts, and build_minlp adds the first-sample
block-selection families on top of the exact geometry.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..kinematics import ARBITRARY_ORDER, FIXED_ORDER, LINEAR, ROTARY, sample_times
from .ir import BINARY, CONTINUOUS, EQ, GE, LE, ModelBuilder
from .sectors import angular_margin, sector_table
from .sos import encode_sos1, encode_sos2, n_bits


@dataclass(frozen=True)
class SynthesisConfig:
    """Shared knobs of every model build.

    epsilon is the signed-area margin (curve units squared); lam weighs the
    node-count regularizer; S controls both the piecewise-linear resolution
    and the sector count (2S) of the relaxations.
    """

    K: int = 7
    T: int = 20
    S: int = 8
    box_side: float = 4.0
    box_center: tuple = (0.0, 0.0)
    epsilon: float | None = None
    lam: float = 0.0
    motor_kind: str = ROTARY
    curve_mode: str = FIXED_ORDER
    target_samples: tuple = ()          # ((x, y), ...) with len == T when present
    node_boxes: tuple = ()              # boxes (x0, y0, x1, y1) for non-end-effector nodes

    @property
    def eps_area(self):
        return self.epsilon if self.epsilon is not None else 1e-3 * self.box_side ** 2

    def validate(self):
        if self.K < 2:
            raise ValueError("need K >= 2 (motor plus end-effector slot)")
        if self.T < 3:
            raise ValueError("need T >= 3 trajectory samples")
        if self.S < 1:
            raise ValueError("need S >= 1 relaxation pieces")
        if self.box_side <= 0:
            raise ValueError("box side must be positive")
        if self.eps_area <= 0:
            raise ValueError("area margin must be positive")
        if self.lam < 0:
            raise ValueError("regularization weight must be nonnegative")
        if self.motor_kind not in (ROTARY, LINEAR):
            raise ValueError(f"unknown motor kind {self.motor_kind!r}")
        if self.curve_mode not in (FIXED_ORDER, ARBITRARY_ORDER):
            raise ValueError(f"unknown curve mode {self.curve_mode!r}")
        if self.target_samples and len(self.target_samples) != self.T:
            raise ValueError("target sample count must equal T")
        return self

    @classmethod
    def for_target(cls, target, K=7, S=8, lam=None, **kwargs):
        from ..targets import default_box, default_lambda

        B, center = default_box(target.samples)
        return cls(K=K, T=target.n_samples, S=S, box_side=B, box_center=center,
                   lam=default_lambda(target.samples) if lam is None else lam,
                   curve_mode=target.mode,
                   target_samples=tuple((float(x), float(y)) for x, y in target.samples),
                   **kwargs).validate()


# variable name helpers (bracket-free so LP export keeps the identifiers)

def vn_U(i):
    return f"U_{i}"


def vn_F(i):
    return f"F_{i}"


def vn_C(d, j, i):
    return f"C{d}_{j}_{i}"


def vn_Q(j, i):
    return f"Q_{j}_{i}"


def vn_R(j, i):
    return f"R_{j}_{i}"


def vn_pos(i, q, c):
    return f"n_{i}_{q}_{c}"


def vn_dv(d, i, q, c):
    return f"dv{d}_{i}_{q}_{c}"


def vn_sq(d, i, q, c):
    return f"sq{d}_{i}_{q}_{c}"


def movable_capable(i):
    """Slots that can host a movable node (two distinct lower parents exist)."""
    return i >= 3


def breakpoints(cfg):
    """Grid alpha_s = s*B/S - B/2 shared by the relaxations."""
    B, S = cfg.box_side, cfg.S
    return [s * B / S - B / 2.0 for s in range(S + 1)]


def pwl_families(cfg):
    """(d, i) offset vectors carrying equal-length rows, motor slot included."""
    fams = []
    if cfg.motor_kind == ROTARY:
        fams.append((1, 1))
    for i in range(2, cfg.K + 1):
        fams.append((1, i))
        fams.append((2, i))
    return fams


def build_topological(cfg, builder=None):
    """The four combinatorial constraint sets over U, F, C, Q, R."""
    cfg.validate()
    K = cfg.K
    own = builder is None
    b = builder or ModelBuilder(kind="topological-fragment")
    for i in range(1, K + 1):
        b.var(vn_U(i), BINARY, 0.0, 1.0, role="usage")
        b.var(vn_F(i), BINARY, 0.0, 1.0, role="fixed")
    for i in range(2, K + 1):
        for d in (1, 2):
            for j in range(0, i):
                b.var(vn_C(d, j, i), CONTINUOUS, 0.0, 1.0, role="selector")
        for j in range(1, i):
            b.var(vn_Q(j, i), CONTINUOUS, 0.0, float(K), role="flux")
            b.var(vn_R(j, i), CONTINUOUS, 0.0, float(K), role="flux")

    # NodeUsage: pinned motor/end-effector bits plus "used nodes may move"
    b.lin("state_U1", [(vn_U(1), 1.0)], EQ, 1.0, "NodeUsage")
    b.lin(f"state_U{K}", [(vn_U(K), 1.0)], EQ, 1.0, "NodeUsage")
    b.lin("state_F1", [(vn_F(1), 1.0)], EQ, 0.0, "NodeUsage")
    for i in range(2, K + 1):
        b.lin(f"state_UF_{i}", [(vn_U(i), 1.0), (vn_F(i), 1.0)], GE, 1.0, "NodeUsage")

    # NodeConnectivity: selector sums, link caps, parent-usage caps, degree
    for i in range(2, K + 1):
        for d in (1, 2):
            members = [vn_C(d, j, i) for j in range(0, i)]
            b.lin(f"conn_sum{d}_{i}", [(m, 1.0) for m in members], EQ, 1.0,
                  "NodeConnectivity")
            encode_sos1(members, builder=b, prefix=f"IC{d}_{i}", tag="NodeConnectivity")
        for j in range(1, i):
            b.lin(f"conn_cap_{j}_{i}",
                  [(vn_C(1, j, i), 1.0), (vn_C(2, j, i), 1.0)], LE, 1.0,
                  "NodeConnectivity")
            for d in (1, 2):
                b.lin(f"conn_used{d}_{j}_{i}",
                      [(vn_C(d, j, i), 1.0), (vn_U(j), -1.0)], LE, 0.0,
                      "NodeConnectivity")
        degree = [(vn_C(d, j, i), 1.0) for j in range(1, i) for d in (1, 2)]
        b.lin(f"conn_degree_{i}", degree + [(vn_F(i), 2.0)], EQ, 2.0,
              "NodeConnectivity")

    # NoWaste: forward flux capacities and balances
    for i in range(2, K + 1):
        for j in range(1, i):
            b.lin(f"flux_cap_{j}_{i}",
                  [(vn_Q(j, i), 1.0), (vn_C(1, j, i), -float(K)), (vn_C(2, j, i), -float(K))],
                  LE, 0.0, "NoWaste")
    for i in range(1, K):
        terms = [(vn_U(i), 1.0)]
        terms += [(vn_Q(j, i), 1.0) for j in range(1, i)]
        terms += [(vn_Q(i, k), -1.0) for k in range(i + 1, K + 1)]
        b.lin(f"flux_balance_{i}", terms, EQ, 0.0, "NoWaste")

    # MovableNode: reverse flux capacities and balances
    for i in range(2, K + 1):
        for j in range(1, i):
            b.lin(f"rflux_cap_{j}_{i}",
                  [(vn_R(j, i), 1.0), (vn_C(1, j, i), -float(K)), (vn_C(2, j, i), -float(K))],
                  LE, 0.0, "MovableNode")
            b.lin(f"rflux_movable_{j}_{i}",
                  [(vn_R(j, i), 1.0), (vn_F(j), float(K))], LE, float(K), "MovableNode")
    for i in range(2, K + 1):
        terms = [(vn_R(j, i), 1.0) for j in range(1, i)]
        terms += [(vn_F(i), 1.0)]
        terms += [(vn_R(i, k), -1.0) for k in range(i + 1, K + 1)]
        b.lin(f"rflux_balance_{i}", terms, EQ, 1.0, "MovableNode")

    if own:
        m = b.finish()
        m.metadata["binaryBudget"] = cfg.K * max(1, n_bits(cfg.K))
        return m
    return b.model


def _bounds_for_node(cfg, i):
    cx, cy = cfg.box_center
    half = cfg.box_side / 2.0
    x0, y0, x1, y1 = cx - half, cy - half, cx + half, cy + half
    if i < cfg.K:
        for bx0, by0, bx1, by1 in cfg.node_boxes:
            x0, y0 = max(x0, bx0), max(y0, by0)
            x1, y1 = min(x1, bx1), min(y1, by1)
    return (x0, x1), (y0, y1)


def _emit_geometric(cfg, b, relaxed):
    """Geometric constraint sets; ``relaxed`` swaps the non-convex rows."""
    K, T, B = cfg.K, cfg.T, cfg.box_side
    M2 = 8.0 * B * B          # (2*sqrt(2)*B)^2, the squared big-M gate
    times = sample_times(T)

    # referenced combinatorial variables (merged by name when composed)
    for i in range(2, K + 1):
        b.var(vn_F(i), BINARY, 0.0, 1.0, role="fixed")
        for d in (1, 2):
            for j in range(1, i):
                b.var(vn_C(d, j, i), CONTINUOUS, 0.0, 1.0, role="selector")
    b.var(vn_F(1), BINARY, 0.0, 1.0, role="fixed")

    for i in range(1, K + 1):
        (x0, x1), (y0, y1) = _bounds_for_node(cfg, i)
        for q in range(1, T + 1):
            b.var(vn_pos(i, q, "x"), CONTINUOUS, x0, x1, role="position")
            b.var(vn_pos(i, q, "y"), CONTINUOUS, y0, y1, role="position")
    for d, i in pwl_families(cfg):
        for q in range(1, T + 1):
            for c in ("x", "y"):
                b.var(vn_dv(d, i, q, c), CONTINUOUS, -B / 2.0, B / 2.0, role="offset")

    def nxt(q):
        return q % T + 1

    # Realizability: big-M link gating
    for i in range(2, K + 1):
        for d in (1, 2):
            for j in range(1, i):
                cji = vn_C(d, j, i)
                for q in range(1, T + 1):
                    comps = [[(vn_pos(i, q, "x"), 1.0), (vn_pos(j, q, "x"), -1.0),
                              (vn_dv(d, i, q, "x"), -1.0)],
                             [(vn_pos(i, q, "y"), 1.0), (vn_pos(j, q, "y"), -1.0),
                              (vn_dv(d, i, q, "y"), -1.0)]]
                    b.sq_norm_le(f"gate{d}_{j}_{i}_q{q}", comps,
                                 [(cji, -M2)], M2, "Realizability")

    # Realizability: fixed nodes may not move
    for i in range(2, K + 1):
        fi = vn_F(i)
        for q in range(1, T + 1):
            comps = [[(vn_pos(i, q, "x"), 1.0), (vn_pos(i, nxt(q), "x"), -1.0)],
                     [(vn_pos(i, q, "y"), 1.0), (vn_pos(i, nxt(q), "y"), -1.0)]]
            b.sq_norm_le(f"fix_{i}_q{q}", comps, [(fi, -M2)], M2, "Realizability")

    if not relaxed:
        # Realizability: exact equal-length chain (cyclic in q)
        for d, i in pwl_families(cfg):
            for q in range(1, T + 1):
                p = nxt(q)
                b.quad(f"eqlen{d}_{i}_q{q}",
                       [(vn_dv(d, i, q, "x"), vn_dv(d, i, q, "x"), 1.0),
                        (vn_dv(d, i, q, "y"), vn_dv(d, i, q, "y"), 1.0),
                        (vn_dv(d, i, p, "x"), vn_dv(d, i, p, "x"), -1.0),
                        (vn_dv(d, i, p, "y"), vn_dv(d, i, p, "y"), -1.0)],
                       [], EQ, 0.0, "Realizability", convex=False)
        # Area: signed area of every candidate triangle bounded below
        for i in range(2, K + 1):
            for q in range(1, T + 1):
                b.quad(f"area_{i}_q{q}",
                       [(vn_dv(1, i, q, "y"), vn_dv(2, i, q, "x"), 1.0),
                        (vn_dv(1, i, q, "x"), vn_dv(2, i, q, "y"), -1.0)],
                       [], GE, cfg.eps_area, "Area", convex=False)
    else:
        _emit_pwl_relaxation(cfg, b)
        _emit_sector_relaxation(cfg, b)

    _emit_motor(cfg, b, times)


def _emit_motor(cfg, b, times):
    K, T, B = cfg.K, cfg.T, cfg.box_side
    M2 = 8.0 * B * B
    cx, cy = cfg.box_center
    half = B / 2.0
    b.var("XC", CONTINUOUS, cx - half, cx + half, role="motor")
    b.var("YC", CONTINUOUS, cy - half, cy + half, role="motor")
    if cfg.motor_kind == LINEAR:
        # linear motors replace the rotation system with a line parameterization
        b.var("XV", CONTINUOUS, -B, B, role="motor")
        b.var("YV", CONTINUOUS, -B, B, role="motor")
        for q in range(1, T + 1):
            t = float(times[q - 1])
            b.lin(f"motor_line_x_q{q}",
                  [(vn_pos(1, q, "x"), 1.0), ("XC", -1.0), ("XV", -t)], EQ, 0.0, "Motor")
            b.lin(f"motor_line_y_q{q}",
                  [(vn_pos(1, q, "y"), 1.0), ("YC", -1.0), ("YV", -t)], EQ, 0.0, "Motor")
        return
    # rotary: dv1_1 is the spoke vector n_1 - center
    for q in range(1, T + 1):
        b.lin(f"motor_def_x_q{q}",
              [(vn_dv(1, 1, q, "x"), 1.0), (vn_pos(1, q, "x"), -1.0), ("XC", 1.0)],
              EQ, 0.0, "Motor")
        b.lin(f"motor_def_y_q{q}",
              [(vn_dv(1, 1, q, "y"), 1.0), (vn_pos(1, q, "y"), -1.0), ("YC", 1.0)],
              EQ, 0.0, "Motor")
    if cfg.curve_mode == ARBITRARY_ORDER:
        # no rotation-order rows: the radius stays tied by the equal-length set
        return
    b.var("D", BINARY, 0.0, 1.0, role="motor")
    for q in range(1, T):
        t = float(times[q - 1])
        cos_t, sin_t = math.cos(t), math.sin(t)
        qx, qy = vn_dv(1, 1, q, "x"), vn_dv(1, 1, q, "y")
        tx, ty = vn_dv(1, 1, T, "x"), vn_dv(1, 1, T, "y")
        # counter-clockwise rotation by +t recovers the t=2*pi spoke when D=0
        comps = [[(qx, cos_t), (qy, -sin_t), (tx, -1.0)],
                 [(qx, sin_t), (qy, cos_t), (ty, -1.0)]]
        b.sq_norm_le(f"motor_rot0_q{q}", comps, [("D", M2)], 0.0, "Motor")
        comps = [[(qx, cos_t), (qy, sin_t), (tx, -1.0)],
                 [(qx, -sin_t), (qy, cos_t), (ty, -1.0)]]
        b.sq_norm_le(f"motor_rot1_q{q}", comps, [("D", -M2)], M2, "Motor")


def _emit_pwl_relaxation(cfg, b):
    """Equal-length rows replaced by chord over-estimators tied via SOS2."""
    T, B, S = cfg.T, cfg.box_side, cfg.S
    alphas = breakpoints(cfg)

    def nxt(q):
        return q % T + 1

    for d, i in pwl_families(cfg):
        for q in range(1, T + 1):
            for c in ("x", "y"):
                fam = [b.var(f"lam{d}_{i}_q{q}_{c}_{s}", CONTINUOUS, 0.0, 1.0,
                             role="pwl-weight") for s in range(S + 1)]
                b.var(vn_sq(d, i, q, c), CONTINUOUS, 0.0, B * B / 4.0, role="pwl-square")
                b.lin(f"pwl_tie{d}_{i}_q{q}_{c}",
                      [(vn_dv(d, i, q, c), 1.0)] + [(f, -alphas[s]) for s, f in enumerate(fam)],
                      EQ, 0.0, "PWLBound")
                b.lin(f"pwl_chord{d}_{i}_q{q}_{c}",
                      [(vn_sq(d, i, q, c), 1.0)] + [(f, -alphas[s] ** 2) for s, f in enumerate(fam)],
                      EQ, 0.0, "PWLBound")
                b.lin(f"pwl_sum{d}_{i}_q{q}_{c}", [(f, 1.0) for f in fam], EQ, 1.0,
                      "PWLBound")
                encode_sos2(fam, builder=b, prefix=f"lam{d}_{i}_q{q}_{c}", tag="PWLBound")
        for q in range(1, T + 1):
            p = nxt(q)
            b.sq_norm_le(f"lenrel_a{d}_{i}_q{q}",
                         [[(vn_dv(d, i, q, "x"), 1.0)], [(vn_dv(d, i, q, "y"), 1.0)]],
                         [(vn_sq(d, i, p, "x"), 1.0), (vn_sq(d, i, p, "y"), 1.0)],
                         0.0, "PWLBound")
            b.sq_norm_le(f"lenrel_b{d}_{i}_q{q}",
                         [[(vn_dv(d, i, p, "x"), 1.0)], [(vn_dv(d, i, p, "y"), 1.0)]],
                         [(vn_sq(d, i, q, "x"), 1.0), (vn_sq(d, i, q, "y"), 1.0)],
                         0.0, "PWLBound")


def _emit_sector_relaxation(cfg, b):
    """Area rows replaced by the double-covered sector selector system."""
    K, T, B, S = cfg.K, cfg.T, cfg.box_side, cfg.S
    table = sector_table(S, angular_margin(cfg.eps_area, B))
    big = math.sqrt(2.0) * B
    for i in range(2, K + 1):
        for q in range(1, T + 1):
            flags = [b.var(f"gam_{i}_q{q}_{l}", CONTINUOUS, 0.0, 1.0, role="sector-flag")
                     for l in range(1, 2 * S + 1)]
            d1x, d1y = vn_dv(1, i, q, "x"), vn_dv(1, i, q, "y")
            d2x, d2y = vn_dv(2, i, q, "x"), vn_dv(2, i, q, "y")
            for sec, g in zip(table.sectors, flags):
                l = sec.index
                b.lin(f"sec_in1_{i}_q{q}_{l}",
                      [(d1x, -sec.v_left[0]), (d1y, -sec.v_left[1]), (g, big)],
                      LE, big, "Sector")
                b.lin(f"sec_in2_{i}_q{q}_{l}",
                      [(d1x, sec.v_right[0]), (d1y, sec.v_right[1]), (g, big)],
                      LE, big, "Sector")
                b.lin(f"sec_cone1_{i}_q{q}_{l}",
                      [(d2x, sec.a_left[0]), (d2y, sec.a_left[1]), (g, big)],
                      LE, big, "Sector")
                b.lin(f"sec_cone2_{i}_q{q}_{l}",
                      [(d2x, -sec.a_right[0]), (d2y, -sec.a_right[1]), (g, big)],
                      LE, big, "Sector")
            b.lin(f"sec_sum_{i}_q{q}", [(g, 1.0) for g in flags], EQ, 1.0, "Sector")
            encode_sos1(flags, builder=b, prefix=f"Igam_{i}_q{q}", tag="Sector")


def _emit_blocks(cfg, b):
    """First-sample block selection: dv_d_i(t^1) pinned onto the S x S grid."""
    alphas = breakpoints(cfg)
    for i in range(3, cfg.K + 1):
        for d in (1, 2):
            for c in ("x", "y"):
                fam = [b.var(f"blk{d}_{i}_{c}_{s}", CONTINUOUS, 0.0, 1.0,
                             role="block-weight") for s in range(cfg.S + 1)]
                b.lin(f"blk_tie{d}_{i}_{c}",
                      [(vn_dv(d, i, 1, c), 1.0)] + [(f, -alphas[s]) for s, f in enumerate(fam)],
                      EQ, 0.0, "InitBlock")
                b.lin(f"blk_sum{d}_{i}_{c}", [(f, 1.0) for f in fam], EQ, 1.0,
                      "InitBlock")
                encode_sos2(fam, builder=b, prefix=f"blk{d}_{i}_{c}", tag="InitBlock")


def _emit_objective(cfg, b):
    """Discretized tracking objective plus the node-count regularizer."""
    T, K = cfg.T, cfg.K
    w = 2.0 * math.pi / T
    quad = []
    lin = [(vn_U(i), cfg.lam) for i in range(1, K + 1)]
    constant = 0.0
    if cfg.target_samples:
        for q in range(1, T + 1):
            tx, ty = cfg.target_samples[q - 1]
            for c, tv in (("x", tx), ("y", ty)):
                v = vn_pos(K, q, c)
                quad.append((v, v, w))
                lin.append((v, -2.0 * w * tv))
                constant += w * tv * tv
    b.model.objective.quad = tuple(quad)
    b.model.objective.lin = tuple(lin)
    b.model.objective.constant = constant


def build_geometric_exact(cfg, builder=None):
    """Exact (non-convex) geometric fragment, self-contained."""
    cfg.validate()
    own = builder is None
    b = builder or ModelBuilder(kind="geometric-exact-fragment")
    _emit_geometric(cfg, b, relaxed=False)
    return b.finish() if own else b.model


def build_micp_relaxation(cfg):
    """Full convex-per-integer-assignment model (export-oriented)."""
    cfg.validate()
    b = ModelBuilder(kind="micp")
    build_topological(cfg, builder=b)
    _emit_geometric(cfg, b, relaxed=True)
    _emit_objective(cfg, b)
    m = b.finish()
    m.metadata["binaryBudget"] = (cfg.K * n_bits(cfg.K)
                                  + 4 * cfg.T * cfg.K * n_bits(cfg.S)
                                  + cfg.T * cfg.K * n_bits(2 * cfg.S))
    m.metadata["S"] = cfg.S
    m.metadata["pwlMaxGap"] = cfg.box_side ** 2 / (4.0 * cfg.S ** 2)
    return m


def build_minlp(cfg):
    """Exact model plus the q=1 block-selection relaxation (solver-oriented)."""
    cfg.validate()
    b = ModelBuilder(kind="minlp")
    build_topological(cfg, builder=b)
    _emit_geometric(cfg, b, relaxed=False)
    _emit_blocks(cfg, b)
    _emit_objective(cfg, b)
    m = b.finish()
    m.metadata["binaryBudget"] = cfg.K * n_bits(cfg.K) + 4 * cfg.K * n_bits(cfg.S)
    m.metadata["S"] = cfg.S
    return m
