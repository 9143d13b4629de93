"""Local continuous optimization of node trajectories with frozen topology.

Phase-I restores feasibility of the exact geometric constraints (equal link
lengths, positive triangle areas, offset bounds, optional block boxes);
phase-II then minimizes the tracking objective from a feasible point.  Both
run an augmented-Lagrangian outer loop around projected spectral-gradient
inner solves with monotone Armijo backtracking; everything is evaluated in
box-scaled coordinates so tolerances are dimensionless.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .kinematics import (
    ARBITRARY_ORDER,
    LINEAR,
    ROTARY,
    FixedNode,
    Linkage,
    MotorSpec,
    MovableNode,
    NearSingular,
    jacobian_adjoint,
    match_arbitrary,
    objective,
    objective_or_inf,
    param_vector,
    sample_times,
    with_params,
)

FEAS_TOL = 1e-6          # scaled units: corresponds to 1e-6 * B in curve units
STAT_TOL = 1e-5


@dataclass
class NlpOptions:
    max_outer: int = 50
    max_inner: int = 200
    feas_tol: float = FEAS_TOL
    stat_tol: float = STAT_TOL
    penalty0: float = 10.0
    penalty_growth: float = 5.0
    penalty_cap: float = 1e8
    armijo_c: float = 1e-4
    backtrack: float = 0.5
    max_backtracks: int = 30
    log_steps: bool = False
    should_stop: object = None    # optional callable polled at iteration boundaries


@dataclass(frozen=True)
class FrozenStructure:
    """Topology decisions the NLP treats as constants.

    motor_mode "parametric" pins node 1 to the uniform rotation (or line) of
    the motor model; "floating" leaves its samples as free variables, a valid
    relaxation used while the spin direction is still undecided.
    """

    K: int
    used: tuple
    fixed: tuple                   # used slots holding fixed nodes
    movable: tuple                 # used non-motor movable slots, ascending
    parents: dict                  # movable slot -> (slot-1 parent, slot-2 parent)
    direction: int = 1             # motor spin sign
    motor_kind: str = ROTARY
    motor_mode: str = "parametric"
    floating: tuple = ()           # used slots solved as free per-sample points

    @classmethod
    def from_assignment(cls, a, motor_kind=ROTARY):
        used = tuple(s for s in range(1, a.K + 1) if a.U[s] == 1)
        fixed = tuple(s for s in used if s >= 2 and a.F[s] == 1)
        movable = tuple(s for s in used if s >= 2 and a.F[s] == 0)
        parents = {}
        for s in movable:
            p = a.parents_of(s)
            if p is None:
                raise ValueError(f"slot {s} marked movable but has no parent pair")
            parents[s] = p
        return cls(K=a.K, used=used, fixed=fixed, movable=movable, parents=parents,
                   direction=1 if a.D == 0 else -1, motor_kind=motor_kind)

    def links(self):
        out = []
        for s in self.movable:
            j, k = self.parents[s]
            out.append((s, j))
            out.append((s, k))
        return out


@dataclass
class NlpResult:
    status: str                    # feasible | infeasible | iteration-limit
    point: dict                    # slot -> positions; "motor" -> parameter array
    max_violation: float           # scaled residual norm
    objective: float               # unscaled tracking value
    iterations: int
    log: list = field(default_factory=list)

    @property
    def feasible(self):
        return self.status == "feasible"


class GeometricNlp:
    """Exact geometric constraints for one frozen structure, box-scaled."""

    def __init__(self, structure, T, box_side, box_center, eps_area, target=None,
                 lam=0.0, blocks=None, node_boxes=(), curve_mode=None):
        self.structure = structure
        self.T = T
        self.B = float(box_side)
        self.center = np.asarray(box_center, dtype=float)
        # small inner safety so tolerance-level slack never dips areas below
        # the model's margin (keeps the singularity bound exact on extracts)
        self.eps = eps_area / (self.B * self.B) + 2.0 * FEAS_TOL
        self.lam = lam
        self.times = sample_times(T)
        self._sin = np.sin(self.times)
        self._cos = np.cos(self.times)
        self.curve_mode = curve_mode or (target.mode if target is not None else "fixed")
        if target is not None:
            self.target = (np.asarray(target.samples, dtype=float) - self.center) / self.B
        else:
            self.target = None
        # blocks: (slot, d) -> (xlo, xhi, ylo, yhi) in curve units, q=1 only
        self.blocks = {}
        for key, bounds in (blocks or {}).items():
            lo_x, hi_x, lo_y, hi_y = bounds
            self.blocks[key] = (lo_x / self.B, hi_x / self.B,
                                lo_y / self.B, hi_y / self.B)
        self.node_boxes = tuple(node_boxes)
        self.link_list = structure.links()
        self.motor_dim = 3 if structure.motor_kind == ROTARY else 4
        self._build_layout()
        self._build_bounds()
        self._build_index_maps()

    # -- layout ------------------------------------------------------------

    @property
    def motor_parametric(self):
        return self.structure.motor_mode == "parametric"

    def _build_layout(self):
        s = self.structure
        self.slot_offset = {}
        if self.motor_parametric:
            at = self.motor_dim
        else:
            self.slot_offset[1] = 0
            at = 2 * self.T
        for slot in s.used[1:]:
            self.slot_offset[slot] = at
            at += 2 if slot in s.fixed else 2 * self.T
        self.dim = at

    def _slot_box(self, slot):
        lo, hi = -0.5, 0.5
        if slot < self.structure.K:
            for x0, y0, x1, y1 in self.node_boxes:
                return (max(lo, (x0 - self.center[0]) / self.B),
                        min(hi, (x1 - self.center[0]) / self.B),
                        max(lo, (y0 - self.center[1]) / self.B),
                        min(hi, (y1 - self.center[1]) / self.B))
        return (lo, hi, lo, hi)

    def _build_bounds(self):
        lb = np.full(self.dim, -0.5)
        ub = np.full(self.dim, 0.5)
        if self.motor_parametric:
            if self.structure.motor_kind == ROTARY:
                lb[2], ub[2] = 1e-6, 0.5        # radius
            else:
                lb[2:4], ub[2:4] = -1.0, 1.0    # velocity
        for slot, at in self.slot_offset.items():
            x0, x1, y0, y1 = self._slot_box(slot)
            n = 1 if slot in self.structure.fixed else self.T
            lb[at:at + 2 * n:2] = x0
            ub[at:at + 2 * n:2] = x1
            lb[at + 1:at + 2 * n:2] = y0
            ub[at + 1:at + 2 * n:2] = y1
        self.lb, self.ub = lb, ub

    def _build_index_maps(self):
        s = self.structure
        self.slots = list(s.used)
        self.col = {slot: c for c, slot in enumerate(self.slots)}
        self.li = np.array([self.col[i] for i, _ in self.link_list], dtype=int)
        self.lj = np.array([self.col[j] for _, j in self.link_list], dtype=int)
        self.mi = np.array([self.col[i] for i in s.movable], dtype=int)
        self.ma = np.array([self.col[s.parents[i][0]] for i in s.movable], dtype=int)
        self.mb = np.array([self.col[s.parents[i][1]] for i in s.movable], dtype=int)
        self.block_rows = []
        for (slot, d) in sorted(self.blocks):
            j = s.parents[slot][d - 1]
            self.block_rows.append((self.col[slot], self.col[j],
                                    np.array(self.blocks[(slot, d)])))
        self.fixed_cols = [(self.col[slot], self.slot_offset[slot])
                           for slot in s.used[1:] if slot in s.fixed]
        self.free_cols = [(self.col[slot], self.slot_offset[slot])
                          for slot in s.used[1:] if slot not in s.fixed]
        if not self.motor_parametric:
            self.free_cols.append((0, 0))
        self.ee_col = self.col[s.K] if s.K in self.col else 0

    # -- evaluation ----------------------------------------------------------

    def positions_array(self, x):
        """(T, M, 2) sample positions of every used slot."""
        s = self.structure
        P = np.empty((self.T, len(self.slots), 2))
        if self.motor_parametric:
            if s.motor_kind == ROTARY:
                sigma = float(s.direction)
                P[:, 0, 0] = x[0] + sigma * x[2] * self._sin
                P[:, 0, 1] = x[1] + x[2] * self._cos
            else:
                P[:, 0, 0] = x[0] + self.times * x[2]
                P[:, 0, 1] = x[1] + self.times * x[3]
        for slot, at in self.slot_offset.items():
            c = self.col[slot]
            if slot in s.fixed:
                P[:, c, 0] = x[at]
                P[:, c, 1] = x[at + 1]
            else:
                P[:, c, :] = x[at:at + 2 * self.T].reshape(self.T, 2)
        return P

    def positions(self, x):
        P = self.positions_array(x)
        return {slot: P[:, self.col[slot], :] for slot in self.slots}

    def _scatter(self, dP, x, grad):
        s = self.structure
        if self.motor_parametric:
            g1 = dP[:, 0, :]
            grad[0] += g1[:, 0].sum()
            grad[1] += g1[:, 1].sum()
            if s.motor_kind == ROTARY:
                sigma = float(s.direction)
                grad[2] += float(np.sum(sigma * self._sin * g1[:, 0]
                                        + self._cos * g1[:, 1]))
            else:
                grad[2] += float(np.sum(self.times * g1[:, 0]))
                grad[3] += float(np.sum(self.times * g1[:, 1]))
        for c, at in self.fixed_cols:
            grad[at] += dP[:, c, 0].sum()
            grad[at + 1] += dP[:, c, 1].sum()
        for c, at in self.free_cols:
            grad[at:at + 2 * self.T] += dP[:, c, :].reshape(-1)

    def _offsets(self, P):
        return P[:, self.li, :] - P[:, self.lj, :]

    def _areas(self, P):
        if not len(self.mi):
            return np.zeros((self.T, 0))
        d1 = P[:, self.mi, :] - P[:, self.ma, :]
        d2 = P[:, self.mi, :] - P[:, self.mb, :]
        return d1[:, :, 1] * d2[:, :, 0] - d1[:, :, 0] * d2[:, :, 1]

    def max_violation(self, x):
        P = self.positions_array(x)
        worst = 0.0
        off = self._offsets(P)
        if off.shape[1]:
            n2 = np.sum(off * off, axis=2)
            g = n2 - np.roll(n2, -1, axis=0)
            worst = max(worst, float(np.max(np.abs(g))))
            worst = max(worst, float(max(0.0, np.max(np.abs(off)) - 0.5)))
        areas = self._areas(P)
        if areas.shape[1]:
            worst = max(worst, float(max(0.0, self.eps - np.min(areas))))
        for c, cj, bounds in self.block_rows:
            o = P[0, c, :] - P[0, cj, :]
            h = np.array([o[0] - bounds[0], bounds[1] - o[0],
                          o[1] - bounds[2], bounds[3] - o[1]])
            worst = max(worst, float(max(0.0, -np.min(h))))
        if self.motor_parametric and self.structure.motor_kind == ROTARY:
            cx, cy, r = x[0], x[1], x[2]
            h = np.array([0.5 - cx - r, cx + 0.5 - r, 0.5 - cy - r, cy + 0.5 - r])
            worst = max(worst, float(max(0.0, -np.min(h))))
        return worst

    def tracking(self, P):
        if self.target is None:
            return 0.0, None
        ee = P[:, self.ee_col, :]
        if self.curve_mode == ARBITRARY_ORDER:
            order = match_arbitrary(ee, self.target)
            diff = ee - self.target[order]
        else:
            order = None
            diff = ee - self.target
        w = 2.0 * math.pi / self.T
        return w * float(np.sum(diff * diff)), order

    # -- augmented Lagrangian -------------------------------------------------

    def init_multipliers(self):
        L = len(self.link_list)
        Nm = len(self.mi)
        return {
            "eq": np.zeros((self.T, L)),
            "area": np.zeros((self.T, Nm)),
            "dlo": np.zeros((self.T, L, 2)),
            "dhi": np.zeros((self.T, L, 2)),
            "blk": np.zeros((len(self.block_rows), 4)),
            "box": np.zeros(4),
        }

    def merit_and_grad(self, x, mu, rho, with_objective, order=None):
        P = self.positions_array(x)
        dP = np.zeros_like(P)
        grad = np.zeros(self.dim)
        value = 0.0

        if with_objective and self.target is not None:
            ee = P[:, self.ee_col, :]
            tgt = self.target if order is None else self.target[order]
            diff = ee - tgt
            w = 2.0 * math.pi / self.T
            value += w * float(np.sum(diff * diff))
            dP[:, self.ee_col, :] += 2.0 * w * diff

        off = self._offsets(P)
        if off.shape[1]:
            n2 = np.sum(off * off, axis=2)
            g = n2 - np.roll(n2, -1, axis=0)
            m = mu["eq"]
            value += float(np.sum(-m * g + 0.5 * rho * g * g))
            coef = rho * g - m
            dn2 = coef - np.roll(coef, 1, axis=0)
            doff = 2.0 * dn2[:, :, None] * off
            # offset bounds |off| <= 1/2 on both components
            h_lo = off + 0.5
            h_hi = 0.5 - off
            a_lo = np.maximum(0.0, mu["dlo"] - rho * h_lo)
            a_hi = np.maximum(0.0, mu["dhi"] - rho * h_hi)
            value += float(np.sum(a_lo * a_lo - mu["dlo"] ** 2)
                           + np.sum(a_hi * a_hi - mu["dhi"] ** 2)) / (2.0 * rho)
            doff += a_hi - a_lo
            np.add.at(dP, (slice(None), self.li), doff)
            np.subtract.at(dP, (slice(None), self.lj), doff)

        if len(self.mi):
            d1 = P[:, self.mi, :] - P[:, self.ma, :]
            d2 = P[:, self.mi, :] - P[:, self.mb, :]
            h = d1[:, :, 1] * d2[:, :, 0] - d1[:, :, 0] * d2[:, :, 1] - self.eps
            active = np.maximum(0.0, mu["area"] - rho * h)
            value += float(np.sum(active * active - mu["area"] ** 2)) / (2.0 * rho)
            m = -active
            dd1 = np.stack([-m * d2[:, :, 1], m * d2[:, :, 0]], axis=2)
            dd2 = np.stack([m * d1[:, :, 1], -m * d1[:, :, 0]], axis=2)
            np.add.at(dP, (slice(None), self.mi), dd1 + dd2)
            np.subtract.at(dP, (slice(None), self.ma), dd1)
            np.subtract.at(dP, (slice(None), self.mb), dd2)

        for n, (c, cj, bounds) in enumerate(self.block_rows):
            o = P[0, c, :] - P[0, cj, :]
            h = np.array([o[0] - bounds[0], bounds[1] - o[0],
                          o[1] - bounds[2], bounds[3] - o[1]])
            active = np.maximum(0.0, mu["blk"][n] - rho * h)
            value += float(np.sum(active * active - mu["blk"][n] ** 2)) / (2.0 * rho)
            doff0 = np.array([active[1] - active[0], active[3] - active[2]])
            dP[0, c, :] += doff0
            dP[0, cj, :] -= doff0

        if self.motor_parametric and self.structure.motor_kind == ROTARY:
            cx, cy, r = x[0], x[1], x[2]
            h = np.array([0.5 - cx - r, cx + 0.5 - r, 0.5 - cy - r, cy + 0.5 - r])
            active = np.maximum(0.0, mu["box"] - rho * h)
            value += float(np.sum(active * active - mu["box"] ** 2)) / (2.0 * rho)
            grad[0] += active[0] - active[1]
            grad[1] += active[2] - active[3]
            grad[2] += float(np.sum(active))

        self._scatter(dP, x, grad)
        return value, grad

    def update_multipliers(self, x, mu, rho):
        P = self.positions_array(x)
        off = self._offsets(P)
        if off.shape[1]:
            n2 = np.sum(off * off, axis=2)
            g = n2 - np.roll(n2, -1, axis=0)
            mu["eq"] -= rho * g
            np.copyto(mu["dlo"], np.maximum(0.0, mu["dlo"] - rho * (off + 0.5)))
            np.copyto(mu["dhi"], np.maximum(0.0, mu["dhi"] - rho * (0.5 - off)))
        areas = self._areas(P)
        if areas.shape[1]:
            np.copyto(mu["area"], np.maximum(0.0, mu["area"] - rho * (areas - self.eps)))
        for n, (c, cj, bounds) in enumerate(self.block_rows):
            o = P[0, c, :] - P[0, cj, :]
            h = np.array([o[0] - bounds[0], bounds[1] - o[0],
                          o[1] - bounds[2], bounds[3] - o[1]])
            mu["blk"][n] = np.maximum(0.0, mu["blk"][n] - rho * h)
        if self.motor_parametric and self.structure.motor_kind == ROTARY:
            cx, cy, r = x[0], x[1], x[2]
            h = np.array([0.5 - cx - r, cx + 0.5 - r, 0.5 - cy - r, cy + 0.5 - r])
            mu["box"] = np.maximum(0.0, mu["box"] - rho * h)

    # -- packing ------------------------------------------------------------

    def _motor_positions_from_params(self, params):
        sigma = float(self.structure.direction)
        if self.structure.motor_kind == ROTARY:
            cx, cy, r = params[0], params[1], params[2]
            return np.stack([cx + sigma * r * self._sin, cy + r * self._cos], axis=1)
        return np.stack([params[0] + self.times * params[2],
                         params[1] + self.times * params[3]], axis=1)

    @staticmethod
    def _fit_motor_params(samples):
        c = samples.mean(axis=0)
        r = float(np.mean(np.linalg.norm(samples - c, axis=1)))
        return np.array([c[0], c[1], max(r, 1e-6)])

    def pack_point(self, point):
        """Flat vector from a structured {slot: positions, 'motor': params} dict."""
        x = np.zeros(self.dim)
        if self.motor_parametric:
            if "motor" in point:
                motor = np.asarray(point["motor"], dtype=float)
            else:
                motor = self._fit_motor_params(np.asarray(point[1], dtype=float))
            x[:self.motor_dim] = motor[:self.motor_dim]
        for slot, at in self.slot_offset.items():
            if slot not in point and slot == 1:
                p = self._motor_positions_from_params(np.asarray(point["motor"]))
            else:
                p = np.asarray(point[slot], dtype=float)
            if slot in self.structure.fixed:
                x[at:at + 2] = p[0] if p.ndim == 2 else p
            else:
                if p.ndim == 1:
                    p = np.tile(p, (self.T, 1))
                x[at:at + 2 * self.T] = p.reshape(-1)
        return np.clip(x, self.lb, self.ub)

    def unpack_point(self, x):
        pos = self.positions(x)
        point = {}
        if self.motor_parametric:
            point["motor"] = np.array(x[:self.motor_dim])
            point[1] = pos[1].copy()
        else:
            point[1] = pos[1].copy()
            point["motor"] = self._fit_motor_params(pos[1])
        for slot in self.structure.used[1:]:
            point[slot] = pos[slot].copy()
        return point

    def to_linkage(self, x):
        """Extract minimal coordinates; area feasibility pins orientation +1."""
        s = self.structure
        if not self.motor_parametric:
            raise ValueError("extraction needs the parametric motor mode")
        pos = self.positions(x)
        if s.motor_kind == ROTARY:
            motor = MotorSpec(kind=ROTARY,
                              center=tuple(self.center + self.B * np.array([x[0], x[1]])),
                              radius=float(self.B * x[2]), direction=s.direction)
        else:
            motor = MotorSpec(kind=LINEAR,
                              center=tuple(self.center + self.B * np.array([x[0], x[1]])),
                              velocity=(float(self.B * x[2]), float(self.B * x[3])))
        node_of = {slot: n + 1 for n, slot in enumerate(s.used)}
        joints = []
        for slot in s.used[1:]:
            if slot in s.fixed:
                p = self.center + self.B * pos[slot][0]
                joints.append(FixedNode(position=(float(p[0]), float(p[1]))))
            else:
                a, b = s.parents[slot]
                la = float(np.mean(np.linalg.norm(pos[slot] - pos[a], axis=1))) * self.B
                lb = float(np.mean(np.linalg.norm(pos[slot] - pos[b], axis=1))) * self.B
                joints.append(MovableNode(parents=(node_of[a], node_of[b]),
                                          lengths=(la, lb), orientation=1))
        return Linkage(motor=motor, joints=tuple(joints), box_side=self.B,
                       box_center=(float(self.center[0]), float(self.center[1])))


def _inner_minimize(nlp, x, mu, rho, with_objective, order, opts, log, inner_tol):
    """Projected spectral-gradient descent with monotone Armijo backtracking."""
    value, grad = nlp.merit_and_grad(x, mu, rho, with_objective, order)
    evals = 1
    prev_x = None
    prev_grad = None
    step = 1.0
    for it in range(opts.max_inner):
        pg = np.clip(x - grad, nlp.lb, nlp.ub) - x
        pg_norm = float(np.max(np.abs(pg))) if len(pg) else 0.0
        if pg_norm <= inner_tol * (1.0 + abs(value)):
            break
        if prev_x is not None:
            dx = x - prev_x
            dg = grad - prev_grad
            denom = float(np.dot(dg, dg))
            num = float(np.dot(dx, dg))
            if denom > 0.0 and num > 0.0:
                step = min(max(num / denom, 1e-10), 1e4)
        accepted = False
        alpha = step
        for _ in range(opts.max_backtracks + 1):
            x_new = np.clip(x - alpha * grad, nlp.lb, nlp.ub)
            direction = x_new - x
            slope = float(np.dot(grad, direction))
            if slope >= 0.0:
                break
            v_new, g_new = nlp.merit_and_grad(x_new, mu, rho, with_objective, order)
            evals += 1
            if v_new <= value + opts.armijo_c * slope:
                if opts.log_steps:
                    log.append({"inner": it, "merit": v_new, "alpha": alpha,
                                "slope": slope,
                                "armijo_bound": value + opts.armijo_c * slope})
                prev_x, prev_grad = x, grad
                x, value, grad = x_new, v_new, g_new
                accepted = True
                break
            alpha *= opts.backtrack
        if not accepted:
            break
    return x, value, grad, evals


def _solve(nlp, x0, with_objective, opts):
    x = np.clip(np.asarray(x0, dtype=float), nlp.lb, nlp.ub)
    mu = nlp.init_multipliers()
    rho = opts.penalty0
    log = []
    viol = nlp.max_violation(x)
    status = "iteration-limit"
    outer_done = 0
    inner_tol = 1e-2
    for outer in range(opts.max_outer):
        if opts.should_stop is not None and opts.should_stop():
            break
        order = None
        if with_objective and nlp.target is not None and nlp.curve_mode == ARBITRARY_ORDER:
            _, order = nlp.tracking(nlp.positions_array(x))
        merit_start, _ = nlp.merit_and_grad(x, mu, rho, with_objective, order)
        x, merit_end, grad, evals = _inner_minimize(
            nlp, x, mu, rho, with_objective, order, opts, log, inner_tol)
        new_viol = nlp.max_violation(x)
        log.append({"outer": outer, "merit_start": merit_start, "merit_end": merit_end,
                    "violation": new_viol, "rho": rho, "inner_evals": evals})
        outer_done = outer + 1
        inner_tol = max(inner_tol * 0.2, 1e-10)
        if new_viol <= opts.feas_tol:
            if not with_objective:
                status = "feasible"
                break
            track, order2 = nlp.tracking(nlp.positions_array(x))
            _, g2 = nlp.merit_and_grad(x, mu, rho, True, order2)
            pg = float(np.max(np.abs(np.clip(x - g2, nlp.lb, nlp.ub) - x)))
            if pg <= opts.stat_tol * (1.0 + abs(track)):
                status = "feasible"
                break
            nlp.update_multipliers(x, mu, rho)
        elif new_viol <= 0.25 * viol:
            # sufficient progress: first-order multiplier update, same penalty
            nlp.update_multipliers(x, mu, rho)
        else:
            if rho >= opts.penalty_cap:
                if new_viol >= viol * 0.999 and new_viol > 50.0 * opts.feas_tol:
                    status = "infeasible"
                    viol = new_viol
                    break
                nlp.update_multipliers(x, mu, rho)
            rho = min(rho * opts.penalty_growth, opts.penalty_cap)
        viol = new_viol
    final_viol = nlp.max_violation(x)
    if final_viol <= opts.feas_tol and status != "feasible" and not with_objective:
        status = "feasible"
    track, _ = nlp.tracking(nlp.positions_array(x))
    return NlpResult(status=status, point=nlp.unpack_point(x),
                     max_violation=final_viol,
                     objective=track * nlp.B * nlp.B,
                     iterations=outer_done, log=log)


def solve_phase1(nlp, x0, options=None):
    """Feasibility restoration: minimize constraint violation only."""
    opts = options or NlpOptions()
    return _solve(nlp, x0, with_objective=False, opts=opts)


def solve_phase2(nlp, x0, options=None):
    """Objective minimization from a (near-)feasible start."""
    opts = options or NlpOptions()
    start_viol = nlp.max_violation(np.clip(np.asarray(x0, dtype=float), nlp.lb, nlp.ub))
    if start_viol > 10.0 * opts.feas_tol:
        raise ValueError(f"phase-II needs a near-feasible start "
                         f"(violation {start_viol:.3e} > {10 * opts.feas_tol:.3e})")
    return _solve(nlp, x0, with_objective=True, opts=opts)


def refine_linkage(linkage, target, lam=0.0, armijo_c=1e-4, backtrack=0.5,
                   max_backtracks=30):
    """One steepest-descent step on all continuous linkage parameters.

    Armijo backtracking guarantees the returned linkage never scores worse;
    when no decrease is found the input comes back unchanged.
    """
    grad = jacobian_adjoint(linkage, target)     # raises NearSingular at margins
    base = objective(linkage, target, lam).total
    x0 = param_vector(linkage)
    direction = -grad
    slope = float(np.dot(grad, direction))
    if slope == 0.0:
        return linkage
    scale = float(np.max(np.abs(direction)))
    probe = (0.02 * linkage.box_side / scale) if scale > 0 else 1.0
    cand = with_params(linkage, _clamp_params(linkage, x0 + probe * direction))
    f_probe = objective_or_inf(cand, target, lam)
    # one-dimensional quadratic fit picks the trial step; Armijo safeguards it
    curvature = f_probe - base - slope * probe
    if math.isfinite(curvature) and curvature > 0.0:
        alpha = min(max(-slope * probe * probe / (2.0 * curvature), 1e-3 * probe),
                    50.0 * probe)
    else:
        alpha = 8.0 * probe
    for _ in range(max_backtracks + 1):
        cand = with_params(linkage, _clamp_params(linkage, x0 + alpha * direction))
        val = objective_or_inf(cand, target, lam)
        if val <= base + armijo_c * alpha * slope:
            return cand
        alpha *= backtrack
    return linkage


def _clamp_params(linkage, vec):
    """Keep lengths positive and positions inside the workspace box."""
    vec = np.array(vec, dtype=float)
    half = linkage.box_side / 2.0
    cx, cy = linkage.box_center
    floor = 1e-9 * linkage.box_side
    if linkage.motor.kind == ROTARY:
        vec[0] = np.clip(vec[0], cx - half, cx + half)
        vec[1] = np.clip(vec[1], cy - half, cy + half)
        vec[2] = np.clip(vec[2], floor, linkage.box_side)
        at = 3
    else:
        at = 4
    for i in range(2, linkage.n_nodes + 1):
        nd = linkage.node(i)
        if isinstance(nd, FixedNode):
            vec[at] = np.clip(vec[at], cx - half, cx + half)
            vec[at + 1] = np.clip(vec[at + 1], cy - half, cy + half)
        else:
            vec[at] = np.clip(vec[at], floor, linkage.box_side)
            vec[at + 1] = np.clip(vec[at + 1], floor, linkage.box_side)
        at += 2
    return vec


def problem_from_assignment(assignment, T, box_side, box_center, eps_area,
                            target=None, lam=0.0, blocks=None, node_boxes=(),
                            motor_kind=ROTARY):
    structure = FrozenStructure.from_assignment(assignment, motor_kind=motor_kind)
    return GeometricNlp(structure, T, box_side, box_center, eps_area,
                        target=target, lam=lam, blocks=blocks, node_boxes=node_boxes)


def complete_point(nlp, point):
    """Fill slots the warm start lacks (newly decided nodes) with box center."""
    out = dict(point)
    for slot in nlp.slot_offset:
        if slot not in out:
            if slot == 1 and "motor" in out:
                continue
            out[slot] = np.zeros((nlp.T, 2))
    if nlp.motor_parametric and "motor" not in out and 1 not in out:
        out["motor"] = np.array([0.0, 0.0, 0.125])
    return out


def point_from_linkage(nlp, linkage, trajectory):
    """Structured warm start from a traced linkage (slot-mapped)."""
    s = nlp.structure
    n = linkage.n_nodes
    slot_of = {i: (s.K if i == n else i) for i in range(1, n + 1)}
    point = {}
    m = linkage.motor
    c = (np.asarray(m.center) - nlp.center) / nlp.B
    if m.kind == ROTARY:
        point["motor"] = np.array([c[0], c[1], m.radius / nlp.B])
    else:
        point["motor"] = np.array([c[0], c[1], m.velocity[0] / nlp.B,
                                   m.velocity[1] / nlp.B])
    scaled = (trajectory.positions - nlp.center) / nlp.B
    for i in range(2, n + 1):
        point[slot_of[i]] = scaled[:, i - 1, :].copy()
    for slot in s.used[1:]:
        if slot not in point:
            point[slot] = np.zeros((nlp.T, 2))
    return point
