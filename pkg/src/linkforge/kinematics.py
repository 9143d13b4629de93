"""Minimal-coordinate planar linkages: forward kinematics, tracing, objectives.

A linkage is described by a motor node (node 1), followed by fixed and movable
nodes in a topological order.  Every movable node hangs off two lower-index
parents through rigid links, so its position is the intersection of two
circles (law of cosines) and the whole chain evaluates in O(N) per sample.
The adjoint sweep gives exact gradients of the tracking objective with the
same O(N) cost.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import linear_sum_assignment

# Triangles must keep cos within [-1 + COS_MARGIN, 1 - COS_MARGIN] to count as
# kinematically valid; law_of_cosine itself only rejects plainly unrealizable
# triangles (margin 0).
COS_MARGIN = 1e-6

ROTARY = "rotary"
LINEAR = "linear"
FIXED_ORDER = "fixed"
ARBITRARY_ORDER = "arbitrary"


class TriangleInfeasible(Exception):
    """A movable node's two parent circles do not intersect (strictly)."""

    def __init__(self, node=None, sample=None, detail=""):
        self.node = node
        self.sample = sample
        self.detail = detail
        where = f"node {node}" if node is not None else "triangle"
        if sample is not None:
            where += f" at sample {sample}"
        super().__init__(f"{where} infeasible: {detail}")


class NearSingular(Exception):
    """Gradient requested while some triangle sits at a cos = +-1 boundary."""

    def __init__(self, node, sample, cosine):
        self.node = node
        self.sample = sample
        self.cosine = cosine
        super().__init__(f"node {node} near singular at sample {sample} (cos={cosine:.9f})")


@dataclass(frozen=True)
class MotorSpec:
    """Actuator of node 1.

    Rotary motors trace a circle of ``radius`` around ``center``; ``direction``
    +1 runs clockwise from the top (position at t=0 is center + (0, r)), -1
    counter-clockwise.  Linear motors move from ``center`` along ``velocity``.
    """

    kind: str = ROTARY
    center: tuple[float, float] = (0.0, 0.0)
    radius: float = 1.0
    direction: int = 1
    velocity: tuple[float, float] = (1.0, 0.0)

    def validate(self):
        if self.kind not in (ROTARY, LINEAR):
            raise ValueError(f"unknown motor kind {self.kind!r}")
        if self.kind == ROTARY:
            if not (self.radius > 0):
                raise ValueError("rotary motor needs radius > 0")
            if self.direction not in (1, -1):
                raise ValueError("motor direction must be +1 or -1")
        else:
            if math.hypot(*self.velocity) == 0.0:
                raise ValueError("linear motor needs a nonzero direction vector")


@dataclass(frozen=True)
class FixedNode:
    position: tuple[float, float]


@dataclass(frozen=True)
class MovableNode:
    parents: tuple[int, int]      # (j, k), both lower than the node's own index
    lengths: tuple[float, float]  # (l_ji, l_ki)
    orientation: int              # +1 / -1, selects the mirror branch


@dataclass(frozen=True)
class Linkage:
    """Motor plus nodes 2..N; node N is the end-effector."""

    motor: MotorSpec
    joints: tuple = ()            # FixedNode | MovableNode, node i = joints[i - 2]
    box_side: float = 4.0
    box_center: tuple[float, float] = (0.0, 0.0)

    @property
    def n_nodes(self):
        return 1 + len(self.joints)

    def node(self, i):
        """1-based node access; node 1 is the motor."""
        if i == 1:
            return self.motor
        return self.joints[i - 2]

    def movable_indices(self):
        return [i for i in range(2, self.n_nodes + 1) if isinstance(self.node(i), MovableNode)]

    def fixed_indices(self):
        return [i for i in range(2, self.n_nodes + 1) if isinstance(self.node(i), FixedNode)]

    def validate(self):
        self.motor.validate()
        if self.box_side <= 0:
            raise ValueError("box_side must be positive")
        n = self.n_nodes
        for i in range(2, n + 1):
            nd = self.node(i)
            if isinstance(nd, MovableNode):
                j, k = nd.parents
                if not (1 <= j < i and 1 <= k < i and j != k):
                    raise ValueError(f"node {i}: parents {nd.parents} must be two distinct lower indices")
                for l in nd.lengths:
                    if not (0 < l <= self.box_side):
                        raise ValueError(f"node {i}: link length {l} outside (0, {self.box_side}]")
                if nd.orientation not in (1, -1):
                    raise ValueError(f"node {i}: orientation must be +1 or -1")
            elif not isinstance(nd, FixedNode):
                raise ValueError(f"node {i}: unknown node kind {type(nd).__name__}")
        if n > 1 and isinstance(self.node(n), FixedNode):
            raise ValueError("end-effector must be the motor or a movable node")
        return self


@dataclass(frozen=True)
class TargetCurve:
    """T sampled waypoints of the desired end-effector path."""

    samples: np.ndarray           # (T, 2)
    mode: str = FIXED_ORDER

    def __post_init__(self):
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=float))

    @property
    def n_samples(self):
        return len(self.samples)

    def validate(self):
        if self.mode not in (FIXED_ORDER, ARBITRARY_ORDER):
            raise ValueError(f"unknown curve mode {self.mode!r}")
        if self.samples.ndim != 2 or self.samples.shape[1] != 2:
            raise ValueError("samples must be an (T, 2) array")
        if len(self.samples) < 3:
            raise ValueError("need at least 3 target samples")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("target samples must be finite")
        return self


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray             # (T,)
    positions: np.ndarray         # (T, N, 2), node i at [:, i - 1, :]

    @property
    def n_samples(self):
        return len(self.times)

    @property
    def n_nodes(self):
        return self.positions.shape[1]

    def node_path(self, i):
        return self.positions[:, i - 1, :]

    def end_effector(self):
        return self.positions[:, -1, :]


def sample_times(T):
    """Even sample grid t^q = 2*pi*q/T, q = 1..T."""
    return 2.0 * math.pi * np.arange(1, T + 1) / T


def rot_cw(v):
    """Rotate 90 degrees clockwise: (x, y) -> (y, -x)."""
    v = np.asarray(v, dtype=float)
    return np.stack([v[..., 1], -v[..., 0]], axis=-1)


def signed_area(d1, d2):
    """<rot_cw(d1), d2>: positive when d2 lies clockwise of d1."""
    d1 = np.asarray(d1, dtype=float)
    d2 = np.asarray(d2, dtype=float)
    return d1[..., 1] * d2[..., 0] - d1[..., 0] * d2[..., 1]


def motor_position(motor, t):
    """Motor node position at time t (t may be an array)."""
    t = np.asarray(t, dtype=float)
    if motor.kind == ROTARY:
        s = float(motor.direction)
        x = np.sin(s * t) * motor.radius + motor.center[0]
        y = np.cos(s * t) * motor.radius + motor.center[1]
    else:
        x = motor.center[0] + t * motor.velocity[0]
        y = motor.center[1] + t * motor.velocity[1]
    return np.stack([x, y], axis=-1)


def law_of_cosine(nj, nk, lji, lki, sign, node=None, sample=None, margin=0.0):
    """Place a node at distance lji from nj and lki from nk.

    Supports broadcasting over leading axes of nj/nk.  ``sign`` picks between
    the two mirrored intersection points.  Raises TriangleInfeasible when the
    triangle is not strictly realizable (or not realizable within ``margin``
    in cos units).
    """
    nj = np.asarray(nj, dtype=float)
    nk = np.asarray(nk, dtype=float)
    u = nk - nj
    rho = np.linalg.norm(u, axis=-1)
    if np.any(rho <= 0.0):
        raise TriangleInfeasible(node, sample, "parent nodes coincide (|nj - nk| = 0)")
    cos = (rho * rho + lji * lji - lki * lki) / (2.0 * rho * lji)
    hi = np.max(cos)
    lo = np.min(cos)
    if hi >= 1.0 - margin:
        q = sample if np.ndim(cos) == 0 else int(np.argmax(cos)) + 1
        raise TriangleInfeasible(node, q if sample is None else sample,
                                 f"|nj-nk| too close to |lji-lki| boundary (cos={hi:.6g} >= {1.0 - margin:.6g})")
    if lo <= -1.0 + margin:
        q = sample if np.ndim(cos) == 0 else int(np.argmin(cos)) + 1
        raise TriangleInfeasible(node, q if sample is None else sample,
                                 f"|nj-nk| exceeds lji+lki (cos={lo:.6g} <= {-1.0 + margin:.6g})")
    sin = np.sqrt(1.0 - cos * cos)
    # R = [[cos, sign*sin], [-sign*sin, cos]] applied to u, scaled to length lji
    rx = cos * u[..., 0] + sign * sin * u[..., 1]
    ry = -sign * sin * u[..., 0] + cos * u[..., 1]
    scale = lji / rho
    return nj + scale[..., None] * np.stack([rx, ry], axis=-1)


def forward_kinematics(linkage, t, margin=0.0):
    """Positions of all nodes at time t, in ascending node order."""
    n = linkage.n_nodes
    out = np.empty((n, 2), dtype=float)
    out[0] = motor_position(linkage.motor, t)
    for i in range(2, n + 1):
        nd = linkage.node(i)
        if isinstance(nd, FixedNode):
            out[i - 1] = nd.position
        else:
            j, k = nd.parents
            out[i - 1] = law_of_cosine(out[j - 1], out[k - 1], nd.lengths[0], nd.lengths[1],
                                       nd.orientation, node=i, margin=margin)
    return out


def trace(linkage, T, margin=0.0):
    """Trajectory over the even sample grid t^q = 2*pi*q/T."""
    if T < 1:
        raise ValueError("need T >= 1 samples")
    times = sample_times(T)
    n = linkage.n_nodes
    pos = np.empty((T, n, 2), dtype=float)
    pos[:, 0, :] = motor_position(linkage.motor, times)
    for i in range(2, n + 1):
        nd = linkage.node(i)
        if isinstance(nd, FixedNode):
            pos[:, i - 1, :] = nd.position
        else:
            j, k = nd.parents
            try:
                pos[:, i - 1, :] = law_of_cosine(pos[:, j - 1, :], pos[:, k - 1, :],
                                                 nd.lengths[0], nd.lengths[1], nd.orientation,
                                                 node=i, margin=margin)
            except TriangleInfeasible as exc:
                raise TriangleInfeasible(i, exc.sample, exc.detail) from None
    return Trajectory(times=times, positions=pos)


def is_valid(linkage, T, margin=COS_MARGIN):
    """Kinematic validity used by the stochastic solvers (margined trace)."""
    try:
        trace(linkage, T, margin=margin)
        return True
    except TriangleInfeasible:
        return False


@dataclass(frozen=True)
class ObjectiveBreakdown:
    total: float
    tracking: float
    regularization: float
    matching: tuple = ()          # arbitrary-order only: matching[q] = target row for sample q


def match_arbitrary(traced, targets):
    """Minimum-cost one-to-one matching between traced and target samples."""
    diff = traced[:, None, :] - targets[None, :, :]
    cost = np.einsum("qtk,qtk->qt", diff, diff)
    rows, cols = linear_sum_assignment(cost)
    order = np.empty(len(rows), dtype=int)
    order[rows] = cols
    return order


def objective(linkage, target, lam=0.0):
    """Tracking error against the target curve plus lambda * (node count)."""
    T = target.n_samples
    traj = trace(linkage, T)
    ee = traj.end_effector()
    if target.mode == ARBITRARY_ORDER:
        order = match_arbitrary(ee, target.samples)
        diff = ee - target.samples[order]
        matching = tuple(int(v) for v in order)
    else:
        diff = ee - target.samples
        matching = ()
    tracking = (2.0 * math.pi / T) * float(np.sum(diff * diff))
    reg = lam * linkage.n_nodes
    return ObjectiveBreakdown(total=tracking + reg, tracking=tracking,
                              regularization=reg, matching=matching)


def objective_or_inf(linkage, target, lam=0.0, margin=0.0):
    """Solver-facing objective: infeasible traces count as +inf, not errors."""
    try:
        if margin > 0.0:
            trace(linkage, target.n_samples, margin=margin)
        return objective(linkage, target, lam).total
    except TriangleInfeasible:
        return math.inf


# ---------------------------------------------------------------------------
# Continuous-parameter layout and adjoint gradients
# ---------------------------------------------------------------------------

def param_names(linkage):
    """Flat ordering of the continuous parameters (motor, then nodes ascending)."""
    if linkage.motor.kind == ROTARY:
        names = ["motor.XC", "motor.YC", "motor.r"]
    else:
        names = ["motor.XC", "motor.YC", "motor.VX", "motor.VY"]
    for i in range(2, linkage.n_nodes + 1):
        nd = linkage.node(i)
        if isinstance(nd, FixedNode):
            names += [f"node{i}.x", f"node{i}.y"]
        else:
            names += [f"node{i}.lj", f"node{i}.lk"]
    return names


def param_vector(linkage):
    m = linkage.motor
    if m.kind == ROTARY:
        vals = [m.center[0], m.center[1], m.radius]
    else:
        vals = [m.center[0], m.center[1], m.velocity[0], m.velocity[1]]
    for i in range(2, linkage.n_nodes + 1):
        nd = linkage.node(i)
        vals += list(nd.position if isinstance(nd, FixedNode) else nd.lengths)
    return np.array(vals, dtype=float)


def with_params(linkage, vec):
    """Rebuild the linkage from a parameter vector (inverse of param_vector)."""
    vec = np.asarray(vec, dtype=float)
    m = linkage.motor
    if m.kind == ROTARY:
        motor = replace(m, center=(float(vec[0]), float(vec[1])), radius=float(vec[2]))
        at = 3
    else:
        motor = replace(m, center=(float(vec[0]), float(vec[1])),
                        velocity=(float(vec[2]), float(vec[3])))
        at = 4
    joints = []
    for i in range(2, linkage.n_nodes + 1):
        nd = linkage.node(i)
        if isinstance(nd, FixedNode):
            joints.append(FixedNode(position=(float(vec[at]), float(vec[at + 1]))))
        else:
            joints.append(replace(nd, lengths=(float(vec[at]), float(vec[at + 1]))))
        at += 2
    return replace(linkage, motor=motor, joints=tuple(joints))


def _cosine_blocks(pos_j, pos_k, a, b, sign, node, margin):
    """Per-sample derivative blocks of the law-of-cosine node placement.

    Returns (pos_i, Jj, Jk, Ja, Jb) where Jj/Jk are (T, 2, 2) Jacobians w.r.t.
    the parent positions and Ja/Jb the (T, 2) derivatives w.r.t. the lengths.
    """
    u = pos_k - pos_j
    rho = np.linalg.norm(u, axis=-1)
    cos = (rho * rho + a * a - b * b) / (2.0 * rho * a)
    bad = np.abs(cos) >= 1.0 - margin
    if np.any(bad):
        q = int(np.argmax(np.abs(cos)))
        raise NearSingular(node, q + 1, float(cos[q]))
    sin = np.sqrt(1.0 - cos * cos)
    v = u / rho[:, None]
    Wv = np.stack([v[:, 1], -v[:, 0]], axis=-1)          # rot_cw(v)
    Mv = cos[:, None] * v + sign * sin[:, None] * Wv
    pos_i = pos_j + a * Mv
    # P = dM/dcos applied to v
    P = v - sign * (cos / sin)[:, None] * Wv
    dc_drho = (rho * rho - a * a + b * b) / (2.0 * rho * rho * a)
    dc_da = (a * a + b * b - rho * rho) / (2.0 * rho * a * a)
    dc_db = -b / (rho * a)
    Ja = Mv + a * dc_da[:, None] * P
    Jb = a * dc_db[:, None] * P
    # dn_i/du = a * [ M (I - v v^T)/rho + P (dc/drho) v^T ]
    T = len(rho)
    eye = np.eye(2)[None, :, :]
    proj = (eye - v[:, :, None] * v[:, None, :]) / rho[:, None, None]
    M = np.empty((T, 2, 2))
    M[:, 0, 0] = cos
    M[:, 0, 1] = sign * sin
    M[:, 1, 0] = -sign * sin
    M[:, 1, 1] = cos
    Ju = a * (np.einsum("trs,tsc->trc", M, proj)
              + P[:, :, None] * (dc_drho[:, None] * v)[:, None, :])
    Jk = Ju
    Jj = eye - Ju
    return pos_i, Jj, Jk, Ja, Jb


def jacobian_adjoint(linkage, target, margin=COS_MARGIN):
    """Gradient of the tracking term w.r.t. all continuous parameters.

    Reverse sweep over the kinematic chain; one forward trace plus O(N)
    2x2-block products per sample.  Raises NearSingular when any triangle has
    cos within ``margin`` of +-1 (the finite-difference contract breaks down
    there).
    """
    T = target.n_samples
    times = sample_times(T)
    n = linkage.n_nodes
    pos = np.empty((T, n, 2), dtype=float)
    pos[:, 0, :] = motor_position(linkage.motor, times)
    blocks = {}
    for i in range(2, n + 1):
        nd = linkage.node(i)
        if isinstance(nd, FixedNode):
            pos[:, i - 1, :] = nd.position
        else:
            j, k = nd.parents
            pos[:, i - 1, :], Jj, Jk, Ja, Jb = _cosine_blocks(
                pos[:, j - 1, :], pos[:, k - 1, :], nd.lengths[0], nd.lengths[1],
                nd.orientation, i, margin)
            blocks[i] = (Jj, Jk, Ja, Jb)

    ee = pos[:, -1, :]
    if target.mode == ARBITRARY_ORDER:
        order = match_arbitrary(ee, target.samples)
        diff = ee - target.samples[order]
    else:
        diff = ee - target.samples
    w = np.zeros((T, n, 2))
    w[:, -1, :] = (4.0 * math.pi / T) * diff

    grad = np.zeros(len(param_names(linkage)))
    motor_dim = 3 if linkage.motor.kind == ROTARY else 4
    at = motor_dim + 2 * (n - 1)
    for i in range(n, 1, -1):
        at -= 2
        nd = linkage.node(i)
        wi = w[:, i - 1, :]
        if isinstance(nd, FixedNode):
            grad[at:at + 2] = wi.sum(axis=0)
        else:
            j, k = nd.parents
            Jj, Jk, Ja, Jb = blocks[i]
            grad[at] = float(np.einsum("tr,tr->", Ja, wi))
            grad[at + 1] = float(np.einsum("tr,tr->", Jb, wi))
            w[:, j - 1, :] += np.einsum("trc,tr->tc", Jj, wi)
            w[:, k - 1, :] += np.einsum("trc,tr->tc", Jk, wi)
    wm = w[:, 0, :]
    grad[0] = float(wm[:, 0].sum())
    grad[1] = float(wm[:, 1].sum())
    if linkage.motor.kind == ROTARY:
        s = float(linkage.motor.direction)
        grad[2] = float(np.sum(np.sin(s * times) * wm[:, 0] + np.cos(s * times) * wm[:, 1]))
    else:
        grad[2] = float(np.sum(times * wm[:, 0]))
        grad[3] = float(np.sum(times * wm[:, 1]))
    return grad


def kinematic_jacobian_dets(linkage, trajectory):
    """|det| of the block-triangular kinematic Jacobian at every sample.

    The matrix is 2x2 block triangular (motor rotation block, then one block
    per movable node), so the determinant is the product of 4 * (signed
    triangle area) over the non-motor movable nodes.
    """
    pos = trajectory.positions
    dets = np.ones(trajectory.n_samples)
    for i in linkage.movable_indices():
        nd = linkage.node(i)
        j, k = nd.parents
        d1 = pos[:, i - 1, :] - pos[:, j - 1, :]
        d2 = pos[:, i - 1, :] - pos[:, k - 1, :]
        dets *= 4.0 * np.abs(signed_area(d1, d2))
    return dets


def link_pairs(linkage):
    """All (i, j) rigid links implied by the structure (movable node, parent)."""
    pairs = []
    for i in linkage.movable_indices():
        j, k = linkage.node(i).parents
        pairs.append((i, j))
        pairs.append((i, k))
    return pairs


def max_length_spread(linkage, trajectory):
    """Worst per-link length variation across samples (trajectory invariant)."""
    worst = 0.0
    pos = trajectory.positions
    for i, j in link_pairs(linkage):
        lens = np.linalg.norm(pos[:, i - 1, :] - pos[:, j - 1, :], axis=-1)
        worst = max(worst, float(lens.max() - lens.min()))
    return worst
