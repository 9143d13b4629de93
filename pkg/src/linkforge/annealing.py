"""Simulated-annealing baseline over linkage structures.

Each iteration mutates the current linkage with one of four moves chosen
uniformly (retrying on failure), then applies Metropolis acceptance under an
exponential cooling schedule.  Chains are fully reproducible: one seeded PCG64
generator drives every random decision.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .kinematics import (
    COS_MARGIN,
    FixedNode,
    Linkage,
    MotorSpec,
    MovableNode,
    NearSingular,
    TriangleInfeasible,
    forward_kinematics,
    objective,
    signed_area,
    trace,
)
from .nlp import refine_linkage
from .solution import solution_from_linkage
from .topology import TooManyNodes, assignment_from_linkage, check_topology, flux_feasible

MOVE_TYPES = ("addition", "subtraction", "perturbation", "local")
RETRY_CAP = 1000


class ExhaustedRetries(Exception):
    def __init__(self, iteration):
        self.iteration = iteration
        super().__init__(f"no successful mutation after {RETRY_CAP} tries "
                         f"(iteration {iteration})")


@dataclass(frozen=True)
class SAConfig:
    t_max: float = 2.5e4
    t_min: float = 2.5
    i_max: int = 50000
    seed: int = 0
    max_nodes: int = 7
    samples: int = 20
    lam: float = 0.0
    box_side: float = 4.0
    box_center: tuple = (0.0, 0.0)

    def validate(self):
        if not (self.t_max > self.t_min > 0):
            raise ValueError("need t_max > t_min > 0")
        if self.i_max < 0:
            raise ValueError("iteration budget must be nonnegative")
        if self.max_nodes < 2:
            raise ValueError("need max_nodes >= 2")
        if self.samples < 3:
            raise ValueError("need at least 3 samples")
        return self


def cooling(cfg, i):
    """T(i) = T_max * exp(-log(T_max/T_min) * i / i_max)."""
    if cfg.i_max == 0:
        return cfg.t_max
    return cfg.t_max * math.exp(-math.log(cfg.t_max / cfg.t_min) * i / cfg.i_max)


def initial_linkage(cfg):
    """The trivial starting structure: a lone motor with r = B/10."""
    return Linkage(motor=MotorSpec(center=cfg.box_center, radius=cfg.box_side / 10.0,
                                   direction=1),
                   joints=(), box_side=cfg.box_side, box_center=cfg.box_center)


@dataclass
class MoveStats:
    attempted: dict = field(default_factory=lambda: {m: 0 for m in MOVE_TYPES})
    succeeded: dict = field(default_factory=lambda: {m: 0 for m in MOVE_TYPES})
    accepted: dict = field(default_factory=lambda: {m: 0 for m in MOVE_TYPES})


@dataclass
class SAState:
    current: Linkage
    current_objective: float
    best: Linkage
    best_objective: float
    iteration: int = 0
    move_stats: MoveStats = field(default_factory=MoveStats)


def _safe_objective(linkage, target, lam):
    try:
        trace(linkage, target.n_samples, margin=COS_MARGIN)
    except TriangleInfeasible:
        return math.inf
    return objective(linkage, target, lam).total


def _topology_ok(linkage, max_nodes):
    """Full combinatorial check through the slot encoding (movable changes)."""
    if linkage.n_nodes == 1:
        return True
    try:
        a = assignment_from_linkage(linkage, max_nodes)
    except (TooManyNodes, ValueError):
        return False
    if check_topology(a):
        return False
    w = flux_feasible(a.U, a.F, a.C1 + a.C2)
    return w.forward and w.reverse


def _chain_valid(linkage, max_nodes):
    """Valid chain state: a sound core plus optional trailing fixed scaffolding.

    Fixed additions create states whose trailing nodes are not yet tied into
    the flux systems; subtraction must accept exactly those states or the
    chain can paint itself into an irreversible corner.
    """
    joints = list(linkage.joints)
    while joints and isinstance(joints[-1], FixedNode):
        joints.pop()
    core = Linkage(motor=linkage.motor, joints=tuple(joints),
                   box_side=linkage.box_side, box_center=linkage.box_center)
    return _topology_ok(core, max_nodes)


def _try_addition(state, cfg, target, rng):
    lk = state.current
    n = lk.n_nodes
    B = cfg.box_side
    if rng.random() > 0.5:
        # fixed node: scaffolding for later movable attachments; the flux
        # checks apply once a movable node ties it into the chain
        if n + 1 > cfg.max_nodes:
            return None
        pos = (cfg.box_center[0] + rng.uniform(-B / 2, B / 2),
               cfg.box_center[1] + rng.uniform(-B / 2, B / 2))
        return Linkage(motor=lk.motor, joints=lk.joints + (FixedNode(position=pos),),
                       box_side=lk.box_side, box_center=lk.box_center)
    if n < 2 or n + 1 > cfg.max_nodes:
        return None
    j, k = sorted(rng.choice(np.arange(1, n + 1), size=2, replace=False))
    lengths = (float(rng.uniform(0.0, B)), float(rng.uniform(0.0, B)))
    if min(lengths) <= 0.0:
        return None
    sign = 1 if rng.random() < 0.5 else -1
    cand = Linkage(motor=lk.motor,
                   joints=lk.joints + (MovableNode(parents=(int(j), int(k)),
                                                   lengths=lengths, orientation=sign),),
                   box_side=lk.box_side, box_center=lk.box_center)
    if not _topology_ok(cand, cfg.max_nodes):
        return None
    try:
        trace(cand, cfg.samples, margin=COS_MARGIN)
    except TriangleInfeasible:
        return None
    return cand


def _try_subtraction(state, cfg):
    """Remove the last node.

    Removing fixed scaffolding mirrors the unchecked fixed addition (the
    result only needs to be a valid chain state); removing a movable node must
    leave a fully valid structure, so a movable node riding on its pivots is
    locked in until the layers above it come off.
    """
    lk = state.current
    if lk.n_nodes - 1 < 1:
        return None
    removed = lk.node(lk.n_nodes)
    cand = Linkage(motor=lk.motor, joints=lk.joints[:-1], box_side=lk.box_side,
                   box_center=lk.box_center)
    if isinstance(removed, FixedNode):
        if not _chain_valid(cand, cfg.max_nodes):
            return None
    else:
        if cand.n_nodes > 1 and not _topology_ok(cand, cfg.max_nodes):
            return None
    return cand


def _try_perturbation(state, cfg, target, rng):
    lk = state.current
    B = cfg.box_side
    i = int(rng.integers(1, lk.n_nodes + 1))
    t = float(rng.uniform(0.0, 2.0 * math.pi))
    noise = rng.normal(0.0, 0.1 * B, size=2)
    try:
        pos = forward_kinematics(lk, t)
    except TriangleInfeasible:
        return None
    half = B / 2.0
    cx, cy = lk.box_center
    if i == 1:
        m = lk.motor
        center = (float(np.clip(m.center[0] + noise[0], cx - half, cx + half)),
                  float(np.clip(m.center[1] + noise[1], cy - half, cy + half)))
        cand = Linkage(motor=MotorSpec(kind=m.kind, center=center, radius=m.radius,
                                       direction=m.direction, velocity=m.velocity),
                       joints=lk.joints, box_side=lk.box_side, box_center=lk.box_center)
    else:
        nd = lk.node(i)
        p = pos[i - 1] + noise
        if isinstance(nd, FixedNode):
            p = (float(np.clip(p[0], cx - half, cx + half)),
                 float(np.clip(p[1], cy - half, cy + half)))
            joints = list(lk.joints)
            joints[i - 2] = FixedNode(position=p)
            cand = Linkage(motor=lk.motor, joints=tuple(joints), box_side=lk.box_side,
                           box_center=lk.box_center)
        else:
            j, k = nd.parents
            lji = float(np.linalg.norm(p - pos[j - 1]))
            lki = float(np.linalg.norm(p - pos[k - 1]))
            if not (0.0 < lji <= B and 0.0 < lki <= B):
                return None
            area = signed_area(p - pos[j - 1], p - pos[k - 1])
            if area == 0.0:
                return None
            joints = list(lk.joints)
            joints[i - 2] = MovableNode(parents=nd.parents, lengths=(lji, lki),
                                        orientation=1 if area > 0 else -1)
            cand = Linkage(motor=lk.motor, joints=tuple(joints), box_side=lk.box_side,
                           box_center=lk.box_center)
    try:
        trace(cand, cfg.samples, margin=COS_MARGIN)
    except TriangleInfeasible:
        return None
    return cand


def _try_local(state, cfg, target):
    try:
        return refine_linkage(state.current, target, lam=cfg.lam)
    except (NearSingular, TriangleInfeasible):
        return None


def mutate(state, cfg, target, rng):
    """One successful move; keeps drawing fresh move types until one lands."""
    for _ in range(RETRY_CAP):
        move = MOVE_TYPES[int(rng.integers(0, 4))]
        state.move_stats.attempted[move] += 1
        if move == "addition":
            cand = _try_addition(state, cfg, target, rng)
        elif move == "subtraction":
            cand = _try_subtraction(state, cfg)
        elif move == "perturbation":
            cand = _try_perturbation(state, cfg, target, rng)
        else:
            cand = _try_local(state, cfg, target)
        if cand is not None:
            state.move_stats.succeeded[move] += 1
            return cand, move
    raise ExhaustedRetries(state.iteration)


@dataclass
class SARun:
    state: SAState
    config: SAConfig
    terminated_early: bool = False
    cancelled: bool = False

    def solution(self, target, seed=None):
        return solution_from_linkage(
            self.state.best, target, self.config.lam, solver="sa",
            seed=self.config.seed if seed is None else seed,
            config={"tMax": self.config.t_max, "tMin": self.config.t_min,
                    "iMax": self.config.i_max, "K": self.config.max_nodes,
                    "T": self.config.samples, "lambda": self.config.lam,
                    "boxSide": self.config.box_side,
                    "boxCenter": list(self.config.box_center)},
            stats={"iterations": self.state.iteration,
                   "attempted": dict(self.state.move_stats.attempted),
                   "succeeded": dict(self.state.move_stats.succeeded),
                   "accepted": dict(self.state.move_stats.accepted),
                   "terminatedEarly": self.terminated_early,
                   "cancelled": self.cancelled})


def run(cfg, target, initial=None, progress=None, should_stop=None, on_best=None):
    """Anneal for cfg.i_max iterations; deterministic for a given seed.

    ``on_best`` fires on strict improvements with (linkage, objective, iteration).
    """
    cfg.validate()
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    current = (initial or initial_linkage(cfg)).validate()
    f_cur = _safe_objective(current, target, cfg.lam)
    state = SAState(current=current, current_objective=f_cur,
                    best=current, best_objective=f_cur)
    runinfo = SARun(state=state, config=cfg)
    for i in range(cfg.i_max):
        if should_stop is not None and should_stop():
            runinfo.cancelled = True
            break
        state.iteration = i
        try:
            cand, move = mutate(state, cfg, target, rng)
        except ExhaustedRetries:
            runinfo.terminated_early = True
            break
        f_new = _safe_objective(cand, target, cfg.lam)
        delta = f_new - state.current_objective
        temperature = cooling(cfg, i)
        u = float(rng.random())
        accepted = delta <= 0.0 or (math.isfinite(delta)
                                    and u < math.exp(-delta / temperature))
        if accepted:
            state.current = cand
            state.current_objective = f_new
            state.move_stats.accepted[move] += 1
        if f_new < state.best_objective:
            state.best = cand
            state.best_objective = f_new
            if on_best is not None:
                on_best(cand, f_new, i)
        if progress is not None:
            progress({"iteration": i, "temperature": temperature,
                      "currentObjective": state.current_objective,
                      "bestObjective": state.best_objective,
                      "moveType": move, "accepted": bool(accepted)})
    state.iteration = min(state.iteration + 1, cfg.i_max)
    return runinfo
