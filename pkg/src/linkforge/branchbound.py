"""Branch-and-bound search over topology binaries with local NLP node solves.

Nodes carry partial assignments over the usage/fixed bits, the parent-selector
bits of the logarithmic SOS1 encoding, the motor direction, and finally the
first-sample block selectors.  Unit propagation tightens each node, phase-I
restores feasibility from the parent's warm start, phase-II provides the local
bound, and complete nodes yield incumbents that are re-validated against the
exact geometric model before being accepted.
"""
from __future__ import annotations

import heapq
import itertools
import math
import threading
import time
from dataclasses import dataclass, field

import numpy as np

from .kinematics import ARBITRARY_ORDER, ROTARY, TriangleInfeasible, objective, trace
from .model import SynthesisConfig, build_geometric_exact, exact_assignment, validate
from .model.sos import n_bits
from .nlp import (FrozenStructure, GeometricNlp, NlpOptions, complete_point,
                  solve_phase1, solve_phase2)
from .solution import solution_from_linkage

PRUNE_TOL = 1e-9
INCUMBENT_VALIDATE_TOL = 1e-5


@dataclass
class Budget:
    node_limit: int = 10000
    time_limit: float | None = None       # seconds
    objective_target: float | None = None # stop once the incumbent is this good

    def validate(self):
        if self.node_limit < 1:
            raise ValueError("node limit must be positive")
        if self.time_limit is not None and self.time_limit <= 0:
            raise ValueError("time limit must be positive")
        return self


@dataclass
class Partial:
    """Partial assignment over the branching variables."""

    K: int
    U: dict = field(default_factory=dict)
    F: dict = field(default_factory=dict)
    bits: dict = field(default_factory=dict)     # (i, d, b) -> 0/1
    D: int | None = None
    blocks: dict = field(default_factory=dict)   # (i, d) -> cell index

    def copy(self):
        return Partial(K=self.K, U=dict(self.U), F=dict(self.F),
                       bits=dict(self.bits), D=self.D, blocks=dict(self.blocks))


@dataclass
class BBNode:
    node_id: int
    parent_id: int | None
    decision: str
    partial: Partial
    depth: int
    bound: float
    warm: dict | None = None


@dataclass
class Incumbent:
    solution: object
    objective: float
    found_at_node: int
    wall_clock: float


@dataclass
class SearchStats:
    created: int = 0
    explored: int = 0
    open_nodes: int = 0
    pruned: dict = field(default_factory=dict)
    incumbents: list = field(default_factory=list)

    def prune(self, reason):
        self.pruned[reason] = self.pruned.get(reason, 0) + 1

    @property
    def pruned_total(self):
        return sum(self.pruned.values())


@dataclass
class BBResult:
    incumbent: Incumbent | None
    stats: SearchStats
    status: str                  # optimal-exhausted | budget-exhausted | cancelled | target-reached
    log: list


class Conflict(Exception):
    def __init__(self, reason):
        self.reason = reason
        super().__init__(reason)


# ---------------------------------------------------------------------------
# Propagation
# ---------------------------------------------------------------------------

def _bit_pattern(member, nbits):
    """Indicator-bit values certifying ``member`` per the log-SOS1 encoding."""
    return tuple(0 if member & (1 << (b - 1)) else 1 for b in range(1, nbits + 1))


def selector_domain(partial, i, d):
    """Possible parent choices (0 = none) given decided bits and usage."""
    nbits = n_bits(i)
    domain = []
    for j in range(0, i):
        pattern = _bit_pattern(j, nbits)
        ok = True
        for b in range(1, nbits + 1):
            decided = partial.bits.get((i, d, b))
            if decided is not None and decided != pattern[b - 1]:
                ok = False
                break
        if not ok:
            continue
        if j >= 1 and partial.U.get(j) == 0:
            continue
        f = partial.F.get(i)
        if f == 1 and j != 0:
            continue
        if f == 0 and j == 0:
            continue
        domain.append(j)
    return domain


def propagate(partial, K):
    """Fixpoint of the cheap implications; raises Conflict when unsatisfiable."""
    p = partial.copy()
    for store, i, want, what in ((p.U, 1, 1, "U"), (p.U, K, 1, "U"), (p.F, 1, 0, "F")):
        if store.get(i, want) != want:
            raise Conflict(f"{what}_{i} pinned to {want}")
        store[i] = want

    def set_bit(key, value):
        old = p.bits.get(key)
        if old is None:
            p.bits[key] = value
            return True
        if old != value:
            raise Conflict(f"bit {key} forced both ways")
        return False

    def set_var(store, i, value, what):
        old = store.get(i)
        if old is None:
            store[i] = value
            return True
        if old != value:
            raise Conflict(f"{what}_{i} forced both ways")
        return False

    changed = True
    while changed:
        changed = False
        if K >= 2:
            # slot 2 has a single lower index: it can never be movable
            if p.F.get(2) == 0:
                raise Conflict("slot 2 cannot host a movable node")
            changed |= set_var(p.F, 2, 1, "F") if 2 not in p.F else False
        for i in range(2, K + 1):
            if p.U.get(i) == 0:
                changed |= set_var(p.F, i, 1, "F")
            if p.F.get(i) == 0:
                changed |= set_var(p.U, i, 1, "U")
        for i in range(2, K + 1):
            dom1 = selector_domain(p, i, 1)
            dom2 = selector_domain(p, i, 2)
            if not dom1 or not dom2:
                raise Conflict(f"empty selector domain at slot {i}")
            # movable slots need two distinct available parents
            if p.F.get(i) == 0:
                parent_pool = (set(dom1) | set(dom2)) - {0}
                if len(dom1) == 1 and dom1 == dom2:
                    raise Conflict(f"slot {i} parents collapse onto {dom1[0]}")
                if len(parent_pool) < 2:
                    raise Conflict(f"slot {i} lacks two distinct parents")
                if len(parent_pool) == 2:
                    for j in sorted(parent_pool):
                        changed |= set_var(p.U, j, 1, "U")
            # selector resolution forces the fixed flag
            for dom, other in ((dom1, dom2), (dom2, dom1)):
                if 0 not in dom and p.F.get(i) is None:
                    changed |= set_var(p.F, i, 0, "F")
                if dom == [0] and p.F.get(i) is None:
                    changed |= set_var(p.F, i, 1, "F")
            # force bits every remaining member agrees on
            for d, dom in ((1, dom1), (2, dom2)):
                nbits = n_bits(i)
                for b in range(1, nbits + 1):
                    vals = {_bit_pattern(j, nbits)[b - 1] for j in dom}
                    if len(vals) == 1:
                        changed |= set_bit((i, d, b), vals.pop())
    _flux_reachability(p, K)
    return p


def _flux_reachability(p, K):
    """Optimistic reachability: conflicts only when no completion can work."""
    possible = np.zeros((K + 1, K + 1), dtype=bool)
    for i in range(2, K + 1):
        if p.F.get(i) == 1 or p.U.get(i) == 0:
            continue
        for d in (1, 2):
            for j in selector_domain(p, i, d):
                if j >= 1:
                    possible[j, i] = True
    # forward: every decided-used node must be able to reach slot K ascending
    reach = np.zeros(K + 1, dtype=bool)
    reach[K] = True
    for i in range(K - 1, 0, -1):
        reach[i] = any(possible[i, k] and reach[k] for k in range(i + 1, K + 1))
    for i in range(1, K):
        if p.U.get(i) == 1 and not reach[i]:
            raise Conflict(f"used slot {i} cannot reach the end-effector")
    # reverse: decided-movable nodes must descend to the motor through
    # possibly-movable receivers
    down = np.zeros(K + 1, dtype=bool)
    down[1] = True
    for i in range(2, K + 1):
        down[i] = any(possible[j, i] and down[j] and p.F.get(j) != 1
                      for j in range(1, i))
    for i in range(2, K + 1):
        if p.F.get(i) == 0 and not down[i]:
            raise Conflict(f"movable slot {i} cannot chain down to the motor")


# ---------------------------------------------------------------------------
# Branching order
# ---------------------------------------------------------------------------

def next_decision(partial, cfg):
    """First undecided variable: U bits, F bits, selector bits, D, blocks."""
    K = cfg.K
    for i in range(2, K):
        if i not in partial.U:
            return ("U", i)
    for i in range(2, K + 1):
        if i not in partial.F:
            return ("F", i)
    for i in range(2, K + 1):
        for d in (1, 2):
            dom = selector_domain(partial, i, d)
            if len(dom) > 1:
                for b in range(1, n_bits(i) + 1):
                    if (i, d, b) not in partial.bits:
                        return ("bit", (i, d, b))
    if (cfg.motor_kind == ROTARY and cfg.curve_mode != ARBITRARY_ORDER
            and partial.D is None):
        return ("D", None)
    for i in range(3, K + 1):
        if partial.F.get(i) != 0:
            continue
        for d in (1, 2):
            if (i, d) not in partial.blocks:
                return ("block", (i, d))
    return None


def children_of(partial, decision, cfg):
    kind, key = decision
    out = []
    if kind == "U":
        for v in (1, 0):
            child = partial.copy()
            child.U[key] = v
            out.append((f"U_{key}={v}", child))
    elif kind == "F":
        for v in (0, 1):
            child = partial.copy()
            child.F[key] = v
            out.append((f"F_{key}={v}", child))
    elif kind == "bit":
        i, d, b = key
        for v in (0, 1):
            child = partial.copy()
            child.bits[key] = v
            out.append((f"IC{d}_{i}_b{b}={v}", child))
    elif kind == "D":
        for v in (0, 1):
            child = partial.copy()
            child.D = v
            out.append((f"D={v}", child))
    else:
        i, d = key
        for cell in range(cfg.S * cfg.S):
            child = partial.copy()
            child.blocks[(i, d)] = cell
            out.append((f"blk{d}_{i}={cell}", child))
    return out


# ---------------------------------------------------------------------------
# Node NLP construction
# ---------------------------------------------------------------------------

def structure_from_partial(partial, cfg):
    K = cfg.K
    used = [1] + [i for i in range(2, K) if partial.U.get(i) == 1] + [K]
    fixed = []
    movable = []
    floating = []
    parents = {}
    for i in used[1:]:
        f = partial.F.get(i)
        if f == 1:
            fixed.append(i)
            continue
        dom1 = selector_domain(partial, i, 1)
        dom2 = selector_domain(partial, i, 2)
        if f == 0 and len(dom1) == 1 and len(dom2) == 1 and dom1[0] >= 1 and dom2[0] >= 1:
            movable.append(i)
            parents[i] = (dom1[0], dom2[0])
        else:
            floating.append(i)
    motor_mode = "parametric"
    direction = 1
    if cfg.motor_kind == ROTARY and cfg.curve_mode != ARBITRARY_ORDER:
        if partial.D is None:
            motor_mode = "floating"
        else:
            direction = 1 if partial.D == 0 else -1
    return FrozenStructure(K=K, used=tuple(used), fixed=tuple(fixed),
                           movable=tuple(movable), parents=parents,
                           direction=direction, motor_kind=cfg.motor_kind,
                           motor_mode=motor_mode, floating=tuple(floating))


def _block_bounds(partial, cfg):
    out = {}
    B, S = cfg.box_side, cfg.S
    h = B / S
    for (i, d), cell in partial.blocks.items():
        sx, sy = cell % S, cell // S
        out[(i, d)] = (sx * h - B / 2, (sx + 1) * h - B / 2,
                       sy * h - B / 2, (sy + 1) * h - B / 2)
    return out


def node_nlp(partial, cfg, target):
    structure = structure_from_partial(partial, cfg)
    blocks = {k: v for k, v in _block_bounds(partial, cfg).items()
              if k[0] in structure.parents}
    return GeometricNlp(structure, cfg.T, cfg.box_side, cfg.box_center,
                        cfg.eps_area, target=target, lam=cfg.lam, blocks=blocks,
                        node_boxes=cfg.node_boxes, curve_mode=cfg.curve_mode)


def _seed_points(nlp, cfg, target):
    """Deterministic multi-start recipes: box corners plus the curve centroid."""
    tgt = np.asarray(target.samples, dtype=float)
    centroid = tgt.mean(axis=0)
    scaled_tgt = (tgt - nlp.center) / nlp.B
    c0 = (centroid - nlp.center) / nlp.B
    corners = [np.array([sx, sy]) for sx in (-0.25, 0.25) for sy in (-0.25, 0.25)]
    edges = [np.array([-0.25, 0.0]), np.array([0.25, 0.0]), np.array([0.0, 0.25])]
    recipes = [c0] + [c0 + c for c in corners] + [c0 + e for e in edges]
    points = []
    for spot in recipes[:8]:
        point = {"motor": np.array([c0[0], c0[1], 0.125])}
        for slot in nlp.structure.used:
            if slot == nlp.structure.K and nlp.structure.K != 1:
                point[slot] = scaled_tgt.copy()
            elif slot == 1:
                point[1] = None
            else:
                point[slot] = np.tile(spot, (nlp.T, 1))
        point = {k: v for k, v in point.items() if v is not None}
        points.append(point)
    return points


def _fit_motor_only(cfg, target):
    """Closed-form least squares fit of a bare motor to the target curve.

    The slot encoding cannot express the single-node structure, so the root
    seeds the incumbent with it directly (it is optimal for circular targets).
    """
    from .kinematics import Linkage, MotorSpec, sample_times

    if cfg.motor_kind != ROTARY:
        return None
    tgt = np.asarray(target.samples, dtype=float)
    T = len(tgt)
    times = sample_times(T)
    best = None
    if target.mode == ARBITRARY_ORDER:
        # matching is order-free: the geometric circle fit suffices
        c = tgt.mean(axis=0)
        r = max(float(np.mean(np.linalg.norm(tgt - c, axis=1))), 1e-6 * cfg.box_side)
        for direction in (1, -1):
            lk = Linkage(motor=MotorSpec(center=(float(c[0]), float(c[1])), radius=r,
                                         direction=direction),
                         joints=(), box_side=cfg.box_side, box_center=cfg.box_center)
            val = objective(lk, target, cfg.lam).total
            if best is None or val < best[0]:
                best = (val, lk)
        return best
    for direction in (1, -1):
        A = np.zeros((2 * T, 3))
        A[0::2, 0] = 1.0
        A[1::2, 1] = 1.0
        A[0::2, 2] = direction * np.sin(times)
        A[1::2, 2] = np.cos(times)
        sol, *_ = np.linalg.lstsq(A, tgt.reshape(-1), rcond=None)
        cx, cy, r = sol
        r = max(float(r), 1e-6 * cfg.box_side)
        lk = Linkage(motor=MotorSpec(center=(float(cx), float(cy)), radius=r,
                                     direction=direction),
                     joints=(), box_side=cfg.box_side, box_center=cfg.box_center)
        val = objective(lk, target, cfg.lam).total
        if best is None or val < best[0]:
            best = (val, lk)
    return best


# ---------------------------------------------------------------------------
# Search
# ---------------------------------------------------------------------------

class _Shared:
    """Heap + incumbent + stats; a single lock guards every mutation."""

    def __init__(self, cfg, target, budget, options, log_sink, node_order="best"):
        self.cfg = cfg
        self.target = target
        self.budget = budget
        self.options = options
        self.node_order = node_order
        self.lock = threading.Lock()
        self.heap = []
        self.counter = itertools.count()
        self.node_ids = itertools.count()
        self.stats = SearchStats()
        self.incumbent = None
        self.log = [] if log_sink is None else log_sink
        self.t0 = time.monotonic()
        self.exact_model = build_geometric_exact(cfg)
        self.on_incumbent = None

    def elapsed(self):
        return time.monotonic() - self.t0

    def out_of_time(self):
        return (self.budget.time_limit is not None
                and self.elapsed() >= self.budget.time_limit)

    def _key(self, node):
        if self.node_order == "depth":
            return (-node.depth, node.bound, node.node_id)
        return (node.bound, node.depth, node.node_id)

    def push(self, node):
        heapq.heappush(self.heap, (*self._key(node), next(self.counter), node))
        self.stats.created += 1
        self.stats.open_nodes += 1

    def pop(self):
        if not self.heap:
            return None
        node = heapq.heappop(self.heap)[-1]
        self.stats.open_nodes -= 1
        return node

    def prune(self, reason):
        self.stats.prune(reason)

    def record_explored(self):
        self.stats.explored += 1

    def update_incumbent(self, linkage, obj, node_id):
        if self.incumbent is not None and obj >= self.incumbent.objective - PRUNE_TOL:
            return False
        sol = solution_from_linkage(linkage, self.target, self.cfg.lam, solver="bb")
        self.incumbent = Incumbent(solution=sol, objective=obj,
                                   found_at_node=node_id, wall_clock=self.elapsed())
        self.stats.incumbents.append({"wallClock": self.elapsed(), "objective": obj,
                                      "node": node_id})
        if self.on_incumbent is not None:
            self.on_incumbent(linkage, obj)
        return True


def _validated_incumbent(shared, nlp, x, node_id):
    """Extract, re-trace and validate a complete node's solution."""
    cfg = shared.cfg
    try:
        linkage = nlp.to_linkage(x)
        linkage.validate()
        traj = trace(linkage, cfg.T)
    except (TriangleInfeasible, ValueError):
        return None
    br = objective(linkage, shared.target, cfg.lam)
    values = exact_assignment(cfg, linkage, traj)
    report = validate(shared.exact_model, values, tol=INCUMBENT_VALIDATE_TOL)
    if not report.satisfied:
        return None
    return linkage, br.total


def _process_node(shared, node, opts):
    cfg = shared.cfg
    entry = {"nodeId": node.node_id, "parentId": node.parent_id,
             "decision": node.decision, "depth": node.depth,
             "propagationConflict": False, "phase1Violation": None,
             "phase2Objective": None}
    incumbent_obj = shared.incumbent.objective if shared.incumbent else math.inf
    if node.bound >= incumbent_obj - PRUNE_TOL:
        entry["prunedReason"] = "bound"
        entry["phase2Objective"] = node.bound
        shared.prune("bound")
        shared.log.append(entry)
        return
    try:
        partial = propagate(node.partial, cfg.K)
    except Conflict as exc:
        entry["propagationConflict"] = True
        entry["prunedReason"] = f"propagation: {exc.reason}"
        shared.prune("propagation")
        shared.log.append(entry)
        return
    nlp = node_nlp(partial, cfg, shared.target)
    starts = ([nlp.pack_point(complete_point(nlp, node.warm))] if node.warm is not None
              else [nlp.pack_point(p) for p in _seed_points(nlp, cfg, shared.target)])
    best = None
    for x0 in starts:
        res1 = solve_phase1(nlp, x0, opts)
        if not res1.feasible:
            continue
        res2 = solve_phase2(nlp, nlp.pack_point(res1.point), opts)
        if best is None or res2.objective < best[1].objective:
            best = (res1, res2)
        if res2.objective <= opts.feas_tol:
            break
    if best is None:
        entry["prunedReason"] = "infeasible"
        entry["phase1Violation"] = res1.max_violation if starts else None
        shared.prune("infeasible")
        shared.log.append(entry)
        return
    res1, res2 = best
    used_count = sum(1 for i in range(1, cfg.K + 1) if partial.U.get(i) == 1)
    bound = res2.objective + cfg.lam * used_count
    entry["phase1Violation"] = res1.max_violation
    entry["phase2Objective"] = bound
    if bound >= incumbent_obj - PRUNE_TOL:
        entry["prunedReason"] = "bound"
        shared.prune("bound")
        shared.log.append(entry)
        return
    complete = next_decision(partial, cfg) is None
    if nlp.structure.motor_mode == "parametric" and not nlp.structure.floating \
            and res2.max_violation <= opts.feas_tol:
        got = _validated_incumbent(shared, nlp, nlp.pack_point(res2.point), node.node_id)
        if got is not None:
            linkage, obj = got
            if shared.update_incumbent(linkage, obj, node.node_id):
                entry["incumbent"] = obj
    decision = next_decision(partial, cfg)
    shared.record_explored()
    if decision is None:
        entry["leaf"] = True
        shared.log.append(entry)
        return
    warm = res1.point
    for label, child_partial in children_of(partial, decision, cfg):
        child = BBNode(node_id=next(shared.node_ids), parent_id=node.node_id,
                       decision=label, partial=child_partial,
                       depth=node.depth + 1, bound=bound, warm=warm)
        shared.push(child)
    shared.log.append(entry)


def _seed_incumbents(shared, cfg, target, initial_incumbent):
    fit = _fit_motor_only(cfg, target)
    if fit is not None:
        val, lk = fit
        shared.update_incumbent(lk, val, node_id=-1)
    if initial_incumbent is not None:
        try:
            val = objective(initial_incumbent.validate(), target, cfg.lam).total
        except (TriangleInfeasible, ValueError):
            return
        shared.update_incumbent(initial_incumbent, val, node_id=-1)


def solve(cfg, target, budget=None, options=None, should_stop=None, log_sink=None,
          node_order="best", on_incumbent=None, initial_incumbent=None):
    """Single-worker search; deterministic for a fixed configuration.

    ``initial_incumbent`` seeds the bound with a known design (the steering
    loop re-submits the previous run's best linkage this way).
    """
    cfg.validate()
    budget = (budget or Budget()).validate()
    opts = options or NlpOptions(max_outer=25, max_inner=120)
    shared = _Shared(cfg, target, budget, opts, log_sink, node_order=node_order)
    shared.on_incumbent = on_incumbent
    _seed_incumbents(shared, cfg, target, initial_incumbent)
    root = BBNode(node_id=next(shared.node_ids), parent_id=None, decision="root",
                  partial=Partial(K=cfg.K), depth=0, bound=-math.inf)
    shared.push(root)
    status = "optimal-exhausted"
    processed = 0
    while True:
        if should_stop is not None and should_stop():
            status = "cancelled"
            break
        if shared.out_of_time():
            status = "budget-exhausted"
            break
        if processed >= budget.node_limit:
            status = "budget-exhausted"
            break
        if (budget.objective_target is not None and shared.incumbent is not None
                and shared.incumbent.objective <= budget.objective_target):
            status = "target-reached"
            break
        node = shared.pop()
        if node is None:
            break
        processed += 1
        _process_node(shared, node, opts)
    return BBResult(incumbent=shared.incumbent, stats=shared.stats, status=status,
                    log=shared.log)


def solve_parallel(cfg, target, budget=None, options=None, workers=1,
                   should_stop=None, log_sink=None, on_incumbent=None,
                   initial_incumbent=None):
    """Work-sharing over threads; incumbent updates are globally ordered."""
    if workers <= 1:
        return solve(cfg, target, budget=budget, options=options,
                     should_stop=should_stop, log_sink=log_sink,
                     on_incumbent=on_incumbent, initial_incumbent=initial_incumbent)
    cfg.validate()
    budget = (budget or Budget()).validate()
    opts = options or NlpOptions(max_outer=25, max_inner=120)
    shared = _Shared(cfg, target, budget, opts, log_sink)
    shared.on_incumbent = on_incumbent
    _seed_incumbents(shared, cfg, target, initial_incumbent)
    root = BBNode(node_id=next(shared.node_ids), parent_id=None, decision="root",
                  partial=Partial(K=cfg.K), depth=0, bound=-math.inf)
    with shared.lock:
        shared.push(root)
    state = {"processed": 0, "status": "optimal-exhausted", "active": 0}

    def worker():
        while True:
            with shared.lock:
                if should_stop is not None and should_stop():
                    state["status"] = "cancelled"
                    return
                if shared.out_of_time() or state["processed"] >= budget.node_limit:
                    state["status"] = "budget-exhausted"
                    return
                if (budget.objective_target is not None and shared.incumbent is not None
                        and shared.incumbent.objective <= budget.objective_target):
                    state["status"] = "target-reached"
                    return
                node = shared.pop()
                if node is not None:
                    state["processed"] += 1
                    state["active"] += 1
                elif state["active"] == 0:
                    return
            if node is None:
                time.sleep(0.001)
                continue
            try:
                _process_node_locked(shared, node, opts)
            finally:
                with shared.lock:
                    state["active"] -= 1

    def _process_node_locked(sh, node, o):
        # node solves run unlocked; queue/incumbent/log mutations take the lock
        _process_node(_LockedView(sh), node, o)

    threads = [threading.Thread(target=worker, daemon=True) for _ in range(workers)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    return BBResult(incumbent=shared.incumbent, stats=shared.stats,
                    status=state["status"], log=shared.log)


class _LockedView:
    """Shared-state proxy serializing queue, stats, incumbent and log access."""

    def __init__(self, shared):
        self._s = shared

    def __getattr__(self, name):
        return getattr(self._s, name)

    def push(self, node):
        with self._s.lock:
            self._s.push(node)

    def prune(self, reason):
        with self._s.lock:
            self._s.prune(reason)

    def record_explored(self):
        with self._s.lock:
            self._s.record_explored()

    def update_incumbent(self, linkage, obj, node_id):
        with self._s.lock:
            return self._s.update_incumbent(linkage, obj, node_id)


def solution_of(result, cfg, target):
    """Solution JSON payload for the best incumbent (None when none found)."""
    if result.incumbent is None:
        return None
    sol = result.incumbent.solution
    sol.stats = {"status": result.status,
                 "explored": result.stats.explored,
                 "created": result.stats.created,
                 "open": result.stats.open_nodes,
                 "pruned": dict(result.stats.pruned),
                 "incumbents": list(result.stats.incumbents)}
    sol.config = {"K": cfg.K, "T": cfg.T, "S": cfg.S, "lambda": cfg.lam,
                  "boxSide": cfg.box_side, "boxCenter": list(cfg.box_center),
                  "curveMode": cfg.curve_mode, "motorKind": cfg.motor_kind}
    return sol
