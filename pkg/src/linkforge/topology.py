"""Combinatorial linkage topologies: usage/fixed bits, connection selectors, fluxes.

The binary sets mirror the synthesis model exactly: U (node used), F (node
fixed), C^1/C^2 (first/second parent selectors, with the verbose j=0 slot for
"connected to nothing"), plus forward fluxes Q (every used node influences the
end-effector in slot K) and reverse fluxes R (every movable node chains down
to the motor through movable nodes).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .kinematics import FixedNode, Linkage, MovableNode

ENUMERATION_GUARD = 6
BALANCE_TOL = 1e-9


class TooManyNodes(Exception):
    def __init__(self, n, k):
        super().__init__(f"linkage has {n} nodes but only {k} slots")


class GuardExceeded(Exception):
    def __init__(self, k):
        super().__init__(f"exhaustive enumeration guarded at K <= {ENUMERATION_GUARD}, got {k}")


@dataclass
class TopologyAssignment:
    """Values of the topology variables for K node slots (1-based indexing).

    C1/C2 are (K+1, K+1) arrays addressed [j, i] with 0 <= j < i <= K; row 0
    holds the verbose "no connection" slot.  Q/R are addressed the same way
    for 1 <= j < i <= K.
    """

    K: int
    U: np.ndarray
    F: np.ndarray
    C1: np.ndarray
    C2: np.ndarray
    Q: np.ndarray
    R: np.ndarray
    D: int = 0

    @classmethod
    def empty(cls, K):
        side = K + 1
        return cls(K=K,
                   U=np.zeros(side, dtype=int), F=np.zeros(side, dtype=int),
                   C1=np.zeros((side, side), dtype=int), C2=np.zeros((side, side), dtype=int),
                   Q=np.zeros((side, side), dtype=float), R=np.zeros((side, side), dtype=float))

    def C(self, j, i):
        return self.C1[j, i] + self.C2[j, i]

    def links(self):
        """(j, i) pairs, j < i, connected by a rigid link."""
        return [(j, i) for i in range(2, self.K + 1) for j in range(1, i)
                if self.C(j, i) == 1]

    def parents_of(self, i):
        """(slot-1 parent, slot-2 parent) of a movable node, or None."""
        j1 = [j for j in range(1, i) if self.C1[j, i] == 1]
        j2 = [j for j in range(1, i) if self.C2[j, i] == 1]
        if len(j1) == 1 and len(j2) == 1:
            return j1[0], j2[0]
        return None

    def key(self):
        """Hashable (U, F, C) projection, merging the two selector slots."""
        links = tuple(sorted(self.links()))
        return (tuple(int(v) for v in self.U[1:]), tuple(int(v) for v in self.F[1:]), links)

    def to_json(self):
        return {"K": self.K,
                "U": [int(v) for v in self.U[1:]],
                "F": [int(v) for v in self.F[1:]],
                "C1": self.C1.tolist(), "C2": self.C2.tolist(),
                "Q": self.Q.tolist(), "R": self.R.tolist(),
                "D": int(self.D)}

    @classmethod
    def from_json(cls, obj):
        K = int(obj["K"])
        a = cls.empty(K)
        a.U[1:] = obj["U"]
        a.F[1:] = obj["F"]
        a.C1 = np.asarray(obj["C1"], dtype=int)
        a.C2 = np.asarray(obj["C2"], dtype=int)
        a.Q = np.asarray(obj["Q"], dtype=float)
        a.R = np.asarray(obj["R"], dtype=float)
        a.D = int(obj.get("D", 0))
        return a


def check_topology(a):
    """Exact check of the four topological constraint groups.

    Returns a list of violated constraint ids; empty means valid.
    """
    K = a.K
    bad = []

    def binary(arr, name, idx):
        if arr not in (0, 1):
            bad.append(f"state:{name}{idx} not binary")

    for i in range(1, K + 1):
        binary(int(a.U[i]), "U", i)
        binary(int(a.F[i]), "F", i)
        if 1 - a.F[i] > a.U[i]:
            bad.append(f"state:1-F{i}<=U{i}")
    if a.U[1] != 1:
        bad.append("state:U1=1")
    if a.U[K] != 1:
        bad.append(f"state:U{K}=1")
    if a.F[1] != 0:
        bad.append("state:F1=0")

    for i in range(2, K + 1):
        for d, Cd in ((1, a.C1), (2, a.C2)):
            total = 0
            for j in range(0, i):
                v = int(Cd[j, i])
                if v not in (0, 1):
                    bad.append(f"connectivity:C{d}[{j},{i}] not binary")
                total += v
                if j >= 1 and v > a.U[j]:
                    bad.append(f"connectivity:C{d}[{j},{i}]<=U{j}")
            if total != 1:
                bad.append(f"connectivity:sum_j C{d}[j,{i}]=1")
        link_sum = 0
        for j in range(1, i):
            cji = a.C(j, i)
            if cji > 1:
                bad.append(f"connectivity:C[{j},{i}]<=1")
            link_sum += cji
        if link_sum != 2 - 2 * a.F[i]:
            bad.append(f"connectivity:sum_j C[j,{i}]=2-2F{i}")

    for i in range(2, K + 1):
        for j in range(1, i):
            if a.Q[j, i] < -BALANCE_TOL:
                bad.append(f"balance:Q[{j},{i}]>=0")
            if a.Q[j, i] > a.C(j, i) * K + BALANCE_TOL:
                bad.append(f"balance:Q[{j},{i}]<=C*K")
    for i in range(1, K):
        inflow = a.U[i] + sum(a.Q[j, i] for j in range(1, i))
        outflow = sum(a.Q[i, k] for k in range(i + 1, K + 1))
        if abs(inflow - outflow) > BALANCE_TOL:
            bad.append(f"balance:node{i}")

    for i in range(2, K + 1):
        for j in range(1, i):
            if a.R[j, i] < -BALANCE_TOL:
                bad.append(f"balance2:R[{j},{i}]>=0")
            if a.R[j, i] > a.C(j, i) * K + BALANCE_TOL:
                bad.append(f"balance2:R[{j},{i}]<=C*K")
            if a.R[j, i] > (1 - a.F[j]) * K + BALANCE_TOL:
                bad.append(f"balance2:R[{j},{i}]<=(1-F)*K")
    for i in range(2, K + 1):
        inflow = sum(a.R[j, i] for j in range(1, i))
        outflow = (1 - a.F[i]) + sum(a.R[i, k] for k in range(i + 1, K + 1))
        if abs(inflow - outflow) > BALANCE_TOL:
            bad.append(f"balance2:node{i}")
    return bad


@dataclass
class FluxWitness:
    forward: bool
    reverse: bool
    Q: np.ndarray | None = None
    R: np.ndarray | None = None


def _lex_smallest_path(start, goal, neighbors):
    """Lexicographically smallest path start -> goal; DFS over sorted moves."""
    stack = [(start, [start])]
    while stack:
        node, path = stack.pop()
        if node == goal:
            return path
        succ = sorted(neighbors(node), reverse=True)
        for nxt in succ:
            if nxt not in path:
                stack.append((nxt, path + [nxt]))
    return None


def flux_feasible(U, F, C):
    """Feasibility of the two flux systems plus explicit witness fluxes.

    Forward: every used node routes a unit along ascending links to slot K.
    Reverse: every movable node routes a unit along descending links through
    movable receivers down to the motor.  Witnesses take the lexicographically
    smallest qualifying path per node, so they satisfy the balance equations
    exactly but need not match any particular published flux labeling.
    """
    U = np.asarray(U)
    F = np.asarray(F)
    K = len(U) - 1
    Q = np.zeros((K + 1, K + 1))
    R = np.zeros((K + 1, K + 1))

    def up_links(i):
        return [k for k in range(i + 1, K + 1) if C[i, k] >= 1]

    def down_movable(i):
        return [j for j in range(1, i) if C[j, i] >= 1 and F[j] == 0]

    forward = True
    for i in range(1, K):
        if U[i] != 1:
            continue
        path = _lex_smallest_path(i, K, up_links)
        if path is None:
            forward = False
            break
        for a, b in zip(path, path[1:]):
            Q[a, b] += 1.0
    reverse = True
    for i in range(2, K + 1):
        if U[i] != 1 or F[i] != 0:
            continue
        path = _lex_smallest_path(i, 1, down_movable)
        if path is None:
            reverse = False
            break
        for a, b in zip(path, path[1:]):
            R[b, a] += 1.0
    return FluxWitness(forward=forward, reverse=reverse,
                       Q=Q if forward else None, R=R if reverse else None)


def assignment_from_linkage(linkage, K):
    """Map a minimal-coordinate linkage onto K topology slots.

    The end-effector (last node) is re-indexed to slot K; remaining nodes keep
    their indices and unused slots get the verbose no-connection convention
    (U=0, F=1, C0=1).  Slot-1/slot-2 selector order follows the node's
    orientation sign so the signed-area convention of the geometric model
    holds without flipping.
    """
    n = linkage.n_nodes
    if n > K:
        raise TooManyNodes(n, K)
    if n == 1 and K > 1:
        raise ValueError("single-motor linkage has no separate node for the end-effector slot")

    def slot(i):
        return K if i == n else i

    a = TopologyAssignment.empty(K)
    a.D = 0 if linkage.motor.direction == 1 else 1
    a.F[1:] = 1
    a.F[1] = 0
    for i in range(1, n + 1):
        s = slot(i)
        a.U[s] = 1
        nd = linkage.node(i) if i > 1 else None
        if i == 1:
            a.F[1] = 0
        elif isinstance(nd, FixedNode):
            a.F[s] = 1
        else:
            a.F[s] = 0
    for i in range(2, n + 1):
        nd = linkage.node(i)
        s = slot(i)
        if isinstance(nd, MovableNode):
            j, k = (slot(p) for p in nd.parents)
            first, second = (j, k) if nd.orientation == 1 else (k, j)
            a.C1[first, s] = 1
            a.C2[second, s] = 1
        else:
            a.C1[0, s] = 1
            a.C2[0, s] = 1
    for s in range(2, K + 1):
        if a.U[s] == 0 or a.F[s] == 1:
            a.C1[0, s] = 1
            a.C2[0, s] = 1
    C = a.C1[:, :] + a.C2[:, :]
    witness = flux_feasible(a.U, a.F, C)
    if witness.forward:
        a.Q = witness.Q
    if witness.reverse:
        a.R = witness.R
    return a


def enumerate_topologies(K):
    """All feasible (U, F, C) assignments for K slots, deterministic order.

    Yields full TopologyAssignment objects (canonical selector order: lower
    parent in slot 1; witness fluxes filled in).  Exhaustive, so guarded to
    small K.
    """
    if K > ENUMERATION_GUARD:
        raise GuardExceeded(K)
    if K < 2:
        raise ValueError("need at least the motor and end-effector slots (K >= 2)")

    middle = list(range(2, K))
    for used_bits in itertools.product((0, 1), repeat=len(middle)):
        used = [1] + [i for i, b in zip(middle, used_bits) if b] + [K]
        candidates = [i for i in used if i >= 2]
        for fixed_bits in itertools.product((0, 1), repeat=len(candidates)):
            fixed = {i for i, b in zip(candidates, fixed_bits) if b}
            movable = [i for i in candidates if i not in fixed]
            parent_pools = []
            feasible = True
            for i in movable:
                lower = [j for j in used if j < i]
                pool = list(itertools.combinations(lower, 2))
                if not pool:
                    feasible = False
                    break
                parent_pools.append(pool)
            if not feasible:
                continue
            for choice in itertools.product(*parent_pools):
                a = TopologyAssignment.empty(K)
                for i in used:
                    a.U[i] = 1
                a.F[1:] = 1
                a.F[1] = 0
                for i in movable:
                    a.F[i] = 0
                for i, (j, k) in zip(movable, choice):
                    a.C1[j, i] = 1
                    a.C2[k, i] = 1
                for s in range(2, K + 1):
                    if a.U[s] == 0 or a.F[s] == 1:
                        a.C1[0, s] = 1
                        a.C2[0, s] = 1
                C = a.C1 + a.C2
                witness = flux_feasible(a.U, a.F, C)
                if not (witness.forward and witness.reverse):
                    continue
                a.Q = witness.Q
                a.R = witness.R
                if check_topology(a):
                    continue
                yield a
