"""Topology encoding: constraint checks, flux feasibility, enumeration."""
import itertools

import numpy as np
import pytest

from helpers import (linkage_from_topology, lp_forward_feasible,
                     lp_reverse_feasible, planted_linkage)
from linkforge.kinematics import FixedNode, Linkage, MotorSpec, MovableNode
from linkforge.topology import (
    GuardExceeded,
    TooManyNodes,
    TopologyAssignment,
    assignment_from_linkage,
    check_topology,
    enumerate_topologies,
    flux_feasible,
)


def jansen_assignment():
    """Seven-node leg mechanism with its published forward flux labeling."""
    a = TopologyAssignment.empty(7)
    a.U[1:] = 1
    a.F[1:] = [0, 1, 0, 0, 0, 0, 0]
    links = {3: (2, 1), 5: (2, 1), 4: (3, 2), 6: (5, 4), 7: (6, 5)}
    for i, (j, k) in links.items():
        a.C1[j, i] = 1
        a.C2[k, i] = 1
    a.C1[0, 2] = a.C2[0, 2] = 1
    for (j, i), q in {(1, 3): 0.5, (1, 5): 0.5, (2, 3): 0.5, (2, 4): 0.0,
                      (2, 5): 0.5, (3, 4): 2.0, (4, 6): 3.0, (5, 6): 1.0,
                      (5, 7): 1.0, (6, 7): 5.0}.items():
        a.Q[j, i] = q
    witness = flux_feasible(a.U, a.F, a.C1 + a.C2)
    assert witness.reverse
    a.R = witness.R
    return a


def test_jansen_passes_all_checks():
    a = jansen_assignment()
    assert check_topology(a) == []
    w = flux_feasible(a.U, a.F, a.C1 + a.C2)
    assert w.forward and w.reverse
    # witness balance spot check at node 6: 1 + Q46 + Q56 = Q67
    q = w.Q
    assert a.U[6] + q[4, 6] + q[5, 6] == pytest.approx(q[6, 7])


def test_jansen_motor_must_be_movable():
    a = jansen_assignment()
    a.F[1] = 1
    assert any(v.startswith("state:F1") for v in check_topology(a))


def test_single_parent_movable_detected():
    a = jansen_assignment()
    a.C2[1, 3] = 0
    a.C2[0, 3] = 1
    bad = check_topology(a)
    assert any("sum_j C[j,3]=2-2F3" in v for v in bad)


def test_jansen_single_bit_flips_all_caught():
    base = jansen_assignment()
    assert check_topology(base) == []
    K = base.K

    def flips():
        for i in range(1, K + 1):
            yield ("U", 0, i)
            yield ("F", 0, i)
        for i in range(2, K + 1):
            for j in range(0, i):
                yield ("C1", j, i)
                yield ("C2", j, i)

    for name, j, i in flips():
        a = jansen_assignment()
        arr = getattr(a, name)
        if name in ("U", "F"):
            arr[i] = 1 - arr[i]
        else:
            arr[j, i] = 1 - arr[j, i]
        assert check_topology(a), f"flip of {name}[{j},{i}] went unnoticed"


def test_flux_isolated_fixed_node_forward_infeasible():
    # K=4: node 2 used+fixed but linked to nothing; 4 hangs off (1, 3)
    a = TopologyAssignment.empty(4)
    a.U[1:] = [1, 1, 1, 1]
    a.F[1:] = [0, 1, 1, 0]
    a.C1[1, 4] = 1
    a.C2[3, 4] = 1
    for s in (2, 3):
        a.C1[0, s] = a.C2[0, s] = 1
    w = flux_feasible(a.U, a.F, a.C1 + a.C2)
    assert not w.forward


def test_flux_both_parents_fixed_reverse_infeasible():
    # movable node 4 with both parents fixed never moves
    a = TopologyAssignment.empty(4)
    a.U[1:] = [1, 1, 1, 1]
    a.F[1:] = [0, 1, 1, 0]
    a.C1[2, 4] = 1
    a.C2[3, 4] = 1
    for s in (2, 3):
        a.C1[0, s] = a.C2[0, s] = 1
    w = flux_feasible(a.U, a.F, a.C1 + a.C2)
    assert not w.reverse


def _structural_candidates(K):
    """All (U, F, C) combos satisfying state/connectivity by construction."""
    middle = list(range(2, K))
    for used_bits in itertools.product((0, 1), repeat=len(middle)):
        used = [1] + [i for i, b in zip(middle, used_bits) if b] + [K]
        cand = [i for i in used if i >= 2]
        for fixed_bits in itertools.product((0, 1), repeat=len(cand)):
            fixed = {i for i, b in zip(cand, fixed_bits) if b}
            movable = [i for i in cand if i not in fixed]
            pools = []
            ok = True
            for i in movable:
                pool = list(itertools.combinations([j for j in used if j < i], 2))
                if not pool:
                    ok = False
                    break
                pools.append(pool)
            if not ok:
                continue
            for choice in itertools.product(*pools):
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
                        a.C1[0, s] = a.C2[0, s] = 1
                yield a


@pytest.mark.parametrize("K", [2, 3, 4])
def test_reachability_equals_lp_feasibility(K):
    for a in _structural_candidates(K):
        C = a.C1 + a.C2
        w = flux_feasible(a.U, a.F, C)
        assert w.forward == lp_forward_feasible(a.U, a.F, C, K)
        assert w.reverse == lp_reverse_feasible(a.U, a.F, C, K)
        if w.forward:
            a.Q = w.Q
        if w.reverse:
            a.R = w.R
        if w.forward and w.reverse:
            assert check_topology(a) == []


def test_enumeration_counts_and_membership():
    # derived by exhaustive enumeration: no feasible 2-slot topology exists
    # (node 2 can never take two lower parents), one 3-slot topology (four-bar)
    assert list(enumerate_topologies(2)) == []
    threes = list(enumerate_topologies(3))
    assert len(threes) == 1
    a = threes[0]
    assert list(a.U[1:]) == [1, 1, 1]
    assert list(a.F[1:]) == [0, 1, 0]
    assert a.links() == [(1, 3), (2, 3)]
    with pytest.raises(GuardExceeded):
        list(enumerate_topologies(7))


def test_enumeration_deterministic_and_structurally_sound():
    first = [a.key() for a in enumerate_topologies(4)]
    second = [a.key() for a in enumerate_topologies(4)]
    assert first == second
    assert len(set(first)) == len(first)
    for a in enumerate_topologies(4):
        for i in range(2, a.K + 1):
            parents = a.parents_of(i)
            if parents:
                j, k = parents
                assert j != k and j < i and k < i


def test_assignment_from_linkage_four_bar():
    four_bar = Linkage(
        motor=MotorSpec(center=(0, 0), radius=1.0, direction=1),
        joints=(FixedNode(position=(3.0, 0.0)),
                MovableNode(parents=(1, 2), lengths=(2.5, 2.5), orientation=1)),
        box_side=8.0,
    )
    a = assignment_from_linkage(four_bar, 3)
    assert list(a.U[1:]) == [1, 1, 1]
    assert list(a.F[1:]) == [0, 1, 0]
    assert a.links() == [(1, 3), (2, 3)]
    assert check_topology(a) == []


def test_assignment_from_linkage_reindexes_end_effector():
    four_bar = Linkage(
        motor=MotorSpec(center=(0, 0), radius=1.0, direction=1),
        joints=(FixedNode(position=(3.0, 0.0)),
                MovableNode(parents=(1, 2), lengths=(2.5, 2.5), orientation=1)),
        box_side=8.0,
    )
    a = assignment_from_linkage(four_bar, 5)
    assert list(a.U[1:]) == [1, 1, 0, 0, 1]
    assert a.links() == [(1, 5), (2, 5)]
    assert check_topology(a) == []


def test_assignment_from_linkage_errors():
    solo = Linkage(motor=MotorSpec(center=(0, 0), radius=1.0, direction=1))
    with pytest.raises(ValueError):
        assignment_from_linkage(solo, 2)
    rng = np.random.default_rng(0)
    lk = planted_linkage(rng, 4)
    with pytest.raises(TooManyNodes):
        assignment_from_linkage(lk, lk.n_nodes - 1)


def test_round_trip_random_linkages():
    rng = np.random.default_rng(42)
    for _ in range(25):
        K = int(rng.integers(3, 6))
        lk = planted_linkage(rng, K)
        a = assignment_from_linkage(lk, K)
        assert check_topology(a) == []
        w = flux_feasible(a.U, a.F, a.C1 + a.C2)
        assert w.forward and w.reverse


def _compacted_key(a):
    """(U, F, links) with unused slots dropped and slots renumbered 1..N."""
    used = [s for s in range(1, a.K + 1) if a.U[s] == 1]
    rank = {s: n + 1 for n, s in enumerate(used)}
    links = tuple(sorted((rank[j], rank[i]) for j, i in a.links()))
    return (len(used), tuple(int(a.F[s]) for s in used), links)


def test_round_trip_preserves_compacted_topology():
    # the linkage mapping packs nodes densely (end-effector in slot K), so the
    # round trip preserves structure up to relabeling of unused middle slots
    rng = np.random.default_rng(9)
    for a in enumerate_topologies(4):
        lk = linkage_from_topology(rng, a, T=6)
        back = assignment_from_linkage(lk, 4)
        assert _compacted_key(back) == _compacted_key(a)


def test_assignment_json_roundtrip():
    a = jansen_assignment()
    b = TopologyAssignment.from_json(a.to_json())
    assert b.key() == a.key()
    assert np.allclose(b.Q, a.Q)
    assert b.D == a.D
