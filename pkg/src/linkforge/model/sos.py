"""Logarithmic binary encodings of SOS1 / SOS2 sets.

SOS1 over m ordered members introduces ceil(log2 m) indicator bits; member j
may be nonzero only when every bit agrees with the complement of j's binary
representation.  SOS2 over lambda_0..lambda_S reduces to an SOS1 over S
segment selectors plus per-member caps.
"""
from __future__ import annotations

import math

from .ir import BINARY, CONTINUOUS, LE, ModelBuilder


def n_bits(m):
    return 0 if m <= 1 else math.ceil(math.log2(m))


def encode_sos1(members, builder=None, prefix=None, tag="NodeConnectivity"):
    """Emit the bit caps making ``members`` an SOS1 set.

    Members must already be declared when a builder is passed; standalone use
    declares them in [0, 1].  Returns (builder, bit names).
    """
    if builder is None:
        builder = ModelBuilder(kind="sos1-fragment")
        for m in members:
            builder.var(m, CONTINUOUS, 0.0, 1.0, role="sos1-member")
    if prefix is None:
        prefix = "I_" + members[0]
    m = len(members)
    bits = []
    for b in range(1, n_bits(m) + 1):
        bits.append(builder.var(f"{prefix}_b{b}", BINARY, 0.0, 1.0, role="sos1-bit"))
    for j, member in enumerate(members):
        for b in range(1, n_bits(m) + 1):
            if j & (1 << (b - 1)) == 0:
                builder.lin(f"{prefix}_m{j}_b{b}", [(member, 1.0), (bits[b - 1], -1.0)],
                            LE, 0.0, tag)
            else:
                builder.lin(f"{prefix}_m{j}_b{b}", [(member, 1.0), (bits[b - 1], 1.0)],
                            LE, 1.0, tag)
    builder.sos(f"{prefix}_sos1", 1, members)
    return builder, bits


def sos1_bit_values(member_index, m):
    """Bit pattern certifying that ``member_index`` may be the nonzero member."""
    return [0 if member_index & (1 << (b - 1)) else 1 for b in range(1, n_bits(m) + 1)]


def encode_sos2(members, builder=None, prefix=None, tag="PWLBound"):
    """SOS2 over lambda_0..lambda_S: segment selectors + caps + inner SOS1.

    Caps are lambda_i <= seg_{i-1} + seg_i with the out-of-range selectors
    fixed at zero, so at most two consecutive lambdas can be live.
    """
    if builder is None:
        builder = ModelBuilder(kind="sos2-fragment")
        for m in members:
            builder.var(m, CONTINUOUS, 0.0, 1.0, role="sos2-member")
    if prefix is None:
        prefix = "J_" + members[0]
    S = len(members) - 1
    if S < 1:
        raise ValueError("SOS2 needs at least two members")
    segs = [builder.var(f"{prefix}_s{s}", CONTINUOUS, 0.0, 1.0, role="sos2-aux")
            for s in range(S)]
    _, bits = encode_sos1(segs, builder=builder, prefix=f"{prefix}_seg", tag=tag)
    for i, member in enumerate(members):
        terms = [(member, 1.0)]
        if i - 1 >= 0:
            terms.append((segs[i - 1], -1.0))
        if i <= S - 1:
            terms.append((segs[i], -1.0))
        builder.lin(f"{prefix}_cap{i}", terms, LE, 0.0, tag)
    builder.sos(f"{prefix}_sos2", 2, members)
    return builder, segs, bits


def sos2_weights(value, breakpoints):
    """Interpolation weights placing ``value`` on the chord grid.

    Returns (weights, segment index): weights live on the two breakpoints
    bracketing value, so they satisfy the SOS2 encoding constructively.
    """
    pts = list(breakpoints)
    S = len(pts) - 1
    if value <= pts[0]:
        seg = 0
    elif value >= pts[-1]:
        seg = S - 1
    else:
        seg = 0
        for s in range(S):
            if pts[s] <= value <= pts[s + 1]:
                seg = s
                break
    h = pts[seg + 1] - pts[seg]
    t = (value - pts[seg]) / h
    t = min(1.0, max(0.0, t))
    weights = [0.0] * (S + 1)
    weights[seg] = 1.0 - t
    weights[seg + 1] = t
    return weights, seg
