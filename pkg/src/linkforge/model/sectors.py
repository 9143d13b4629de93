"""Sector table for the angular inner approximation of the area constraints.

The rotation group is double-covered by 2S sectors of width 2*pi/S whose start
angles step by pi/S, so the admissible region for the second link offset moves
continuously as the first offset rotates.  Selecting sector l confines d1 to
the sector and d2 to a cone at least the angular margin away from both
boundary directions, which keeps the signed area strictly positive.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def angular_margin(epsilon_area, box_side):
    """Angular margin derived from the area margin: arcsin(eps / (B^2/4))."""
    arg = min(1.0, epsilon_area / (box_side * box_side / 4.0))
    return min(math.pi / 8.0, max(1e-4, math.asin(arg)))


def _unit(theta):
    return np.array([math.cos(theta), math.sin(theta)])


@dataclass(frozen=True)
class Sector:
    index: int
    theta_lo: float
    theta_hi: float
    v_left: np.ndarray       # inward normal of the low boundary
    v_right: np.ndarray      # outward normal of the high boundary
    a_left: np.ndarray       # margin-rotated left normal, caps d2 from above
    a_right: np.ndarray      # margin-rotated opposite right normal, caps d2 from below


@dataclass(frozen=True)
class SectorTable:
    count: int
    margin: float
    sectors: tuple

    def admits(self, d1, d2, sector):
        """Would the four big-M rows hold with this sector's flag active?"""
        s = sector
        return (float(np.dot(s.v_left, d1)) >= 0.0
                and float(np.dot(s.v_right, d1)) <= 0.0
                and float(np.dot(s.a_left, d2)) <= 0.0
                and float(np.dot(s.a_right, d2)) >= 0.0)

    def best_sector(self, d1, d2):
        """Most comfortable admitting sector, or None (constructive selection)."""
        best = None
        best_margin = -np.inf
        for s in self.sectors:
            m = min(float(np.dot(s.v_left, d1)), -float(np.dot(s.v_right, d1)),
                    -float(np.dot(s.a_left, d2)), float(np.dot(s.a_right, d2)))
            if m >= 0.0 and m > best_margin:
                best = s
                best_margin = m
        return best

    def area_floor(self, d1, d2):
        """Inner bound implied for admitted pairs: |d1||d2| sin(margin)."""
        return float(np.linalg.norm(d1) * np.linalg.norm(d2) * math.sin(self.margin))


def sector_table(S, margin):
    """2S overlapping sectors; S=1 degenerates to two half-plane sectors."""
    width = 2.0 * math.pi / S if S >= 2 else math.pi
    sectors = []
    for l in range(1, 2 * S + 1):
        lo = (l - 1) * math.pi / S
        hi = lo + width
        v_left = _unit(lo + math.pi / 2.0)
        v_right = _unit(hi + math.pi / 2.0)
        # clockwise rotations of the normals by the margin (left) and by
        # pi - margin (right) bound the admissible cone for d2 on both sides
        a_left = _unit(lo + math.pi / 2.0 - margin)
        a_right = _unit(hi - math.pi / 2.0 + margin)
        sectors.append(Sector(index=l, theta_lo=lo, theta_hi=hi,
                              v_left=v_left, v_right=v_right,
                              a_left=a_left, a_right=a_right))
    return SectorTable(count=2 * S, margin=margin, sectors=tuple(sectors))
