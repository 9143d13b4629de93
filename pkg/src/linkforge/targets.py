"""Target-curve ingestion: arc-length resampling and scale-derived defaults."""
from __future__ import annotations

import numpy as np

from .kinematics import FIXED_ORDER, TargetCurve


def close_polyline(points):
    """Append the first point when the sketch does not end where it started."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
        raise ValueError("polyline must be an (n >= 2, 2) array")
    if not np.allclose(pts[0], pts[-1]):
        pts = np.vstack([pts, pts[0]])
    return pts


def resample_closed(points, T):
    """T points at equal arc length along the closed polyline, keeping the start.

    Sample q (q = 0..T-1) sits at arc position q * perimeter / T, so resampling
    an equal-chord polygon with the same T reproduces it exactly.
    """
    pts = close_polyline(points)
    seg = np.diff(pts, axis=0)
    seglen = np.linalg.norm(seg, axis=1)
    perimeter = float(seglen.sum())
    if perimeter <= 0.0:
        raise ValueError("degenerate sketch: zero total arc length")
    cum = np.concatenate([[0.0], np.cumsum(seglen)])
    targets = np.arange(T) * perimeter / T
    idx = np.searchsorted(cum, targets, side="right") - 1
    idx = np.clip(idx, 0, len(seglen) - 1)
    frac = (targets - cum[idx]) / np.where(seglen[idx] > 0, seglen[idx], 1.0)
    return pts[idx] + frac[:, None] * seg[idx]


def make_target(points, T, mode=FIXED_ORDER):
    return TargetCurve(samples=resample_closed(points, T), mode=mode).validate()


def curve_centroid(samples):
    return np.asarray(samples, dtype=float).mean(axis=0)


def default_box(samples):
    """Workspace square: side 2x the bounding-box diagonal, centered on the centroid."""
    pts = np.asarray(samples, dtype=float)
    span = pts.max(axis=0) - pts.min(axis=0)
    diag = float(np.hypot(span[0], span[1]))
    if diag <= 0.0:
        raise ValueError("target curve has zero extent")
    c = curve_centroid(pts)
    return 2.0 * diag, (float(c[0]), float(c[1]))


def default_lambda(samples):
    """Scale-invariant default regularization weight."""
    pts = np.asarray(samples, dtype=float)
    d = pts - pts.mean(axis=0)
    return 0.01 * float(np.mean(np.sum(d * d, axis=1)))
