/** Equal-arc-length resampling of sketched polylines (mirrors the backend). */

export type Point = [number, number];

export class SketchError extends Error {}

/** Append the first point when the stroke does not end where it started. */
export function closePolyline(points: Point[]): Point[] {
  if (points.length < 2) {
    throw new SketchError("sketch needs at least two points");
  }
  const first = points[0];
  const last = points[points.length - 1];
  if (first[0] === last[0] && first[1] === last[1]) {
    return points.slice();
  }
  return [...points, [first[0], first[1]]];
}

/**
 * T points at equal arc length along the closed polyline, keeping the start.
 *
 * Sample q sits at arc position q * perimeter / T, so resampling an
 * equal-chord polygon with the same T reproduces it exactly (idempotence).
 */
export function resampleClosed(points: Point[], T: number): Point[] {
  if (points.length < 3) {
    throw new SketchError("sketch needs at least three points");
  }
  if (T < 3) {
    throw new SketchError("need at least three samples");
  }
  const closed = closePolyline(points);
  const segLen: number[] = [];
  let perimeter = 0;
  for (let i = 0; i + 1 < closed.length; i++) {
    const dx = closed[i + 1][0] - closed[i][0];
    const dy = closed[i + 1][1] - closed[i][1];
    const len = Math.hypot(dx, dy);
    segLen.push(len);
    perimeter += len;
  }
  if (perimeter <= 0) {
    throw new SketchError("degenerate sketch: zero total arc length");
  }
  const out: Point[] = [];
  let seg = 0;
  let segStart = 0;
  for (let q = 0; q < T; q++) {
    const s = (q * perimeter) / T;
    while (seg < segLen.length - 1 && segStart + segLen[seg] <= s) {
      segStart += segLen[seg];
      seg += 1;
    }
    const t = segLen[seg] > 0 ? (s - segStart) / segLen[seg] : 0;
    const a = closed[seg];
    const b = closed[seg + 1];
    out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
  }
  return out;
}

/** Total polyline length of a stroke (diagnostics / degeneracy checks). */
export function strokeLength(points: Point[]): number {
  let total = 0;
  for (let i = 0; i + 1 < points.length; i++) {
    total += Math.hypot(points[i + 1][0] - points[i][0], points[i + 1][1] - points[i][1]);
  }
  return total;
}
