/** Animation model over a served trajectory; no client-side kinematics.
 *
 * Every rendered coordinate comes verbatim from the service's trajectory
 * payload, so the studio can never disagree with the solver about geometry.
 */

import { LinkageJson, TrajectoryJson } from "./api.js";

export type NodeKind = "motor" | "fixed" | "movable" | "end-effector";

// Color convention: motor green, fixed red, movable gray, end-effector blue.
export const NODE_COLORS: Record<NodeKind, string> = {
  motor: "#2ca02c",
  fixed: "#d62728",
  movable: "#7f7f7f",
  "end-effector": "#1f77b4",
};

export interface Segment {
  from: [number, number];
  to: [number, number];
}

export class AnimationModel {
  constructor(
    readonly linkage: LinkageJson,
    readonly trajectory: TrajectoryJson,
  ) {
    if (trajectory.positions.length !== trajectory.times.length) {
      throw new Error("trajectory times/positions length mismatch");
    }
  }

  get sampleCount(): number {
    return this.trajectory.times.length;
  }

  get nodeCount(): number {
    return this.trajectory.positions[0]?.length ?? 0;
  }

  nodeKind(index: number): NodeKind {
    if (index === this.nodeCount && this.nodeCount > 1) {
      return "end-effector";
    }
    const node = this.linkage.nodes[index - 1];
    if (!node || node.kind === "motor") {
      return "motor";
    }
    return node.kind;
  }

  /** Exact node positions at scrub position q (1-based sample index). */
  positionsAt(q: number): [number, number][] {
    if (q < 1 || q > this.sampleCount) {
      throw new Error(`sample ${q} outside 1..${this.sampleCount}`);
    }
    return this.trajectory.positions[q - 1].map((p) => [p[0], p[1]]);
  }

  /** Rigid-link segments implied by the linkage at scrub position q. */
  linkSegmentsAt(q: number): Segment[] {
    const frame = this.positionsAt(q);
    const segments: Segment[] = [];
    for (const node of this.linkage.nodes) {
      if (node.kind === "movable" && node.parents) {
        const i = node.index - 1;
        for (const parent of node.parents) {
          segments.push({ from: frame[parent - 1], to: frame[i] });
        }
      }
    }
    return segments;
  }

  /** End-effector trail up to and including sample q. */
  trail(q: number): [number, number][] {
    const ee = this.nodeCount - 1;
    return this.trajectory.positions
      .slice(0, q)
      .map((frame) => [frame[ee][0], frame[ee][1]]);
  }

  /** Link lengths at sample q (visual constancy check in the inspector). */
  linkLengthsAt(q: number): number[] {
    return this.linkSegmentsAt(q).map((s) =>
      Math.hypot(s.to[0] - s.from[0], s.to[1] - s.from[1]),
    );
  }
}
