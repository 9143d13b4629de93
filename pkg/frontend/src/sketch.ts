/** Sketch-session state: freehand strokes, resampled targets, constraint boxes. */

import { Point, SketchError, resampleClosed } from "./resample.js";

export interface Box {
  x0: number;
  y0: number;
  x1: number;
  y1: number;
}

export type CurveMode = "fixed" | "arbitrary";

/**
 * Canvas pixels map to curve units through a fixed affine transform chosen at
 * sketch time, so solutions can render back in sketch coordinates.
 */
export interface CanvasMapping {
  scale: number; // curve units per pixel
  offsetX: number;
  offsetY: number;
}

export function canvasToCurve(m: CanvasMapping, px: number, py: number): Point {
  // canvas y grows downward; curve y grows upward
  return [(px - m.offsetX) * m.scale, (m.offsetY - py) * m.scale];
}

export function curveToCanvas(m: CanvasMapping, x: number, y: number): Point {
  return [x / m.scale + m.offsetX, m.offsetY - y / m.scale];
}

export class SketchSession {
  strokes: Point[] = [];
  resampled: Point[] | null = null;
  mode: CurveMode = "fixed";
  boxes: Box[] = [];
  activeJobId: string | null = null;
  readonly mapping: CanvasMapping;

  constructor(
    readonly samples: number = 20,
    readonly canvasWidth: number = 640,
    readonly canvasHeight: number = 480,
    scale: number = 0.01,
  ) {
    this.mapping = { scale, offsetX: canvasWidth / 2, offsetY: canvasHeight / 2 };
  }

  addCanvasPoint(px: number, py: number): void {
    this.strokes.push(canvasToCurve(this.mapping, px, py));
    this.resampled = null;
  }

  clear(): void {
    this.strokes = [];
    this.resampled = null;
  }

  addBox(box: Box): void {
    if (box.x1 <= box.x0 || box.y1 <= box.y0) {
      throw new SketchError("box corners must be ordered");
    }
    this.boxes.push(box);
  }

  /** Close + resample the sketch; throws SketchError on degenerate input. */
  finishSketch(): Point[] {
    if (this.strokes.length < 3) {
      throw new SketchError("sketch needs at least three points");
    }
    this.resampled = resampleClosed(this.strokes, this.samples);
    return this.resampled;
  }

  targetPayload(): { samples: [number, number][]; mode: CurveMode } {
    if (this.resampled === null) {
      this.finishSketch();
    }
    return { samples: this.resampled as [number, number][], mode: this.mode };
  }
}
