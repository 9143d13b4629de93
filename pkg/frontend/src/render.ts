/** Canvas drawing for the sketch pad and the linkage animation. */

import { AnimationModel, NODE_COLORS } from "./animate.js";
import { Point } from "./resample.js";
import { Box, CanvasMapping, SketchSession, curveToCanvas } from "./sketch.js";

export function drawSketch(ctx: CanvasRenderingContext2D, session: SketchSession): void {
  const { canvasWidth: w, canvasHeight: h, mapping } = session;
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#444";
  ctx.lineWidth = 1.5;
  drawPolyline(ctx, mapping, session.strokes, false);
  if (session.resampled) {
    ctx.fillStyle = "#e6a817";
    for (const p of session.resampled) {
      const [px, py] = curveToCanvas(mapping, p[0], p[1]);
      ctx.beginPath();
      ctx.arc(px, py, 3.5, 0, 2 * Math.PI);
      ctx.fill();
    }
  }
  ctx.strokeStyle = "#71a6d2";
  for (const box of session.boxes) {
    drawBox(ctx, mapping, box);
  }
}

function drawPolyline(
  ctx: CanvasRenderingContext2D,
  mapping: CanvasMapping,
  points: Point[],
  close: boolean,
): void {
  if (points.length < 2) {
    return;
  }
  ctx.beginPath();
  const [x0, y0] = curveToCanvas(mapping, points[0][0], points[0][1]);
  ctx.moveTo(x0, y0);
  for (const p of points.slice(1)) {
    const [px, py] = curveToCanvas(mapping, p[0], p[1]);
    ctx.lineTo(px, py);
  }
  if (close) {
    ctx.closePath();
  }
  ctx.stroke();
}

function drawBox(ctx: CanvasRenderingContext2D, mapping: CanvasMapping, box: Box): void {
  const [x0, y0] = curveToCanvas(mapping, box.x0, box.y1);
  const [x1, y1] = curveToCanvas(mapping, box.x1, box.y0);
  ctx.strokeRect(x0, y0, x1 - x0, y1 - y0);
}

export function drawFrame(
  ctx: CanvasRenderingContext2D,
  mapping: CanvasMapping,
  model: AnimationModel,
  q: number,
  targetSamples: Point[] | null,
): void {
  const frame = model.positionsAt(q);
  if (targetSamples) {
    ctx.fillStyle = "#e6a817";
    for (const p of targetSamples) {
      const [px, py] = curveToCanvas(mapping, p[0], p[1]);
      ctx.fillRect(px - 2, py - 2, 4, 4);
    }
  }
  ctx.strokeStyle = "#888";
  ctx.lineWidth = 2;
  for (const seg of model.linkSegmentsAt(q)) {
    ctx.beginPath();
    const [fx, fy] = curveToCanvas(mapping, seg.from[0], seg.from[1]);
    const [tx, ty] = curveToCanvas(mapping, seg.to[0], seg.to[1]);
    ctx.moveTo(fx, fy);
    ctx.lineTo(tx, ty);
    ctx.stroke();
  }
  ctx.strokeStyle = NODE_COLORS["end-effector"];
  ctx.lineWidth = 1.5;
  drawPolyline(ctx, mapping, model.trail(q), false);
  frame.forEach((p, i) => {
    const kind = model.nodeKind(i + 1);
    ctx.fillStyle = NODE_COLORS[kind];
    const [px, py] = curveToCanvas(mapping, p[0], p[1]);
    ctx.beginPath();
    ctx.arc(px, py, kind === "end-effector" ? 6 : 4.5, 0, 2 * Math.PI);
    ctx.fill();
  });
}

export function drawChart(
  ctx: CanvasRenderingContext2D,
  width: number,
  height: number,
  chart: { wallClock: number; objective: number }[],
): void {
  ctx.clearRect(0, 0, width, height);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(0.5, 0.5, width - 1, height - 1);
  if (chart.length === 0) {
    return;
  }
  const tMax = Math.max(chart[chart.length - 1].wallClock, 1e-9);
  const objMax = Math.max(...chart.map((c) => c.objective), 1e-12);
  ctx.strokeStyle = "#1f77b4";
  ctx.beginPath();
  chart.forEach((c, i) => {
    const x = 4 + (c.wallClock / tMax) * (width - 8);
    const y = height - 4 - (Math.log10(Math.max(c.objective, 1e-12)) -
      Math.log10(1e-12)) / (Math.log10(objMax) - Math.log10(1e-12) || 1) * (height - 8);
    if (i === 0) {
      ctx.moveTo(x, y);
    } else {
      ctx.lineTo(x, y);
    }
  });
  ctx.stroke();
}
