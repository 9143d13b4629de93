/** DOM wiring for the design studio; all logic lives in the sibling modules. */

import { AnimationModel } from "./animate.js";
import { StudioClient } from "./api.js";
import { JobPanelController } from "./jobs.js";
import { drawChart, drawFrame, drawSketch } from "./render.js";
import { SketchError } from "./resample.js";
import { SketchSession } from "./sketch.js";

const $ = <T extends HTMLElement>(id: string): T =>
  document.getElementById(id) as T;

const sketchCanvas = $("sketch") as unknown as HTMLCanvasElement;
const chartCanvas = $("chart") as unknown as HTMLCanvasElement;
const sketchCtx = sketchCanvas.getContext("2d")!;
const chartCtx = chartCanvas.getContext("2d")!;
const statusEl = $("status");
const scrubber = $("scrubber") as unknown as HTMLInputElement;

const client = new StudioClient(
  (document.querySelector("meta[name=linkforge-api]") as HTMLMetaElement | null)
    ?.content ?? "http://127.0.0.1:8080",
);

let session = new SketchSession(Number(($("samples") as HTMLInputElement).value || 20),
  sketchCanvas.width, sketchCanvas.height);
let model: AnimationModel | null = null;
let playing = false;
let scrub = 1;

const panel = new JobPanelController(client, {
  onUpdate: (view) => {
    statusEl.textContent = view.error
      ? `${view.state} (${view.error})`
      : `${view.state}${view.bestObjective !== null
        ? ` | best ${view.bestObjective.toExponential(3)}` : ""}`;
    drawChart(chartCtx, chartCanvas.width, chartCanvas.height, view.chart);
    if ((view.state === "running" || view.state === "done") && view.chart.length) {
      void refreshAnimation();
    }
  },
});

let drawing = false;
sketchCanvas.addEventListener("mousedown", (e) => {
  drawing = true;
  session.addCanvasPoint(e.offsetX, e.offsetY);
});
sketchCanvas.addEventListener("mousemove", (e) => {
  if (drawing) {
    session.addCanvasPoint(e.offsetX, e.offsetY);
    drawSketch(sketchCtx, session);
  }
});
window.addEventListener("mouseup", () => {
  drawing = false;
});

$("clear").addEventListener("click", () => {
  session.clear();
  drawSketch(sketchCtx, session);
});

$("resample").addEventListener("click", () => {
  try {
    session.finishSketch();
    drawSketch(sketchCtx, session);
    statusEl.textContent = `resampled to ${session.samples} points`;
  } catch (err) {
    statusEl.textContent = err instanceof SketchError ? err.message : String(err);
  }
});

$("submit").addEventListener("click", async () => {
  try {
    const solver = ($("solver") as HTMLSelectElement).value as "sa" | "bb";
    session.mode = ($("mode") as HTMLSelectElement).value as "fixed" | "arbitrary";
    const id = await panel.submit({
      solver,
      seed: Number(($("seed") as HTMLInputElement).value || 0),
      target: session.targetPayload(),
      config: {
        K: Number(($("maxNodes") as HTMLInputElement).value || 7),
        T: session.samples,
        S: Number(($("resolution") as HTMLInputElement).value || 8),
        boxes: session.boxes.map((b) => [b.x0, b.y0, b.x1, b.y1]),
      },
      budget: solver === "sa"
        ? { iterations: Number(($("iterations") as HTMLInputElement).value || 20000) }
        : { nodeLimit: Number(($("nodeLimit") as HTMLInputElement).value || 2000) },
    });
    session.activeJobId = id;
  } catch (err) {
    statusEl.textContent = String(err);
  }
});

$("cancel").addEventListener("click", () => void panel.cancel());
$("adopt").addEventListener("click", () => void panel.adoptAndRefine());

async function refreshAnimation(): Promise<void> {
  const trace = await panel.latestTrace(64);
  model = new AnimationModel(trace.linkage, trace.trajectory);
  scrubber.max = String(model.sampleCount);
  if (scrub > model.sampleCount) {
    scrub = 1;
  }
}

scrubber.addEventListener("input", () => {
  playing = false;
  scrub = Number(scrubber.value);
});

$("play").addEventListener("click", () => {
  playing = !playing;
});

function tick(): void {
  if (model) {
    if (playing) {
      scrub = (scrub % model.sampleCount) + 1;
      scrubber.value = String(scrub);
    }
    drawFrame(sketchCtx, session.mapping, model, scrub, session.resampled);
  }
  requestAnimationFrame(tick);
}

drawSketch(sketchCtx, session);
requestAnimationFrame(tick);
