"""HTTP job service: submit synthesis runs, poll progress, fetch solutions.

Plain-stdlib threading server with an in-memory job store (jobs do not survive
restarts).  Job execution runs on a bounded worker pool; cancellation is
cooperative at solver iteration boundaries.
"""
from __future__ import annotations

import json
import os
import threading
import time
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

import numpy as np

from .annealing import SAConfig, run as sa_run
from .branchbound import Budget, solve_parallel
from .kinematics import ARBITRARY_ORDER, FIXED_ORDER, TargetCurve, trace
from .model import SynthesisConfig
from .serialize import (
    SchemaError,
    linkage_from_json,
    linkage_to_json,
    target_from_json,
    trajectory_to_json,
)
from .targets import default_box, default_lambda, resample_closed

QUEUED = "queued"
RUNNING = "running"
DONE = "done"
FAILED = "failed"
CANCELLED = "cancelled"
TERMINAL = (DONE, FAILED, CANCELLED)

DEFAULT_QUEUE_LIMIT = 16
DEFAULT_TIME_LIMIT = 300.0    # desk-scale default budget


@dataclass
class Job:
    id: str
    request: dict
    target: TargetCurve
    state: str = QUEUED
    error: str | None = None
    solution: object = None
    incumbents: list = field(default_factory=list)   # {wallClock, objective, linkage}
    progress: dict = field(default_factory=dict)
    cancel_event: threading.Event = field(default_factory=threading.Event)
    created: float = field(default_factory=time.time)

    def summary(self):
        out = {"id": self.id, "state": self.state,
               "solver": self.request.get("solver", "sa"),
               "incumbents": [{"wallClock": e["wallClock"], "objective": e["objective"]}
                              for e in self.incumbents],
               "progress": self.progress}
        if self.error:
            out["error"] = self.error
        return out


def parse_job_request(obj):
    """Validate and normalize a job submission; raises SchemaError."""
    if not isinstance(obj, dict):
        raise SchemaError("request", "expected an object")
    solver = obj.get("solver", "sa")
    if solver not in ("sa", "bb"):
        raise SchemaError("request.solver", f"expected 'sa' or 'bb', got {solver!r}")
    cfg = obj.get("config", {})
    if not isinstance(cfg, dict):
        raise SchemaError("request.config", "expected an object")
    T = int(cfg.get("T", 20))
    if T < 3:
        raise SchemaError("request.config.T", "need T >= 3")
    K = int(cfg.get("K", 7))
    if K < 2:
        raise SchemaError("request.config.K", "need K >= 2 (motor plus end-effector)")
    raw_target = obj.get("target")
    if raw_target is None:
        raise SchemaError("request.target", "missing target curve")
    mode = ARBITRARY_ORDER if raw_target.get("mode") == ARBITRARY_ORDER else FIXED_ORDER
    samples = raw_target.get("samples")
    if not isinstance(samples, list) or len(samples) < 2:
        raise SchemaError("request.target.samples", "expected a point list")
    if len(samples) == T and raw_target.get("mode") is not None:
        target = target_from_json(raw_target, "request.target")
    else:
        try:
            resampled = resample_closed(np.asarray(samples, dtype=float), T)
        except ValueError as exc:
            raise SchemaError("request.target.samples", str(exc)) from None
        target = TargetCurve(samples=resampled, mode=mode).validate()
    seed = int(obj.get("seed", 0))
    budget = obj.get("budget", {})
    if not isinstance(budget, dict):
        raise SchemaError("request.budget", "expected an object")
    initial = obj.get("initialLinkage")
    if initial is not None:
        linkage_from_json(initial, "request.initialLinkage")  # validated, kept raw
    return {"solver": solver, "config": cfg, "target": target, "seed": seed,
            "budget": budget, "initialLinkage": initial}


class JobStore:
    def __init__(self, queue_limit=DEFAULT_QUEUE_LIMIT):
        self.lock = threading.Lock()
        self.jobs = {}
        self.queue_limit = queue_limit

    def create(self, request, target):
        with self.lock:
            queued = sum(1 for j in self.jobs.values() if j.state == QUEUED)
            if queued >= self.queue_limit:
                return None
            job = Job(id=uuid.uuid4().hex[:12], request=request, target=target)
            self.jobs[job.id] = job
            return job

    def get(self, job_id):
        with self.lock:
            return self.jobs.get(job_id)


def run_job(job):
    t0 = time.time()
    with_lock = threading.Lock()

    def record_incumbent(linkage, obj):
        with with_lock:
            if job.incumbents and obj >= job.incumbents[-1]["objective"]:
                return
            job.incumbents.append({"wallClock": time.time() - t0, "objective": obj,
                                   "linkage": linkage_to_json(linkage)})

    if job.cancel_event.is_set():
        job.state = RUNNING       # observe the documented lifecycle
        job.state = CANCELLED
        return
    job.state = RUNNING
    req = job.request
    cfg_in = req["config"]
    target = job.target
    lam = cfg_in.get("lambda")
    if lam is None:
        lam = default_lambda(target.samples)
    budget = req["budget"]
    time_limit = budget.get("timeLimit", DEFAULT_TIME_LIMIT)
    try:
        if req["solver"] == "sa":
            B, center = default_box(target.samples)
            sa_cfg = SAConfig(i_max=int(budget.get("iterations", 20000)),
                              seed=req["seed"], max_nodes=int(cfg_in.get("K", 7)),
                              samples=target.n_samples, lam=lam,
                              box_side=cfg_in.get("boxSide", B),
                              box_center=tuple(cfg_in.get("boxCenter", center)))
            deadline = time.time() + float(time_limit)

            def stop():
                return job.cancel_event.is_set() or time.time() > deadline

            initial = (linkage_from_json(req["initialLinkage"])
                       if req.get("initialLinkage") else None)
            out = sa_run(sa_cfg, target, initial=initial, should_stop=stop,
                         on_best=lambda lk, obj, _i: record_incumbent(lk, obj))
            job.progress = {"iterations": out.state.iteration}
            if job.cancel_event.is_set():
                job.state = CANCELLED
                return
            job.solution = out.solution(target)
        else:
            boxes = tuple(tuple(b) for b in cfg_in.get("boxes", ()))
            cfg = SynthesisConfig.for_target(
                target, K=int(cfg_in.get("K", 7)), S=int(cfg_in.get("S", 8)),
                lam=lam, node_boxes=boxes)
            bb_budget = Budget(node_limit=int(budget.get("nodeLimit", 2000)),
                               time_limit=float(time_limit),
                               objective_target=budget.get("objectiveTarget"))
            initial = (linkage_from_json(req["initialLinkage"])
                       if req.get("initialLinkage") else None)
            result = solve_parallel(cfg, target, bb_budget,
                                    workers=int(budget.get("solverWorkers", 1)),
                                    should_stop=job.cancel_event.is_set,
                                    on_incumbent=record_incumbent,
                                    initial_incumbent=initial)
            job.progress = {"explored": result.stats.explored,
                            "created": result.stats.created,
                            "status": result.status}
            if job.cancel_event.is_set():
                job.state = CANCELLED
                return
            if result.incumbent is None:
                job.state = FAILED
                job.error = "no feasible solution within budget"
                return
            from .branchbound import solution_of

            job.solution = solution_of(result, cfg, target)
        job.solution.seed = req["seed"]
        job.state = DONE
    except Exception as exc:   # surface solver errors as failed jobs
        if job.cancel_event.is_set():
            job.state = CANCELLED
        else:
            job.state = FAILED
            job.error = f"{type(exc).__name__}: {exc}"


class LinkforgeService:
    def __init__(self, workers=None, queue_limit=DEFAULT_QUEUE_LIMIT):
        if workers is None:
            workers = int(os.environ.get("LINKFORGE_WORKERS", "2"))
        self.store = JobStore(queue_limit=queue_limit)
        self.pool = ThreadPoolExecutor(max_workers=max(1, workers))

    def submit(self, payload):
        request = parse_job_request(payload)
        target = request.pop("target")
        job = self.store.create(request, target)
        if job is None:
            return None
        self.pool.submit(run_job, job)
        return job

    def shutdown(self):
        self.pool.shutdown(wait=False, cancel_futures=True)


def _json_bytes(obj):
    return json.dumps(obj).encode("utf-8")


class _Handler(BaseHTTPRequestHandler):
    service: LinkforgeService = None

    def log_message(self, fmt, *args):   # quiet by default
        pass

    def _send(self, code, payload):
        body = _json_bytes(payload)
        self.send_response(code)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def do_OPTIONS(self):
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.end_headers()

    def do_GET(self):
        url = urlparse(self.path)
        parts = [p for p in url.path.split("/") if p]
        if parts == ["api", "health"]:
            self._send(200, {"status": "ok"})
            return
        if len(parts) >= 3 and parts[:2] == ["api", "jobs"]:
            job = self.service.store.get(parts[2])
            if job is None:
                self._send(404, {"error": {"reason": "unknown-job", "id": parts[2]}})
                return
            if len(parts) == 3:
                self._send(200, job.summary())
                return
            if parts[3] == "solution":
                if job.state != DONE:
                    self._send(404, {"error": {"reason": "not-done", "state": job.state}})
                    return
                self._send(200, job.solution.to_json())
                return
            if parts[3] == "trace":
                if not job.incumbents:
                    self._send(404, {"error": {"reason": "no-incumbent-yet"}})
                    return
                qs = parse_qs(url.query)
                samples = int(qs.get("samples", ["64"])[0])
                if not (1 <= samples <= 4096):
                    self._send(400, {"error": {"reason": "bad-samples"}})
                    return
                linkage = linkage_from_json(job.incumbents[-1]["linkage"])
                traj = trace(linkage, samples)
                self._send(200, {"linkage": job.incumbents[-1]["linkage"],
                                 "objective": job.incumbents[-1]["objective"],
                                 "trajectory": trajectory_to_json(traj)})
                return
        self._send(404, {"error": {"reason": "unknown-endpoint", "path": url.path}})

    def do_POST(self):
        url = urlparse(self.path)
        parts = [p for p in url.path.split("/") if p]
        if parts == ["api", "jobs"]:
            try:
                length = int(self.headers.get("Content-Length", "0"))
                payload = json.loads(self.rfile.read(length) or b"{}")
            except (ValueError, json.JSONDecodeError):
                self._send(400, {"error": {"reason": "bad-json"}})
                return
            try:
                job = self.service.submit(payload)
            except SchemaError as exc:
                self._send(400, {"error": {"reason": "schema", "where": exc.where,
                                           "message": str(exc)}})
                return
            if job is None:
                self._send(429, {"error": {"reason": "queue-full"}})
                return
            self._send(201, {"id": job.id})
            return
        if len(parts) == 4 and parts[:2] == ["api", "jobs"] and parts[3] == "cancel":
            job = self.service.store.get(parts[2])
            if job is None:
                self._send(404, {"error": {"reason": "unknown-job"}})
                return
            if job.state in TERMINAL:
                self._send(409, {"error": {"reason": "terminal", "state": job.state}})
                return
            job.cancel_event.set()
            self._send(202, {"id": job.id, "state": job.state})
            return
        self._send(404, {"error": {"reason": "unknown-endpoint", "path": url.path}})


def make_server(port=0, workers=None, queue_limit=DEFAULT_QUEUE_LIMIT):
    """Bound HTTP server plus its service; caller drives serve_forever()."""
    service = LinkforgeService(workers=workers, queue_limit=queue_limit)
    handler = type("BoundHandler", (_Handler,), {"service": service})
    httpd = ThreadingHTTPServer(("127.0.0.1", port), handler)
    return httpd, service


def serve(port, workers=None, queue_limit=DEFAULT_QUEUE_LIMIT):
    httpd, service = make_server(port=port, workers=workers, queue_limit=queue_limit)
    try:
        httpd.serve_forever()
    finally:
        service.shutdown()
