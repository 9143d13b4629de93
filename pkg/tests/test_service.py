"""HTTP job service: lifecycle, schemas, errors, cancellation."""
import json
import math
import threading
import time
import urllib.request
from urllib.error import HTTPError

import jsonschema
import numpy as np
import pytest

from linkforge.service import make_server

JOB_SCHEMA = {
    "type": "object",
    "required": ["id", "state", "solver", "incumbents"],
    "properties": {
        "id": {"type": "string"},
        "state": {"enum": ["queued", "running", "done", "failed", "cancelled"]},
        "solver": {"enum": ["sa", "bb"]},
        "incumbents": {"type": "array",
                       "items": {"type": "object",
                                 "required": ["wallClock", "objective"]}},
    },
}

SOLUTION_SCHEMA = {
    "type": "object",
    "required": ["schema", "version", "solver", "objective", "linkage",
                 "trajectory", "target"],
    "properties": {
        "schema": {"const": "linkforge/solution"},
        "version": {"const": 1},
        "objective": {"type": "object",
                      "required": ["total", "tracking", "regularization"]},
        "linkage": {"type": "object", "required": ["boxSide", "nodes"]},
        "trajectory": {"type": "object", "required": ["times", "positions"]},
        "target": {"type": "object", "required": ["mode", "samples"]},
    },
}

TRACE_SCHEMA = {
    "type": "object",
    "required": ["linkage", "objective", "trajectory"],
}


@pytest.fixture(scope="module")
def server():
    httpd, service = make_server(port=0, workers=2, queue_limit=4)
    thread = threading.Thread(target=httpd.serve_forever, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{httpd.server_address[1]}"
    yield base
    httpd.shutdown()
    service.shutdown()


def req(base, path, payload=None, method=None):
    url = base + path
    data = json.dumps(payload).encode() if payload is not None else None
    r = urllib.request.Request(url, data=data, method=method or ("POST" if data else "GET"),
                               headers={"Content-Type": "application/json"})
    with urllib.request.urlopen(r) as resp:
        return resp.status, json.loads(resp.read())


def circle_payload(iterations=400, seed=3):
    t = np.linspace(0.0, 2 * math.pi, 100)
    pts = np.stack([0.6 * np.cos(t), 0.6 * np.sin(t)], axis=1)
    return {
        "solver": "sa",
        "seed": seed,
        "target": {"samples": pts.tolist()},
        "config": {"K": 4, "T": 8},
        "budget": {"iterations": iterations, "timeLimit": 60},
    }


def wait_state(base, job_id, states, timeout=60.0):
    deadline = time.time() + timeout
    seen = []
    while time.time() < deadline:
        _, job = req(base, f"/api/jobs/{job_id}")
        if not seen or seen[-1] != job["state"]:
            seen.append(job["state"])
        if job["state"] in states:
            return job, seen
        time.sleep(0.05)
    raise TimeoutError(f"job stuck; states seen: {seen}")


def test_health(server):
    status, body = req(server, "/api/health")
    assert status == 200 and body["status"] == "ok"


def test_job_lifecycle_to_done(server):
    status, body = req(server, "/api/jobs", circle_payload())
    assert status == 201
    job_id = body["id"]
    job, seen = wait_state(server, job_id, ("done", "failed"))
    assert job["state"] == "done"
    # observed states follow the documented order
    allowed = ["queued", "running", "done"]
    assert [s for s in allowed if s in seen] == seen
    jsonschema.validate(job, JOB_SCHEMA)
    status, sol = req(server, f"/api/jobs/{job_id}/solution")
    assert status == 200
    jsonschema.validate(sol, SOLUTION_SCHEMA)
    # incumbents strictly improving
    objs = [e["objective"] for e in job["incumbents"]]
    assert all(b < a for a, b in zip(objs, objs[1:]))
    status, tr = req(server, f"/api/jobs/{job_id}/trace?samples=16")
    assert status == 200
    jsonschema.validate(tr, TRACE_SCHEMA)
    assert len(tr["trajectory"]["times"]) == 16


def test_solution_404_until_done(server):
    status, body = req(server, "/api/jobs", circle_payload(iterations=150000, seed=5))
    job_id = body["id"]
    try:
        with pytest.raises(HTTPError) as exc:
            req(server, f"/api/jobs/{job_id}/solution")
        assert exc.value.code == 404
        assert json.loads(exc.value.read())["error"]["reason"] == "not-done"
    finally:
        try:
            req(server, f"/api/jobs/{job_id}/cancel", payload={})
        except HTTPError:
            pass


def test_trace_404_before_first_incumbent(server):
    # an immediately-cancelled job records no incumbents
    payload = circle_payload(iterations=200000, seed=99)
    payload["budget"]["timeLimit"] = 60
    status, body = req(server, "/api/jobs", payload)
    job_id = body["id"]
    req(server, f"/api/jobs/{job_id}/cancel", payload={})
    wait_state(server, job_id, ("cancelled", "done", "failed"))
    _, job = req(server, f"/api/jobs/{job_id}")
    if not job["incumbents"]:
        with pytest.raises(HTTPError) as exc:
            req(server, f"/api/jobs/{job_id}/trace")
        assert exc.value.code == 404
        assert json.loads(exc.value.read())["error"]["reason"] == "no-incumbent-yet"


def test_cancel_running_job(server):
    status, body = req(server, "/api/jobs", circle_payload(iterations=500000, seed=7))
    job_id = body["id"]
    wait_state(server, job_id, ("running",), timeout=30)
    status, _ = req(server, f"/api/jobs/{job_id}/cancel", payload={})
    assert status == 202
    job, _ = wait_state(server, job_id, ("cancelled",), timeout=30)
    assert job["state"] == "cancelled"
    # cancelling a terminal job conflicts
    with pytest.raises(HTTPError) as exc:
        req(server, f"/api/jobs/{job_id}/cancel", payload={})
    assert exc.value.code == 409


def test_unknown_job_404(server):
    with pytest.raises(HTTPError) as exc:
        req(server, "/api/jobs/doesnotexist")
    assert exc.value.code == 404


def test_schema_error_400(server):
    with pytest.raises(HTTPError) as exc:
        req(server, "/api/jobs", {"solver": "sa", "config": {}, "target": {"samples": []}})
    assert exc.value.code == 400
    body = json.loads(exc.value.read())
    assert body["error"]["reason"] == "schema"
    assert "target" in body["error"]["where"]


def test_queue_limit_429():
    from linkforge.service import make_server
    import threading as _threading

    httpd, service = make_server(port=0, workers=1, queue_limit=1)
    thread = _threading.Thread(target=httpd.serve_forever, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{httpd.server_address[1]}"
    try:
        long_job = circle_payload(iterations=50000000, seed=31)
        long_job["budget"]["timeLimit"] = 60
        ids = []
        saw_429 = False
        for _ in range(6):
            try:
                _, body = req(base, "/api/jobs", long_job)
                ids.append(body["id"])
            except HTTPError as exc:
                assert exc.code == 429
                assert json.loads(exc.read())["error"]["reason"] == "queue-full"
                saw_429 = True
                break
        assert saw_429, "queue bound never reached"
        for jid in ids:
            try:
                req(base, f"/api/jobs/{jid}/cancel", payload={})
            except HTTPError:
                pass
    finally:
        httpd.shutdown()
        service.shutdown()


def test_bb_job_completes(server):
    payload = circle_payload(seed=11)
    payload["solver"] = "bb"
    payload["target"]["mode"] = "arbitrary"
    payload["config"] = {"K": 2, "T": 8, "S": 4, "lambda": 0.0}
    payload["budget"] = {"nodeLimit": 40, "timeLimit": 60}
    status, body = req(server, "/api/jobs", payload)
    assert status == 201
    job, _ = wait_state(server, body["id"], ("done", "failed"), timeout=90)
    assert job["state"] == "done"
    status, sol = req(server, f"/api/jobs/{body['id']}/solution")
    assert sol["objective"]["total"] <= 1e-6


def test_bb_job_accepts_initial_linkage(server):
    # the steering loop re-submits the previous incumbent; the solver must
    # never end up worse than the seed
    payload = circle_payload(seed=13)
    payload["solver"] = "bb"
    payload["target"]["mode"] = "arbitrary"
    payload["config"] = {"K": 2, "T": 8, "S": 4, "lambda": 0.0}
    payload["budget"] = {"nodeLimit": 5, "timeLimit": 60}
    payload["initialLinkage"] = {
        "boxSide": 4.0,
        "nodes": [{"index": 1, "kind": "motor",
                   "motor": {"kind": "rotary", "center": [0.0, 0.0],
                             "radius": 0.6, "direction": 1}}],
    }
    status, body = req(server, "/api/jobs", payload)
    assert status == 201
    job, _ = wait_state(server, body["id"], ("done", "failed"), timeout=90)
    assert job["state"] == "done"
    status, sol = req(server, f"/api/jobs/{body['id']}/solution")
    assert sol["objective"]["total"] <= 1e-6
