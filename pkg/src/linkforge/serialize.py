"""JSON (de)serialization of the toolkit's value types.

Parsers raise SchemaError with a JSON-pointer-ish ``where`` so the CLI and the
HTTP service can report the offending field.  Writers are deterministic.
"""
from __future__ import annotations

import json

import numpy as np

from .kinematics import (
    FIXED_ORDER,
    ARBITRARY_ORDER,
    ROTARY,
    LINEAR,
    FixedNode,
    Linkage,
    MotorSpec,
    MovableNode,
    TargetCurve,
    Trajectory,
)


class SchemaError(ValueError):
    def __init__(self, where, message):
        self.where = where
        super().__init__(f"{where}: {message}")


def _point(value, where):
    if (not isinstance(value, (list, tuple)) or len(value) != 2
            or not all(isinstance(v, (int, float)) for v in value)):
        raise SchemaError(where, "expected a [x, y] pair of numbers")
    return float(value[0]), float(value[1])


def _number(value, where, minimum=None):
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise SchemaError(where, "expected a number")
    if minimum is not None and value <= minimum:
        raise SchemaError(where, f"must be > {minimum}")
    return float(value)


def motor_to_json(m):
    if m.kind == ROTARY:
        return {"kind": ROTARY, "center": list(m.center), "radius": m.radius,
                "direction": m.direction}
    return {"kind": LINEAR, "start": list(m.center), "velocity": list(m.velocity)}


def motor_from_json(obj, where="motor"):
    if not isinstance(obj, dict):
        raise SchemaError(where, "expected an object")
    kind = obj.get("kind", ROTARY)
    if kind == ROTARY:
        m = MotorSpec(kind=ROTARY,
                      center=_point(obj.get("center", [0, 0]), where + ".center"),
                      radius=_number(obj.get("radius"), where + ".radius", minimum=0.0),
                      direction=obj.get("direction", 1))
    elif kind == LINEAR:
        m = MotorSpec(kind=LINEAR,
                      center=_point(obj.get("start", [0, 0]), where + ".start"),
                      velocity=_point(obj.get("velocity"), where + ".velocity"))
    else:
        raise SchemaError(where + ".kind", f"unknown motor kind {kind!r}")
    try:
        m.validate()
    except ValueError as exc:
        raise SchemaError(where, str(exc)) from None
    return m


def linkage_to_json(linkage):
    nodes = [{"index": 1, "kind": "motor", "motor": motor_to_json(linkage.motor)}]
    for i in range(2, linkage.n_nodes + 1):
        nd = linkage.node(i)
        if isinstance(nd, FixedNode):
            nodes.append({"index": i, "kind": "fixed", "position": list(nd.position)})
        else:
            nodes.append({"index": i, "kind": "movable", "parents": list(nd.parents),
                          "lengths": list(nd.lengths), "orientation": nd.orientation})
    return {"boxSide": linkage.box_side, "boxCenter": list(linkage.box_center),
            "nodes": nodes}


def linkage_from_json(obj, where="linkage"):
    if not isinstance(obj, dict):
        raise SchemaError(where, "expected an object")
    if "nodes" not in obj or not isinstance(obj["nodes"], list) or not obj["nodes"]:
        raise SchemaError(where + ".nodes", "expected a non-empty node list")
    box_side = _number(obj.get("boxSide", 4.0), where + ".boxSide", minimum=0.0)
    box_center = _point(obj.get("boxCenter", [0, 0]), where + ".boxCenter")
    motor = None
    joints = []
    for pos, node in enumerate(obj["nodes"]):
        w = f"{where}.nodes[{pos}]"
        if not isinstance(node, dict):
            raise SchemaError(w, "expected an object")
        idx = node.get("index")
        if idx != pos + 1:
            raise SchemaError(w + ".index", f"nodes must be listed in index order (got {idx}, want {pos + 1})")
        kind = node.get("kind")
        if pos == 0:
            if kind != "motor":
                raise SchemaError(w + ".kind", "node 1 must be the motor")
            motor = motor_from_json(node.get("motor", {}), w + ".motor")
        elif kind == "fixed":
            joints.append(FixedNode(position=_point(node.get("position"), w + ".position")))
        elif kind == "movable":
            parents = node.get("parents")
            if (not isinstance(parents, list) or len(parents) != 2
                    or not all(isinstance(p, int) for p in parents)):
                raise SchemaError(w + ".parents", "expected two integer node ids")
            lengths = node.get("lengths")
            if not isinstance(lengths, list) or len(lengths) != 2:
                raise SchemaError(w + ".lengths", "expected two link lengths")
            orientation = node.get("orientation", 1)
            if orientation not in (1, -1):
                raise SchemaError(w + ".orientation", "expected 1 or -1")
            joints.append(MovableNode(parents=(parents[0], parents[1]),
                                      lengths=(_number(lengths[0], w + ".lengths[0]", minimum=0.0),
                                               _number(lengths[1], w + ".lengths[1]", minimum=0.0)),
                                      orientation=orientation))
        else:
            raise SchemaError(w + ".kind", f"unknown node kind {kind!r}")
    linkage = Linkage(motor=motor, joints=tuple(joints), box_side=box_side,
                      box_center=box_center)
    try:
        linkage.validate()
    except ValueError as exc:
        raise SchemaError(where, str(exc)) from None
    return linkage


def target_to_json(target):
    return {"mode": target.mode, "samples": [[float(x), float(y)] for x, y in target.samples]}


def target_from_json(obj, where="target"):
    if not isinstance(obj, dict):
        raise SchemaError(where, "expected an object")
    mode = obj.get("mode", FIXED_ORDER)
    if mode not in (FIXED_ORDER, ARBITRARY_ORDER):
        raise SchemaError(where + ".mode", f"expected 'fixed' or 'arbitrary', got {mode!r}")
    samples = obj.get("samples")
    if not isinstance(samples, list) or len(samples) < 3:
        raise SchemaError(where + ".samples", "expected a list of at least 3 [x, y] pairs")
    pts = [_point(s, f"{where}.samples[{i}]") for i, s in enumerate(samples)]
    curve = TargetCurve(samples=np.array(pts), mode=mode)
    try:
        curve.validate()
    except ValueError as exc:
        raise SchemaError(where, str(exc)) from None
    return curve


def trajectory_to_json(traj):
    return {"times": [float(t) for t in traj.times],
            "positions": [[[float(x), float(y)] for x, y in frame] for frame in traj.positions]}


def trajectory_from_json(obj, where="trajectory"):
    if not isinstance(obj, dict) or "times" not in obj or "positions" not in obj:
        raise SchemaError(where, "expected an object with 'times' and 'positions'")
    times = np.asarray(obj["times"], dtype=float)
    positions = np.asarray(obj["positions"], dtype=float)
    if positions.ndim != 3 or positions.shape[2] != 2 or positions.shape[0] != len(times):
        raise SchemaError(where + ".positions", "expected (T, N, 2) positions matching times")
    return Trajectory(times=times, positions=positions)


def dumps(obj):
    """Deterministic JSON text (stable separators, no key sorting surprises)."""
    return json.dumps(obj, separators=(", ", ": "), indent=1)


def write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(obj))
        fh.write("\n")


def read_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)
