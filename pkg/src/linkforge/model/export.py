"""Model serialization: canonical JSON (lossless) and LP text with SOS sections.

Both writers emit deterministically: variable and constraint order is the
builder's insertion order and floats print via repr (shortest round-trip
form), so identical builds produce byte-identical files.
"""
from __future__ import annotations

import json
import math

from .ir import (
    BINARY,
    EQ,
    GE,
    LE,
    LinearConstraint,
    ModelIR,
    Objective,
    QuadraticConstraint,
    SosSet,
    UnrepresentableConstraint,
    Variable,
)

MODEL_VERSION = 1

_SENSES = {LE: "<=", GE: ">=", EQ: "="}


def _bound(v):
    return None if math.isinf(v) else v


def _unbound(v, sign):
    return sign * math.inf if v is None else float(v)


def model_to_json(model):
    return {
        "modelVersion": MODEL_VERSION,
        "kind": model.kind,
        "variables": [{"name": v.name, "kind": v.kind, "lb": _bound(v.lb),
                       "ub": _bound(v.ub), "role": v.role}
                      for v in model.variables.values()],
        "linear": [{"name": c.name, "terms": [[v, co] for v, co in c.terms],
                    "sense": c.sense, "rhs": c.rhs, "tag": c.tag}
                   for c in model.linear],
        "quadratic": [{"name": c.name, "quad": [[a, b, co] for a, b, co in c.quad],
                       "lin": [[v, co] for v, co in c.lin], "sense": c.sense,
                       "rhs": c.rhs, "tag": c.tag, "convex": c.convex}
                      for c in model.quadratic],
        "sos": [{"name": s.name, "level": s.level, "members": list(s.members)}
                for s in model.sos_sets],
        "objective": {"quad": [[a, b, co] for a, b, co in model.objective.quad],
                      "lin": [[v, co] for v, co in model.objective.lin],
                      "constant": model.objective.constant},
        "metadata": model.metadata,
    }


def model_from_json(obj):
    if obj.get("modelVersion") != MODEL_VERSION:
        raise ValueError(f"unsupported model version {obj.get('modelVersion')!r}")
    m = ModelIR(kind=obj["kind"])
    for v in obj["variables"]:
        m.variables[v["name"]] = Variable(name=v["name"], kind=v["kind"],
                                          lb=_unbound(v["lb"], -1), ub=_unbound(v["ub"], 1),
                                          role=v.get("role", ""))
    for c in obj["linear"]:
        m.linear.append(LinearConstraint(name=c["name"],
                                         terms=tuple((v, float(co)) for v, co in c["terms"]),
                                         sense=c["sense"], rhs=float(c["rhs"]), tag=c["tag"]))
    for c in obj["quadratic"]:
        m.quadratic.append(QuadraticConstraint(
            name=c["name"],
            quad=tuple((a, b, float(co)) for a, b, co in c["quad"]),
            lin=tuple((v, float(co)) for v, co in c["lin"]),
            sense=c["sense"], rhs=float(c["rhs"]), tag=c["tag"],
            convex=bool(c["convex"])))
    for s in obj["sos"]:
        m.sos_sets.append(SosSet(name=s["name"], level=int(s["level"]),
                                 members=tuple(s["members"])))
    m.objective = Objective(quad=tuple((a, b, float(co)) for a, b, co in obj["objective"]["quad"]),
                            lin=tuple((v, float(co)) for v, co in obj["objective"]["lin"]),
                            constant=float(obj["objective"]["constant"]))
    m.metadata = dict(obj["metadata"])
    return m


def model_json_bytes(model):
    return (json.dumps(model_to_json(model), separators=(",", ":")) + "\n").encode("utf-8")


def _num(x):
    return repr(float(x))


def _lin_expr(terms, lead=True):
    parts = []
    for v, c in terms:
        sign = "-" if c < 0 else ("+" if parts or not lead else "")
        mag = _num(abs(c))
        parts.append(f"{sign} {mag} {v}".strip())
    return " ".join(parts) if parts else "0"


def _quad_expr(quad):
    parts = []
    for a, b, c in quad:
        sign = "-" if c < 0 else ("+" if parts else "")
        mag = _num(abs(c))
        term = f"{mag} {a} ^2" if a == b else f"{mag} {a} * {b}"
        parts.append(f"{sign} {term}".strip())
    return " ".join(parts)


def model_to_lp(model, inline_sos=False):
    """LP text (CPLEX dialect) with native SOS sections.

    Non-convex quadratic rows (including quadratic equalities) are legal here
    and flagged in the header so consumers can bail out early.  With
    ``inline_sos`` the SOS section is omitted; the logarithmic binary
    encodings built into the model already imply the same sets.
    """
    lines = []
    counts = model.constraint_counts()
    lines.append("\\ linkforge model export")
    lines.append(f"\\ kind: {model.kind}")
    lines.append(f"\\ modelVersion: {MODEL_VERSION}")
    lines.append(f"\\ binaries: {model.binary_count}")
    lines.append("\\ constraint-set counts: "
                 + " ".join(f"{k}={counts[k]}" for k in sorted(counts)))
    nonconvex = [c.name for c in model.quadratic if not c.convex]
    if nonconvex:
        lines.append(f"\\ warning: {len(nonconvex)} non-convex quadratic constraints"
                     " (exact realizability/area rows)")
    if inline_sos:
        lines.append("\\ sos: inlined via logarithmic binary encodings")
    lines.append("Minimize")
    obj = " obj: " + _lin_expr(model.objective.lin)
    if model.objective.quad:
        doubled = [(a, b, 2.0 * c) for a, b, c in model.objective.quad]
        obj += " + [ " + _quad_expr(doubled) + " ] / 2"
    lines.append(obj)
    lines.append("Subject To")
    for c in model.linear:
        if c.sense not in _SENSES:
            raise UnrepresentableConstraint(f"{c.name}: sense {c.sense!r}")
        lines.append(f" {c.name}: {_lin_expr(c.terms)} {_SENSES[c.sense]} {_num(c.rhs)}")
    for c in model.quadratic:
        if c.sense not in _SENSES:
            raise UnrepresentableConstraint(f"{c.name}: sense {c.sense!r}")
        expr = "[ " + _quad_expr(c.quad) + " ]"
        if c.lin:
            expr += " " + _lin_expr(c.lin, lead=False)
        lines.append(f" {c.name}: {expr} {_SENSES[c.sense]} {_num(c.rhs)}")
    lines.append("Bounds")
    for v in model.variables.values():
        if v.kind == BINARY:
            continue
        lo = "-inf" if math.isinf(v.lb) else _num(v.lb)
        hi = "+inf" if math.isinf(v.ub) else _num(v.ub)
        lines.append(f" {lo} <= {v.name} <= {hi}")
    binaries = model.binary_names()
    if binaries:
        lines.append("Binaries")
        for chunk_at in range(0, len(binaries), 8):
            lines.append(" " + " ".join(binaries[chunk_at:chunk_at + 8]))
    if not inline_sos and model.sos_sets:
        lines.append("SOS")
        for s in model.sos_sets:
            weights = " ".join(f"{m} : {w}" for w, m in enumerate(s.members, start=1))
            lines.append(f" {s.name}: S{s.level} :: {weights}")
    lines.append("End")
    return "\n".join(lines) + "\n"


def model_lp_bytes(model, inline_sos=False):
    return model_to_lp(model, inline_sos=inline_sos).encode("utf-8")


def export_model(model, fmt, inline_sos=False):
    """Byte stream for the requested format ('json' or 'lp')."""
    if fmt == "json":
        return model_json_bytes(model)
    if fmt == "lp":
        return model_lp_bytes(model, inline_sos=inline_sos)
    raise ValueError(f"unknown export format {fmt!r}")
