"""Explicit model intermediate representation for the synthesis programs.

A ModelIR is a flat list of scalar variables, linear and quadratic constraints,
and SOS sets, with every constraint carrying a provenance tag naming the
constraint set it implements.  Construction goes through ModelBuilder, which
keeps insertion order stable so identical builds serialize byte-identically.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

CONTINUOUS = "continuous"
BINARY = "binary"

LE = "<="
GE = ">="
EQ = "=="

# Constraint-set provenance tags.  The first seven mirror the synthesis
# model's constraint table; the last three belong to the relaxations.
TAGS = ("NodeUsage", "NodeConnectivity", "NoWaste", "MovableNode",
        "Realizability", "Area", "Motor", "PWLBound", "Sector", "InitBlock")

PSD_TOL = -1e-10


class MissingVariable(KeyError):
    def __init__(self, names):
        self.names = list(names)
        preview = ", ".join(self.names[:5])
        super().__init__(f"assignment missing {len(self.names)} variables ({preview}...)")


class UnrepresentableConstraint(ValueError):
    pass


@dataclass(frozen=True)
class Variable:
    name: str
    kind: str
    lb: float
    ub: float
    role: str = ""


@dataclass(frozen=True)
class LinearConstraint:
    name: str
    terms: tuple          # ((var, coeff), ...)
    sense: str
    rhs: float
    tag: str


@dataclass(frozen=True)
class QuadraticConstraint:
    name: str
    quad: tuple           # ((var_i, var_j, coeff), ...)
    lin: tuple            # ((var, coeff), ...)
    sense: str
    rhs: float
    tag: str
    convex: bool = False


@dataclass(frozen=True)
class SosSet:
    name: str
    level: int            # 1 or 2
    members: tuple        # ordered variable names


@dataclass
class Objective:
    quad: tuple = ()
    lin: tuple = ()
    constant: float = 0.0


@dataclass
class ModelIR:
    kind: str
    variables: dict = field(default_factory=dict)     # name -> Variable, ordered
    linear: list = field(default_factory=list)
    quadratic: list = field(default_factory=list)
    sos_sets: list = field(default_factory=list)
    objective: Objective = field(default_factory=Objective)
    metadata: dict = field(default_factory=dict)

    def binary_names(self):
        return [v.name for v in self.variables.values() if v.kind == BINARY]

    @property
    def binary_count(self):
        return sum(1 for v in self.variables.values() if v.kind == BINARY)

    def constraint_counts(self):
        counts = {}
        for c in list(self.linear) + list(self.quadratic):
            counts[c.tag] = counts.get(c.tag, 0) + 1
        return counts

    def sos1_sets(self):
        return [s for s in self.sos_sets if s.level == 1]

    def sos2_sets(self):
        return [s for s in self.sos_sets if s.level == 2]


class ModelBuilder:
    def __init__(self, kind):
        self.model = ModelIR(kind=kind)
        self._names = set()

    def var(self, name, kind=CONTINUOUS, lb=-np.inf, ub=np.inf, role=""):
        existing = self.model.variables.get(name)
        if existing is not None:
            return name
        self.model.variables[name] = Variable(name=name, kind=kind, lb=float(lb),
                                              ub=float(ub), role=role)
        return name

    def tighten(self, name, lb=None, ub=None):
        v = self.model.variables[name]
        new_lb = v.lb if lb is None else max(v.lb, float(lb))
        new_ub = v.ub if ub is None else min(v.ub, float(ub))
        self.model.variables[name] = Variable(name=v.name, kind=v.kind,
                                              lb=new_lb, ub=new_ub, role=v.role)

    def _check_refs(self, name, refs):
        for r in refs:
            if r not in self.model.variables:
                raise KeyError(f"constraint {name} references undeclared variable {r}")

    def lin(self, name, terms, sense, rhs, tag):
        if name in self._names:
            raise ValueError(f"duplicate constraint name {name}")
        terms = tuple((v, float(c)) for v, c in terms if c != 0.0)
        self._check_refs(name, [v for v, _ in terms])
        self._names.add(name)
        self.model.linear.append(LinearConstraint(name=name, terms=terms, sense=sense,
                                                  rhs=float(rhs), tag=tag))

    def quad(self, name, quad, lin, sense, rhs, tag, convex=False):
        if name in self._names:
            raise ValueError(f"duplicate constraint name {name}")
        qterms = tuple((a, b, float(c)) if a <= b else (b, a, float(c))
                       for a, b, c in quad if c != 0.0)
        lterms = tuple((v, float(c)) for v, c in lin if c != 0.0)
        refs = [a for a, _, _ in qterms] + [b for _, b, _ in qterms] + [v for v, _ in lterms]
        self._check_refs(name, refs)
        if convex:
            _assert_psd(name, qterms, sense)
        self._names.add(name)
        self.model.quadratic.append(QuadraticConstraint(name=name, quad=qterms, lin=lterms,
                                                        sense=sense, rhs=float(rhs),
                                                        tag=tag, convex=convex))

    def sos(self, name, level, members):
        self._check_refs(name, members)
        self.model.sos_sets.append(SosSet(name=name, level=level, members=tuple(members)))

    def sq_norm_le(self, name, components, slack_terms, rhs, tag):
        """|| sum of linear forms ||^2 <= rhs + slack_terms (convex gating row).

        ``components`` is a list of linear forms, each a list of (var, coeff);
        the squared norm sums the squared forms.
        """
        quad = {}
        lin = {}
        for form in components:
            for va, ca in form:
                for vb, cb in form:
                    key = (va, vb) if va <= vb else (vb, va)
                    quad[key] = quad.get(key, 0.0) + ca * cb
        for v, c in slack_terms:
            lin[v] = lin.get(v, 0.0) - c
        self.quad(name,
                  [(a, b, c) for (a, b), c in quad.items()],
                  list(lin.items()), LE, rhs, tag, convex=True)

    def finish(self):
        m = self.model
        m.metadata.setdefault("binaryCount", m.binary_count)
        m.metadata.setdefault("constraintCounts", m.constraint_counts())
        m.metadata.setdefault("sos1Count", len(m.sos1_sets()))
        m.metadata.setdefault("sos2Count", len(m.sos2_sets()))
        return m


def _assert_psd(name, qterms, sense):
    """Convex-flagged rows must have PSD quadratic part (<=) or NSD (>=)."""
    names = sorted({v for a, b, _ in qterms for v in (a, b)})
    idx = {v: i for i, v in enumerate(names)}
    n = len(names)
    M = np.zeros((n, n))
    for a, b, c in qterms:
        i, j = idx[a], idx[b]
        if i == j:
            M[i, i] += c
        else:
            M[i, j] += c / 2.0
            M[j, i] += c / 2.0
    if sense == GE:
        M = -M
    elif sense == EQ:
        raise UnrepresentableConstraint(f"{name}: quadratic equality cannot be convex")
    eigs = np.linalg.eigvalsh(M)
    if eigs.min() < PSD_TOL:
        raise ValueError(f"{name}: flagged convex but min eigenvalue {eigs.min():.3e}")


# ---------------------------------------------------------------------------
# Assignment evaluation
# ---------------------------------------------------------------------------

@dataclass
class Violation:
    constraint: str
    kind: str            # linear | quadratic | bound | integrality | sos1 | sos2
    residual: float
    scaled: float


@dataclass
class ValidationReport:
    violations: list

    @property
    def satisfied(self):
        return not self.violations

    def worst(self):
        return max((v.scaled for v in self.violations), default=0.0)


def _eval_linear(c, x):
    acc = 0.0
    mag = abs(c.rhs)
    for v, coef in c.terms:
        t = coef * x[v]
        acc += t
        mag = max(mag, abs(t))
    return acc, max(1.0, mag)


def _eval_quadratic(c, x):
    acc = 0.0
    mag = abs(c.rhs)
    for a, b, coef in c.quad:
        t = coef * x[a] * x[b]
        acc += t
        mag = max(mag, abs(t))
    for v, coef in c.lin:
        t = coef * x[v]
        acc += t
        mag = max(mag, abs(t))
    return acc, max(1.0, mag)


def _sense_residual(value, sense, rhs):
    if sense == LE:
        return max(0.0, value - rhs)
    if sense == GE:
        return max(0.0, rhs - value)
    return abs(value - rhs)


ZERO_TOL = 1e-8   # SOS membership: values below this count as zero


def validate(model, assignment, tol=1e-8):
    """Exact evaluation of every constraint, integrality, bound and SOS rule.

    Residuals are reported raw and scaled by the row magnitude; ``tol`` applies
    to the scaled residual.
    """
    missing = [name for name in model.variables if name not in assignment]
    if missing:
        raise MissingVariable(missing)
    x = {name: float(assignment[name]) for name in model.variables}
    bad = []
    for v in model.variables.values():
        val = x[v.name]
        scale = max(1.0, abs(v.lb) if np.isfinite(v.lb) else 0.0,
                    abs(v.ub) if np.isfinite(v.ub) else 0.0)
        if val < v.lb - tol * scale or val > v.ub + tol * scale:
            res = max(v.lb - val, val - v.ub)
            bad.append(Violation(v.name, "bound", res, res / scale))
        if v.kind == BINARY:
            res = abs(val - round(val))
            if res > tol:
                bad.append(Violation(v.name, "integrality", res, res))
    for c in model.linear:
        value, scale = _eval_linear(c, x)
        res = _sense_residual(value, c.sense, c.rhs)
        if res / scale > tol:
            bad.append(Violation(c.name, "linear", res, res / scale))
    for c in model.quadratic:
        value, scale = _eval_quadratic(c, x)
        res = _sense_residual(value, c.sense, c.rhs)
        if res / scale > tol:
            bad.append(Violation(c.name, "quadratic", res, res / scale))
    for s in model.sos_sets:
        values = [x[m] for m in s.members]
        nz = [i for i, v in enumerate(values) if abs(v) > ZERO_TOL]
        if s.level == 1 and len(nz) > 1:
            res = float(len(nz) - 1)
            bad.append(Violation(s.name, "sos1", res, res))
        if s.level == 2:
            if len(nz) > 2 or (len(nz) == 2 and nz[1] - nz[0] != 1):
                res = float(max(len(nz) - 2, 1))
                bad.append(Violation(s.name, "sos2", res, res))
    return ValidationReport(violations=bad)


def evaluate_objective(model, assignment):
    x = assignment
    total = model.objective.constant
    for a, b, c in model.objective.quad:
        total += c * x[a] * x[b]
    for v, c in model.objective.lin:
        total += c * x[v]
    return total
