"""Solution value shared by both solvers: linkage + trajectory + provenance."""
from __future__ import annotations

from dataclasses import dataclass, field

from .kinematics import objective, trace
from .serialize import (
    SchemaError,
    linkage_from_json,
    linkage_to_json,
    target_from_json,
    target_to_json,
    trajectory_from_json,
    trajectory_to_json,
)

SOLUTION_SCHEMA = "linkforge/solution"
SOLUTION_VERSION = 1


@dataclass
class Solution:
    linkage: object
    trajectory: object
    target: object
    objective_total: float
    tracking: float
    regularization: float
    solver: str
    seed: int | None = None
    config: dict = field(default_factory=dict)
    stats: dict = field(default_factory=dict)

    def to_json(self):
        return {
            "schema": SOLUTION_SCHEMA,
            "version": SOLUTION_VERSION,
            "solver": self.solver,
            "seed": self.seed,
            "objective": {"total": self.objective_total, "tracking": self.tracking,
                          "regularization": self.regularization},
            "linkage": linkage_to_json(self.linkage),
            "trajectory": trajectory_to_json(self.trajectory),
            "target": target_to_json(self.target),
            "config": self.config,
            "stats": self.stats,
        }

    @classmethod
    def from_json(cls, obj, where="solution"):
        if not isinstance(obj, dict) or obj.get("schema") != SOLUTION_SCHEMA:
            raise SchemaError(where + ".schema", f"expected {SOLUTION_SCHEMA!r}")
        if obj.get("version") != SOLUTION_VERSION:
            raise SchemaError(where + ".version", f"unsupported version {obj.get('version')!r}")
        o = obj.get("objective", {})
        return cls(linkage=linkage_from_json(obj["linkage"], where + ".linkage"),
                   trajectory=trajectory_from_json(obj["trajectory"], where + ".trajectory"),
                   target=target_from_json(obj["target"], where + ".target"),
                   objective_total=float(o.get("total", 0.0)),
                   tracking=float(o.get("tracking", 0.0)),
                   regularization=float(o.get("regularization", 0.0)),
                   solver=obj.get("solver", "unknown"),
                   seed=obj.get("seed"),
                   config=obj.get("config", {}),
                   stats=obj.get("stats", {}))


def solution_from_linkage(linkage, target, lam, solver, seed=None, config=None,
                          stats=None):
    traj = trace(linkage, target.n_samples)
    br = objective(linkage, target, lam)
    return Solution(linkage=linkage, trajectory=traj, target=target,
                    objective_total=br.total, tracking=br.tracking,
                    regularization=br.regularization, solver=solver, seed=seed,
                    config=config or {}, stats=stats or {})
