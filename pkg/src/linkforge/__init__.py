"""linkforge: joint topology/geometry synthesis of planar linkages.

Given a target end-effector curve the toolkit builds the mixed-integer
quadratically-constrained synthesis model, exports it for external MIP
solvers, and searches it with an in-tree branch-and-bound solver plus a
simulated-annealing baseline.
"""

from .annealing import SAConfig, cooling, initial_linkage
from .annealing import run as anneal
from .branchbound import Budget, propagate
from .branchbound import solve as branch_and_bound
from .branchbound import solve_parallel as branch_and_bound_parallel
from .estimator import LinkageSynthesizer
from .kinematics import (
    ARBITRARY_ORDER,
    FIXED_ORDER,
    FixedNode,
    Linkage,
    MotorSpec,
    MovableNode,
    NearSingular,
    TargetCurve,
    Trajectory,
    TriangleInfeasible,
    forward_kinematics,
    jacobian_adjoint,
    law_of_cosine,
    motor_position,
    objective,
    trace,
)
from .model import (
    SynthesisConfig,
    build_geometric_exact,
    build_micp_relaxation,
    build_minlp,
    build_topological,
    export_model,
    validate,
)
from .nlp import GeometricNlp, NlpOptions, refine_linkage, solve_phase1, solve_phase2
from .solution import Solution
from .targets import default_box, default_lambda, make_target, resample_closed
from .topology import (
    TopologyAssignment,
    assignment_from_linkage,
    check_topology,
    enumerate_topologies,
    flux_feasible,
)

__version__ = "0.1.0"

__all__ = [
    "SAConfig", "cooling", "initial_linkage", "anneal",
    "Budget", "propagate", "branch_and_bound", "branch_and_bound_parallel",
    "LinkageSynthesizer",
    "ARBITRARY_ORDER", "FIXED_ORDER", "FixedNode", "Linkage", "MotorSpec",
    "MovableNode", "NearSingular", "TargetCurve", "Trajectory",
    "TriangleInfeasible", "forward_kinematics", "jacobian_adjoint",
    "law_of_cosine", "motor_position", "objective", "trace",
    "SynthesisConfig", "build_geometric_exact", "build_micp_relaxation",
    "build_minlp", "build_topological", "export_model", "validate",
    "GeometricNlp", "NlpOptions", "refine_linkage", "solve_phase1", "solve_phase2",
    "Solution",
    "default_box", "default_lambda", "make_target", "resample_closed",
    "TopologyAssignment", "assignment_from_linkage", "check_topology",
    "enumerate_topologies", "flux_feasible",
    "__version__",
]
