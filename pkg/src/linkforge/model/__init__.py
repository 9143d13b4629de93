from .assignments import (
    SectorMarginError,
    exact_assignment,
    micp_assignment,
    minlp_assignment,
)
from .build import (
    SynthesisConfig,
    breakpoints,
    build_geometric_exact,
    build_micp_relaxation,
    build_minlp,
    build_topological,
    movable_capable,
)
from .export import export_model, model_from_json, model_to_json, model_to_lp
from .ir import (
    BINARY,
    CONTINUOUS,
    EQ,
    GE,
    LE,
    MissingVariable,
    ModelBuilder,
    ModelIR,
    UnrepresentableConstraint,
    evaluate_objective,
    validate,
)
from .sectors import angular_margin, sector_table
from .sos import encode_sos1, encode_sos2

__all__ = [
    "SectorMarginError", "exact_assignment", "micp_assignment", "minlp_assignment",
    "SynthesisConfig", "breakpoints", "build_geometric_exact", "build_micp_relaxation",
    "build_minlp", "build_topological", "movable_capable",
    "export_model", "model_from_json", "model_to_json", "model_to_lp",
    "BINARY", "CONTINUOUS", "EQ", "GE", "LE", "MissingVariable", "ModelBuilder",
    "ModelIR", "UnrepresentableConstraint", "evaluate_objective", "validate",
    "angular_margin", "sector_table", "encode_sos1", "encode_sos2",
]
