"""Certified attractor-repeller decompositions of differential inclusions
on cubical grids: validated box maps, combinatorial invariant sets, and
parameter continuation."""

from .boxmap import (
    BoxMapGraph,
    Grid,
    a_priori_enclosure,
    build_graph,
    default_tau,
    image_boxes,
    transpose,
)
from .boxset import BoxSet
from .config import PipelineConfig, SystemConfig, parse_config, print_config
from .continuation import (
    SampleRecord,
    SweepPlan,
    SweepReport,
    continue_decomposition,
    semicontinuity_check,
    sweep_isolating,
)
from .dynamics import (
    ARDecomposition,
    IsolationCertificate,
    RestrictedGraph,
    alpha_limit,
    attractor_from,
    backward_reach,
    box_hausdorff,
    decompose,
    dual_repeller,
    forward_reach,
    invariant_part,
    is_isolating,
    omega_limit,
    restrict,
)
from .errors import (
    AnchorFailure,
    BoxdynError,
    DecompositionInconsistent,
    EmptyInput,
    EmptyIntersection,
    NoAttractor,
    NoEnclosure,
    ParseError,
    PreconditionViolated,
    UncoveredRegion,
    ValidationError,
)
from .expressions import Polynomial, parse_expression
from .inclusion import (
    Guard,
    Override,
    Params,
    PiecewiseInclusion,
    RegionPiece,
    evaluate_hull,
    evaluate_hull_batch,
)
from .intervals import IntervalVector

__version__ = "0.1.0"

__all__ = [
    "ARDecomposition", "AnchorFailure", "BoxMapGraph", "BoxSet", "BoxdynError",
    "DecompositionInconsistent", "EmptyInput", "EmptyIntersection", "Grid", "Guard",
    "IntervalVector", "IsolationCertificate", "NoAttractor", "NoEnclosure", "Override",
    "Params", "ParseError", "PiecewiseInclusion", "PipelineConfig", "Polynomial",
    "PreconditionViolated", "RegionPiece", "RestrictedGraph", "SampleRecord",
    "SweepPlan", "SweepReport", "SystemConfig", "UncoveredRegion", "ValidationError",
    "a_priori_enclosure", "alpha_limit", "attractor_from", "backward_reach",
    "box_hausdorff", "build_graph", "continue_decomposition", "decompose",
    "default_tau", "dual_repeller", "evaluate_hull", "evaluate_hull_batch",
    "forward_reach", "image_boxes", "invariant_part", "is_isolating", "omega_limit",
    "parse_config", "parse_expression", "print_config", "restrict",
    "semicontinuity_check", "sweep_isolating", "transpose",
]
