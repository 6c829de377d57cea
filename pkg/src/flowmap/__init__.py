"""Graph-based maps of dynamics with sparse hashing and frequency-domain prediction."""

from .engine import DynamicsMap
from .estimators import FlowGraphMap, GridFlowMap
from .evaluation import aggregate, evaluate_scene
from .exceptions import (
    EmptyHistogram,
    EmptyOverlap,
    FlowMapError,
    InvalidArgument,
    NoPath,
    NotFound,
    OutOfBounds,
    ParseError,
    ProtocolViolation,
    UndefinedResult,
)
from .fremen import GlobalTemporalModel
from .geometry import CellKey, bin_center, hash_key, orientation_bin
from .grid import GridModel, GridSpec, rasterize_graph_model
from .histogram import DirectionalHistogram, FlowDescriptor, descriptor_of
from .nav_graph import NavGraph, TopologyEvent
from .planner import PlannerWeights, plan
from .sparse_hash import SparseHashMap

__version__ = "0.1.0"

__all__ = [
    "CellKey",
    "DirectionalHistogram",
    "DynamicsMap",
    "EmptyHistogram",
    "EmptyOverlap",
    "FlowDescriptor",
    "FlowGraphMap",
    "FlowMapError",
    "GlobalTemporalModel",
    "GridFlowMap",
    "GridModel",
    "GridSpec",
    "InvalidArgument",
    "NavGraph",
    "NoPath",
    "NotFound",
    "OutOfBounds",
    "ParseError",
    "PlannerWeights",
    "ProtocolViolation",
    "SparseHashMap",
    "TopologyEvent",
    "UndefinedResult",
    "aggregate",
    "bin_center",
    "descriptor_of",
    "evaluate_scene",
    "hash_key",
    "orientation_bin",
    "plan",
    "rasterize_graph_model",
]
