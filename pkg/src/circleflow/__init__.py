"""Ideal circle patterns by combinatorial Ricci flow on finite truncations."""

__version__ = "0.1.0"

from .complex import CellComplex, build_exhaustion, dual_complex, validate_c1
from .curvature import PackingMetric, vertex_curvature
from .flow import FlowConfig, FlowTrace, integrate
from .geometry import Background
from .layout import embed

__all__ = [
    "Background",
    "CellComplex",
    "FlowConfig",
    "FlowTrace",
    "PackingMetric",
    "build_exhaustion",
    "dual_complex",
    "embed",
    "integrate",
    "validate_c1",
    "vertex_curvature",
    "__version__",
]
