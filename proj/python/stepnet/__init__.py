"""Step-function ReLU network constructions and evaluation."""

from stepnet._core import (
    ConstructionReport,
    Hyperplane,
    ReluNetwork,
    SimplePolygon,
    convex_bump,
    convex_indicator,
    convex_indicator_axes,
    decomposition_composite,
    first_layer_breaklines,
    halfspace_ramp,
    hshape_fixture,
    hull_composite,
    load_network,
    normalize_first_layer,
    polygonalize_circle_inscribed,
    save_network,
    slice_network,
)

__all__ = [
    "ConstructionReport",
    "Hyperplane",
    "ReluNetwork",
    "SimplePolygon",
    "convex_bump",
    "convex_indicator",
    "convex_indicator_axes",
    "decomposition_composite",
    "first_layer_breaklines",
    "halfspace_ramp",
    "hshape_fixture",
    "hull_composite",
    "load_network",
    "normalize_first_layer",
    "polygonalize_circle_inscribed",
    "save_network",
    "slice_network",
]
