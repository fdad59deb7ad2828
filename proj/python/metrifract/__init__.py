"""Python bindings for the metrifract core library."""

from ._core import (
    box_dimension,
    circle_dist,
    covering_profile,
    embedding_distortion,
    gauge_eval,
    hat_transform,
    hilbert_cell,
    hilbert_curve,
    ifs_attractor,
    interleave_map,
    interval_system_report,
    map_onto_cube,
    mcshane_extend,
    modulus_fit,
    moran_dimension,
    ord_estimate,
)

__all__ = [
    "box_dimension",
    "circle_dist",
    "covering_profile",
    "embedding_distortion",
    "gauge_eval",
    "hat_transform",
    "hilbert_cell",
    "hilbert_curve",
    "ifs_attractor",
    "interleave_map",
    "interval_system_report",
    "map_onto_cube",
    "mcshane_extend",
    "modulus_fit",
    "moran_dimension",
    "ord_estimate",
]
