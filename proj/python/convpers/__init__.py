"""Convolutional persistence: filter banks, persistent homology and diagram metrics.

Images are NumPy arrays (row-major, one channel). Diagrams are ``(n, 3)``
float arrays of ``(dim, birth, death)`` rows, with ``inf`` for essential
classes.
"""

from ._convpers import (
    bottleneck,
    classify,
    convolve,
    cpt,
    diagram,
    euler_curve,
    persistence_image,
    random_filters,
    region_shape,
    sinkhorn,
    synthetic,
    total_persistence,
    wasserstein,
)

__all__ = [
    "bottleneck",
    "classify",
    "convolve",
    "cpt",
    "diagram",
    "euler_curve",
    "persistence_image",
    "random_filters",
    "region_shape",
    "sinkhorn",
    "synthetic",
    "total_persistence",
    "wasserstein",
]
