from holder_metrics.geometry.riemann_sphere import (
    INFINITY,
    BoundaryNet,
    ExtendedComplex,
    PolylinePath,
    chordal_distance,
    spherical_distance,
    spherical_path_length,
)
from holder_metrics.geometry.hyperbolic import (
    GridRegion,
    hyperbolic_distance_disk,
    hyperbolic_distance_domain,
    quasihyperbolic_distance,
)

__all__ = [
    'INFINITY', 'BoundaryNet', 'ExtendedComplex', 'PolylinePath', 'chordal_distance',
    'spherical_distance', 'spherical_path_length', 'GridRegion', 'hyperbolic_distance_disk',
    'hyperbolic_distance_domain', 'quasihyperbolic_distance',
]
