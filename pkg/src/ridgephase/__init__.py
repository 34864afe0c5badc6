"""Geometric (Pancharatnam) phase from three-pinhole interferograms."""
from .errors import (
    BadPinholePair,
    CollinearPinholes,
    ConfigError,
    DegenerateLattice,
    DegenerateTriple,
    EmptyImage,
    FormatError,
    GeometryOverlap,
    GridTooSmall,
    PhysicsDomainError,
    RidgePhaseError,
    WindowTooSmall,
    ZeroAmplitude,
)
from .interferometer import (
    Interferogram,
    NoiseSpec,
    ObservationGrid,
    PinholeGeometry,
    RasterImage,
    SourceConfig,
    check_paraxial_validity,
    exact_intensity,
    pair_fringe,
    paraxial_intensity,
    quantize,
)
from .ridges import (
    RidgeLineFamily,
    RidgeTriangle,
    build_ridge_family,
    delta3_from_phases,
    demodulate_phase,
    directional_derivative,
    elemental_triangles,
    extract,
    isolate_fringe,
    recover_delta3,
)
from .states import (
    H,
    V,
    JonesVector,
    StokesPoint,
    delta3_theory,
    inner_product,
    pancharatnam_phase,
    paper_states,
    spherical_triangle_solid_angle,
    to_stokes,
    visibility,
)

__version__ = "0.1.0"
