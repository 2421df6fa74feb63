"""Extrinsic radius and pinching diagnostics for hypersurfaces of space forms."""

__version__ = "0.1.0"

from .analysis import AnalysisConfig, PinchingReport, analyze
from .curvature import CurvatureData, compute_curvature, mean_curvatures
from .enclosing import Ball, extrinsic_radius, miniball
from .errors import (
    ClassViolation,
    ConfigError,
    DegenerateError,
    DomainError,
    HemisphereError,
    ImmersionError,
    ParseError,
    PinchlabError,
    SolverError,
)
from .shapes import (
    CATALOG,
    ChartShape,
    Ellipsoid,
    GeodesicSphere,
    GridSpec,
    PerturbedGeodesicSphere,
    PerturbedSphere,
    RoundSphere,
    SampledHypersurface,
    ingest_point_cloud,
    make_shape,
    sample_shape,
)
from .spaceform import SpaceForm

__all__ = [
    "AnalysisConfig", "PinchingReport", "analyze",
    "CurvatureData", "compute_curvature", "mean_curvatures",
    "Ball", "extrinsic_radius", "miniball",
    "ClassViolation", "ConfigError", "DegenerateError", "DomainError", "HemisphereError",
    "ImmersionError", "ParseError", "PinchlabError", "SolverError",
    "CATALOG", "ChartShape", "Ellipsoid", "GeodesicSphere", "GridSpec", "PerturbedGeodesicSphere",
    "PerturbedSphere", "RoundSphere", "SampledHypersurface", "ingest_point_cloud", "make_shape",
    "sample_shape", "SpaceForm",
]
