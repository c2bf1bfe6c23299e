"""Casualty detection from ground-projected point clouds.

The pipeline fits the dominant (floor) plane with RANSAC, drops every point
off that plane onto it, rasterises the projections into a binary grid map
and finds a body silhouette there by rotation-sweeping template matching.
"""

from .errors import (
    BodyNotVisible,
    CellSizeMismatch,
    DegenerateSample,
    EmptyInput,
    GPPCError,
    InvalidBounds,
    InvalidProbability,
    IoError,
    NoPlaneFound,
    OffPlanePoint,
    OutOfBounds,
    ParseError,
    StageError,
    TemplateLargerThanGrid,
    TooFewPoints,
    UnsupportedData,
)
from .geometry import (
    PlaneBasis,
    PlaneModel,
    distance_to_plane,
    plane_basis,
    plane_from_three_points,
    project_to_plane,
    to_plane_coords,
)
from .gridmap import GridMap, occupancy_fraction, project_cloud, rasterize
from .matcher import Detection, MatchConfig, Template, detect_casualty, match_score, rotate_template
from .pipeline import DetectionReport, PipelineConfig, detect_cloud, run_detect, run_eval
from .ransac import PlaneFit, PointCloud, RansacConfig, estimate_ground_plane, partition_by_plane, required_iterations
from .synth import CameraModel, GroundTruth, Scenario, body_silhouette, body_template, make_scene, scenario_catalog

__version__ = "0.1.0"
