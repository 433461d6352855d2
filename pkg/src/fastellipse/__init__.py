"""Fast ellipse detection with characteristic-number arc selection."""

from .bench import EvalResult, match_and_score, overlap_ratio, run_benchmark
from .detector import Detection, DetectionReport, DetectorConfig, detect
from .edges import GrayImage, canny_edges, read_image, to_grayscale
from .ellipse import EllipseParams
from .errors import (
    ConfigError,
    DatasetFormatError,
    EllipseDetectError,
    FitError,
    UnsupportedFormat,
)
from .geometry import HomogeneousPoint, cnc_from_six, cnl, pascal_collinearity_residual
from .synth import SceneSpec, render

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DatasetFormatError",
    "Detection",
    "DetectionReport",
    "DetectorConfig",
    "EllipseDetectError",
    "EllipseParams",
    "EvalResult",
    "FitError",
    "GrayImage",
    "HomogeneousPoint",
    "SceneSpec",
    "UnsupportedFormat",
    "canny_edges",
    "cnc_from_six",
    "cnl",
    "detect",
    "match_and_score",
    "overlap_ratio",
    "pascal_collinearity_residual",
    "read_image",
    "render",
    "run_benchmark",
    "to_grayscale",
]
