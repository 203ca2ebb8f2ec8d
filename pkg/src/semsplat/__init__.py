"""Semantic Gaussian splatting engine with open-vocabulary querying."""

from .association import ReplicatedSequence, compact_labels, consistency_report, vote
from .bank import MemoryBank, build_bank, generate_ids, label_image, snap, snap_map
from .formats import (
    SceneBundle,
    assign_features,
    read_bank,
    read_label_map,
    read_scene,
    write_bank,
    write_label_map,
    write_scene,
)
from .projection import ProjectedGaussian, alpha_at, project
from .query import (
    QuerySpec,
    RelevancyMap,
    localize,
    relevancy,
    relevancy_map,
    segment,
    segment_multiclass,
)
from .rasterize import RenderOutput, render_reference, render_tiled, sort_by_depth
from .scene import (
    BACKGROUND_FEATURE,
    Embedding,
    FeatureMap,
    GaussianCloud,
    LabelMap,
    PinholeCamera,
    SemanticGaussian,
    covariance_of,
    validate_scene,
)

__version__ = "0.1.0"

__all__ = [
    "BACKGROUND_FEATURE",
    "Embedding",
    "FeatureMap",
    "GaussianCloud",
    "LabelMap",
    "MemoryBank",
    "PinholeCamera",
    "ProjectedGaussian",
    "QuerySpec",
    "RelevancyMap",
    "RenderOutput",
    "ReplicatedSequence",
    "SceneBundle",
    "SemanticGaussian",
    "alpha_at",
    "assign_features",
    "build_bank",
    "compact_labels",
    "consistency_report",
    "covariance_of",
    "generate_ids",
    "label_image",
    "localize",
    "project",
    "read_bank",
    "read_label_map",
    "read_scene",
    "relevancy",
    "relevancy_map",
    "render_reference",
    "render_tiled",
    "segment",
    "segment_multiclass",
    "snap",
    "snap_map",
    "sort_by_depth",
    "validate_scene",
    "vote",
    "write_bank",
    "write_label_map",
    "write_scene",
]
