"""Holographic reduced representation algebra and capacity experiments.

The package has three layers:

* :mod:`hrrlab.algebra`: circular-convolution binding, superposition,
  convolutive powers, involution, similarity, and similarity thresholds on
  plain numpy vectors.
* :mod:`hrrlab.spatial`: encoding 2-D points and labeled scenes into
  single vectors and reading them back through similarity heatmaps.
* :mod:`hrrlab.capacity`: reproducible experiment drivers measuring how
  many items a vector of a given dimension can hold.

``hrrlab.cli`` provides the command-line entry point.
"""

from .algebra import (
    NotUnitaryError,
    SimilarityThresholds,
    SingularSpectrumError,
    bind,
    involution,
    is_unitary,
    load_vector,
    power,
    random_unit,
    random_unitary,
    save_vector,
    similarity,
    spectrum,
    superpose,
    thresholds,
)
from .capacity import (
    CapacityRecord,
    SpatialConfig,
    SummaryRow,
    SuperpositionConfig,
    group_by_class_size,
    partitions,
    run_spatial,
    run_superposition,
    summarize,
)
from .spatial import (
    DEFAULT_GRID,
    GridSpec,
    LabeledObject,
    LabeledScene,
    SimilarityHeatmap,
    SpatialAxes,
    decode_peaks,
    encode_point,
    encode_point_set,
    encode_scene,
    grid_encodings,
    heatmap,
    query_class,
    random_vocabulary,
)

__version__ = "0.1.0"

__all__ = [
    "CapacityRecord",
    "DEFAULT_GRID",
    "GridSpec",
    "LabeledObject",
    "LabeledScene",
    "NotUnitaryError",
    "SimilarityHeatmap",
    "SimilarityThresholds",
    "SingularSpectrumError",
    "SpatialAxes",
    "SpatialConfig",
    "SummaryRow",
    "SuperpositionConfig",
    "__version__",
    "bind",
    "decode_peaks",
    "encode_point",
    "encode_point_set",
    "encode_scene",
    "grid_encodings",
    "group_by_class_size",
    "heatmap",
    "involution",
    "is_unitary",
    "load_vector",
    "partitions",
    "power",
    "query_class",
    "random_unit",
    "random_unitary",
    "random_vocabulary",
    "run_spatial",
    "run_superposition",
    "save_vector",
    "similarity",
    "spectrum",
    "superpose",
    "thresholds",
]
