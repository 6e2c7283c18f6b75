"""denscope: density-based exploration of object feature distributions.

Kernel density estimates over per-scene object detections, joint and
conditional distributions across object pairs, PMI maps, and 1D/2D
density-preserving embeddings, served behind an interactive HTTP API.
"""

from .dataset import (
    Dataset,
    Detection,
    GeneratorConfig,
    ObjectLabel,
    SceneRecord,
    SyntheticGroundTruth,
    generate_synthetic,
    load_dataset,
    load_generator_config,
    occurrence_set,
    write_dataset,
)
from .density import (
    DEFAULT_BANDWIDTH,
    DensityVector,
    JointDensity,
    PmiMap,
    conditional_density,
    joint_density,
    kde_unnormalized,
    kernel,
    marginal_density,
    pmi,
    pmi_map,
    single_density,
    subset_density,
)
from .embed import (
    EmbedConfig,
    EmbeddingResult,
    NeighborDistribution,
    gradient,
    low_dim_density,
    neighbor_distribution,
    objective,
    optimize,
    pairwise_sq_dists,
    student_t_q,
    tsne_embed,
)
from .errors import (
    DatasetError,
    DenscopeError,
    EmbedDivergedError,
    EmptySubsetError,
    GeneratorConfigError,
    NoCoOccurrenceError,
    NotDetectedError,
    UnknownLabelError,
)

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "Detection",
    "GeneratorConfig",
    "ObjectLabel",
    "SceneRecord",
    "SyntheticGroundTruth",
    "generate_synthetic",
    "load_dataset",
    "load_generator_config",
    "occurrence_set",
    "write_dataset",
    "DEFAULT_BANDWIDTH",
    "DensityVector",
    "JointDensity",
    "PmiMap",
    "conditional_density",
    "joint_density",
    "kde_unnormalized",
    "kernel",
    "marginal_density",
    "pmi",
    "pmi_map",
    "single_density",
    "subset_density",
    "EmbedConfig",
    "EmbeddingResult",
    "NeighborDistribution",
    "gradient",
    "low_dim_density",
    "neighbor_distribution",
    "objective",
    "optimize",
    "pairwise_sq_dists",
    "student_t_q",
    "tsne_embed",
    "DatasetError",
    "DenscopeError",
    "EmbedDivergedError",
    "EmptySubsetError",
    "GeneratorConfigError",
    "NoCoOccurrenceError",
    "NotDetectedError",
    "UnknownLabelError",
    "__version__",
]
