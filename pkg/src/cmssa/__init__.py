"""Contrastive multivariate singular spectrum analysis.

Decomposes multichannel time series into components that are enhanced in
a foreground collection relative to a background collection, selects
contrast strengths automatically, and clusters the transformed series by
DTW similarity.
"""

from .alpha_search import (
    AlphaCandidateSet,
    AlphaSelection,
    build_candidates,
    eigenspace_affinity,
    log_space,
    search,
    select,
)
from .cluster import (
    ClusterAssignment,
    SimilarityMatrix,
    similarity,
    similarity_matrix,
    spectral_cluster,
)
from .core import (
    CovarianceMatrix,
    Decomposition,
    EigenBasis,
    TrajectoryMatrix,
    collection_covariance,
    contrast,
    covariance,
    fit_basis,
    hankelize,
    load_basis,
    project,
    reconstruct,
    save_basis,
    stack,
    top_eigenbasis,
)
from .dtw import dtw_distance, fastdtw_distance, kernel_name
from .errors import (
    CmssaError,
    DataError,
    InputError,
    InsufficientDataError,
    NumericError,
    ParameterError,
    ParseError,
    SchemaError,
    ShapeError,
)
from .evaluate import EvalReport, bcubed
from .ingest import (
    CenteredSeries,
    TimeSeries,
    center,
    load_collection,
    save_collection,
    split_halves,
)
from .synthetic import SynthConfig, generate_background, generate_foreground

__version__ = "0.1.0"

__all__ = [
    "AlphaCandidateSet",
    "AlphaSelection",
    "CenteredSeries",
    "ClusterAssignment",
    "CmssaError",
    "CovarianceMatrix",
    "DataError",
    "Decomposition",
    "EigenBasis",
    "EvalReport",
    "InputError",
    "InsufficientDataError",
    "NumericError",
    "ParameterError",
    "ParseError",
    "SchemaError",
    "ShapeError",
    "SimilarityMatrix",
    "SynthConfig",
    "TimeSeries",
    "TrajectoryMatrix",
    "bcubed",
    "build_candidates",
    "center",
    "collection_covariance",
    "contrast",
    "covariance",
    "dtw_distance",
    "eigenspace_affinity",
    "fastdtw_distance",
    "fit_basis",
    "generate_background",
    "generate_foreground",
    "hankelize",
    "kernel_name",
    "load_basis",
    "load_collection",
    "log_space",
    "project",
    "reconstruct",
    "save_basis",
    "save_collection",
    "search",
    "select",
    "similarity",
    "similarity_matrix",
    "spectral_cluster",
    "split_halves",
    "stack",
    "top_eigenbasis",
    "__version__",
]
