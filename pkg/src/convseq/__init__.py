"""Training-free sequence-based visual place recognition.

Query camera frames are matched against a reference image map using
entropy-guided regional HOG descriptors, region-wise cosine matching,
and dynamically sized frame sequences.
"""

__version__ = "0.1.0"

from .config import DEFAULT_T_E_MAX, PipelineConfig
from .datasetio import (
    GroundTruth,
    Traverse,
    VariationSpec,
    generate_synthetic_traverse,
    load_ground_truth,
    load_traverse,
)
from .descriptor import ImageDescriptor, describe_image
from .errors import ConvseqError
from .evaluation import BenchmarkReport, MatchRecord
from .imaging import EntropyMap, GradientMap, GrayImage, standardize
from .matcher import match_images, score_matrix
from .pipeline import BenchmarkRun, encode_query_frame, run_benchmark
from .saliency import QueryDescriptor, RoiSelection, extract_roi, select_regions
from .seqmatch import SequenceMatchResult, match_sequence
from .sequencer import (
    EncodedFrame,
    QuerySequence,
    SequenceDecision,
    build_query_sequence,
    decide_sequence,
)

__all__ = [
    "__version__",
    "DEFAULT_T_E_MAX",
    "PipelineConfig",
    "GroundTruth",
    "Traverse",
    "VariationSpec",
    "generate_synthetic_traverse",
    "load_ground_truth",
    "load_traverse",
    "ImageDescriptor",
    "describe_image",
    "ConvseqError",
    "BenchmarkReport",
    "MatchRecord",
    "EntropyMap",
    "GradientMap",
    "GrayImage",
    "standardize",
    "match_images",
    "score_matrix",
    "BenchmarkRun",
    "encode_query_frame",
    "run_benchmark",
    "QueryDescriptor",
    "RoiSelection",
    "extract_roi",
    "select_regions",
    "SequenceMatchResult",
    "match_sequence",
    "EncodedFrame",
    "QuerySequence",
    "SequenceDecision",
    "build_query_sequence",
    "decide_sequence",
]
