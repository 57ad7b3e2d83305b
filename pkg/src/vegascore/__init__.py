"""Training-free ranking of vision-language models on unlabeled tasks.

Scores one precomputed embedding bundle per (model, dataset) pair by
aligning the class structure of the visual and textual modalities, plus
five classic training-free baselines and zoo-level ranking metrics.
"""

__version__ = "0.1.0"

from ._kernels import backend_name
from .baselines import (
    BaselineScores,
    baseline_scores,
    confidence_score,
    dispersion_score,
    entropy_score,
    kmeans,
    rotation_score,
    snd_score,
)
from .bundle import (
    BundleError,
    DatasetBundle,
    ValidationReport,
    average_templates,
    l2_normalize,
    load_bundle,
    validate_bundle_dir,
    write_bundle,
)
from .graphs import (
    ClassGaussian,
    TextualGraph,
    VisualGraph,
    bhattacharyya,
    build_textual_graph,
    build_visual_graph,
    cluster_stats,
)
from .metrics import (
    RankingMetrics,
    kendall_tau,
    kendall_tau_top5,
    oracle,
    ranking_metrics,
    top1_accuracy,
    top5_recall,
)
from .synth import SynthConfig, generate_bundle, generate_zoo
from .vega import VegaConfig, VegaScore, edge_similarity, node_similarity, vega_score
from .zeroshot import (
    PseudoLabels,
    cosine_matrix,
    pseudo_labels,
    softmax_probs,
    zero_shot_accuracy,
)

__all__ = [
    "BaselineScores",
    "BundleError",
    "ClassGaussian",
    "DatasetBundle",
    "PseudoLabels",
    "RankingMetrics",
    "SynthConfig",
    "TextualGraph",
    "ValidationReport",
    "VegaConfig",
    "VegaScore",
    "VisualGraph",
    "average_templates",
    "backend_name",
    "baseline_scores",
    "bhattacharyya",
    "build_textual_graph",
    "build_visual_graph",
    "cluster_stats",
    "confidence_score",
    "cosine_matrix",
    "dispersion_score",
    "edge_similarity",
    "entropy_score",
    "generate_bundle",
    "generate_zoo",
    "kendall_tau",
    "kendall_tau_top5",
    "kmeans",
    "l2_normalize",
    "load_bundle",
    "node_similarity",
    "oracle",
    "pseudo_labels",
    "ranking_metrics",
    "rotation_score",
    "snd_score",
    "softmax_probs",
    "top1_accuracy",
    "top5_recall",
    "validate_bundle_dir",
    "vega_score",
    "write_bundle",
    "zero_shot_accuracy",
]
