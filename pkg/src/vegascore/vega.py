"""Graph-alignment score for one model/dataset bundle.

The score is the sum of two bounded parts. Node similarity s_n is the
mean sharpened-softmax probability each image assigns to its own
pseudo-label, which lives in [1/K, 1] and rises as images sit tighter
on their class-name anchors. Edge similarity s_e rescales the Pearson
correlation between the flattened textual and visual edge matrices
into [0, 1], measuring whether the two modalities arrange the classes
alike. Models are ranked by s = s_n + s_e.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, replace

import numpy as np

from .bundle import DatasetBundle, average_templates, l2_normalize
from .graphs import (
    COV_MODES,
    EDGE_TRANSFORMS,
    build_textual_graph,
    build_visual_graph,
    cluster_stats,
)
from .zeroshot import PseudoLabels, cosine_matrix, pseudo_labels, softmax_probs


@dataclass(frozen=True)
class VegaConfig:
    """Everything needed to reproduce a score."""

    t: float = 0.05
    cov_mode: str = "diag"
    edge_transform: str = "bh_coefficient"
    shrinkage: float = 1e-2
    exclude_diagonal: bool = False
    normalize: bool = True

    def __post_init__(self):
        if self.t <= 0:
            raise ValueError(f"temperature t must be positive, got {self.t}")
        if self.cov_mode not in COV_MODES:
            raise ValueError(f"cov_mode must be one of {COV_MODES}")
        if self.edge_transform not in EDGE_TRANSFORMS:
            raise ValueError(f"edge_transform must be one of {EDGE_TRANSFORMS}")
        if self.shrinkage < 0:
            raise ValueError("shrinkage must be non-negative")

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class VegaScore:
    s_n: float
    s_e: float
    s: float
    active_classes: int
    config: VegaConfig


def node_similarity(
    visual: np.ndarray,
    textual: np.ndarray,
    pseudo: PseudoLabels,
    t: float = 0.05,
) -> float:
    """Mean sharpened-softmax probability of each image's pseudo-label.

    Because the pseudo-label is the argmax class, each per-image term is
    the row maximum of the softmax, so the mean is bounded below by 1/K
    (uniform rows) and above by 1.
    """
    if pseudo.n_images == 0:
        raise ValueError("node similarity undefined for an empty image set")
    probs = softmax_probs(cosine_matrix(visual, textual), temperature=t)
    own = probs[np.arange(pseudo.n_images), pseudo.assignments]
    return float(own.mean())


def edge_similarity(
    e_t: np.ndarray, e_v: np.ndarray, exclude_diagonal: bool = False
) -> float:
    """Rescaled Pearson correlation between two conformal edge matrices.

    Flattens all K'^2 entries (optionally dropping the diagonal),
    returns 0.5 * corr + 0.5. Zero variance on either side makes the
    correlation undefined; it is taken as 0 (s_e = 0.5) rather than an
    error so degenerate single-cluster collapses score low but finite.
    """
    e_t = np.asarray(e_t, dtype=np.float64)
    e_v = np.asarray(e_v, dtype=np.float64)
    if e_t.shape != e_v.shape or e_t.ndim != 2 or e_t.shape[0] != e_t.shape[1]:
        raise ValueError(f"edge matrices not conformal: {e_t.shape} vs {e_v.shape}")
    if e_t.shape[0] < 2:
        raise ValueError("edge similarity needs at least 2 classes")
    if exclude_diagonal:
        mask = ~np.eye(e_t.shape[0], dtype=bool)
        x, y = e_t[mask], e_v[mask]
    else:
        x, y = e_t.ravel(), e_v.ravel()
    x = x - x.mean()
    y = y - y.mean()
    nx = float(np.sqrt(x @ x))
    ny = float(np.sqrt(y @ y))
    if nx == 0.0 or ny == 0.0:
        corr = 0.0
    else:
        corr = float(np.clip((x @ y) / (nx * ny), -1.0, 1.0))
    return 0.5 * corr + 0.5


def effective_textual(bundle: DatasetBundle) -> np.ndarray:
    """Class features: the textual tensor, or the renormalized template mean."""
    if bundle.textual is not None:
        return np.asarray(bundle.textual, dtype=np.float64)
    return average_templates(bundle.textual_templates)


def vega_score(bundle: DatasetBundle, config: VegaConfig = VegaConfig()) -> VegaScore:
    """Run the full pipeline on one bundle.

    Deterministic for a fixed config. Classes with no pseudo-labeled
    members are dropped from both edge matrices before the correlation;
    fewer than 2 surviving classes is an error.
    """
    return vega_score_sweep(bundle, config, [config.t])[0]


def vega_score_sweep(
    bundle: DatasetBundle, config: VegaConfig, temperatures: list[float]
) -> list[VegaScore]:
    """Score one bundle at several node temperatures.

    Pseudo-labels and both edge matrices do not depend on t, so only
    the node term is recomputed per temperature. Returns one score per
    requested temperature, in order.
    """
    visual = np.asarray(bundle.visual, dtype=np.float64)
    textual = effective_textual(bundle)
    if config.normalize:
        visual = l2_normalize(visual)
        textual = l2_normalize(textual)

    sim = cosine_matrix(visual, textual)
    pseudo = pseudo_labels(sim)

    stats = cluster_stats(
        visual, pseudo, cov_mode=config.cov_mode, shrinkage=config.shrinkage
    )
    vgraph = build_visual_graph(stats, edge_transform=config.edge_transform)
    tgraph = build_textual_graph(textual)
    idx = np.flatnonzero(vgraph.active_mask)
    e_t = tgraph.edges[np.ix_(idx, idx)]
    s_e = edge_similarity(
        e_t, vgraph.active_edges(), exclude_diagonal=config.exclude_diagonal
    )

    scores = []
    for t in temperatures:
        s_n = node_similarity(visual, textual, pseudo, t=t)
        scores.append(
            VegaScore(
                s_n=s_n,
                s_e=s_e,
                s=s_n + s_e,
                active_classes=int(idx.size),
                config=replace(config, t=t),
            )
        )
    return scores
