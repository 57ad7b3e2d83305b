"""Class-structure graphs over a shared embedding space.

The textual graph has one node per class name (its embedding) and
cosine edges. The visual graph fits one Gaussian per pseudo-labeled
image cluster and connects them with Bhattacharyya distances

    Bh(i, j) = (1/8) (mu_i - mu_j)^T S^-1 (mu_i - mu_j)
             + (1/2) ln( |S| / sqrt(|S_i| |S_j|) ),   S = (S_i + S_j)/2.

Empirical covariances are biased (divide by the cluster size) and can
be singular when clusters are small relative to D, so a scaled-identity
ridge is always added:

    S <- S + (shrinkage * trace(S)/D + COV_FLOOR) * I

which also gives singleton clusters the well-defined COV_FLOOR * I.
`diag` mode keeps only the per-dimension variances (same ridge) and is
the default: full K x K pairwise solves at D ~ 1000 are cubically
expensive and no more stable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import bhattacharyya_diag_matrix
from .zeroshot import PseudoLabels

COV_FLOOR = 1e-6

COV_MODES = ("diag", "full")
EDGE_TRANSFORMS = ("bh_coefficient", "bh_distance")


@dataclass
class TextualGraph:
    nodes: np.ndarray  # (K, D) class-name embeddings
    edges: np.ndarray  # (K, K) cosine similarities


@dataclass
class ClassGaussian:
    """Gaussian fit to one pseudo-label cluster; covariance is a (D, D)
    matrix in full mode or a (D,) variance vector in diag mode."""

    mean: np.ndarray
    covariance: np.ndarray
    count: int
    cov_mode: str

    @property
    def active(self) -> bool:
        return self.count > 0


@dataclass
class VisualGraph:
    gaussians: list[ClassGaussian]
    edges: np.ndarray  # (K, K); NaN on rows/cols of inactive classes
    active_mask: np.ndarray  # (K,) bool

    def active_edges(self) -> np.ndarray:
        """Edge submatrix restricted to active classes."""
        idx = np.flatnonzero(self.active_mask)
        return self.edges[np.ix_(idx, idx)]


def build_textual_graph(textual: np.ndarray) -> TextualGraph:
    """Fully connected graph over class-name embeddings, cosine edges."""
    nodes = np.asarray(textual, dtype=np.float64)
    return TextualGraph(nodes=nodes, edges=nodes @ nodes.T)


def cluster_stats(
    visual: np.ndarray,
    pseudo: PseudoLabels,
    cov_mode: str = "diag",
    shrinkage: float = 1e-2,
) -> list[ClassGaussian]:
    """Fit one Gaussian per pseudo-label cluster.

    Empty clusters come back with count 0 (inactive) and are excluded
    from edge construction downstream.
    """
    if cov_mode not in COV_MODES:
        raise ValueError(f"cov_mode must be one of {COV_MODES}, got {cov_mode!r}")
    visual = np.asarray(visual, dtype=np.float64)
    d = visual.shape[1]
    k = pseudo.counts.shape[0]
    stats = []
    for cls in range(k):
        count = int(pseudo.counts[cls])
        if count == 0:
            cov_shape = (d, d) if cov_mode == "full" else (d,)
            stats.append(
                ClassGaussian(
                    mean=np.zeros(d),
                    covariance=np.zeros(cov_shape),
                    count=0,
                    cov_mode=cov_mode,
                )
            )
            continue
        members = visual[pseudo.assignments == cls]
        mean = members.mean(axis=0)
        centered = members - mean
        if cov_mode == "full":
            cov = (centered.T @ centered) / count
            ridge = shrinkage * np.trace(cov) / d + COV_FLOOR
            cov = cov + ridge * np.eye(d)
        else:
            var = np.mean(centered * centered, axis=0)
            ridge = shrinkage * var.sum() / d + COV_FLOOR
            cov = var + ridge
        stats.append(
            ClassGaussian(mean=mean, covariance=cov, count=count, cov_mode=cov_mode)
        )
    return stats


def _chol_logdet(cov: np.ndarray) -> tuple[np.ndarray, float]:
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise ValueError(
            "covariance not positive definite after shrinkage (upstream bug)"
        ) from exc
    return chol, 2.0 * float(np.sum(np.log(np.diag(chol))))


def bhattacharyya(a: ClassGaussian, b: ClassGaussian) -> float:
    """Bhattacharyya distance between two active Gaussians (same mode)."""
    if not (a.active and b.active):
        raise ValueError("both Gaussians must come from non-empty clusters")
    if a.cov_mode != b.cov_mode:
        raise ValueError(f"covariance mode mismatch: {a.cov_mode} vs {b.cov_mode}")
    diff = a.mean - b.mean
    if a.cov_mode == "diag":
        vbar = 0.5 * (a.covariance + b.covariance)
        if np.any(a.covariance <= 0) or np.any(b.covariance <= 0):
            raise ValueError("non-positive diagonal variance (upstream bug)")
        term1 = 0.125 * float(np.sum(diff * diff / vbar))
        term2 = 0.5 * float(
            np.sum(np.log(vbar) - 0.5 * (np.log(a.covariance) + np.log(b.covariance)))
        )
        return term1 + term2
    avg = 0.5 * (a.covariance + b.covariance)
    chol, logdet_avg = _chol_logdet(avg)
    _, logdet_a = _chol_logdet(a.covariance)
    _, logdet_b = _chol_logdet(b.covariance)
    y = np.linalg.solve(chol, diff)
    term1 = 0.125 * float(y @ y)
    term2 = 0.5 * (logdet_avg - 0.5 * (logdet_a + logdet_b))
    return term1 + term2


def build_visual_graph(
    stats: list[ClassGaussian], edge_transform: str = "bh_coefficient"
) -> VisualGraph:
    """Pairwise edge matrix over the active clusters.

    bh_distance stores raw distances (zero diagonal); bh_coefficient
    stores exp(-Bh), a similarity in (0, 1] with unit diagonal, which
    correlates positively with cosine edges when the modalities agree.
    """
    if edge_transform not in EDGE_TRANSFORMS:
        raise ValueError(
            f"edge_transform must be one of {EDGE_TRANSFORMS}, got {edge_transform!r}"
        )
    k = len(stats)
    active_mask = np.array([g.active for g in stats], dtype=bool)
    active = np.flatnonzero(active_mask)
    if active.size < 2:
        raise ValueError(f"need at least 2 non-empty classes, got {active.size}")

    if stats[active[0]].cov_mode == "diag":
        means = np.stack([stats[i].mean for i in active])
        variances = np.stack([stats[i].covariance for i in active])
        dist = bhattacharyya_diag_matrix(means, variances)
    else:
        dist = np.zeros((active.size, active.size))
        for ai in range(active.size - 1):
            for bj in range(ai + 1, active.size):
                v = bhattacharyya(stats[active[ai]], stats[active[bj]])
                dist[ai, bj] = v
                dist[bj, ai] = v

    sub = np.exp(-dist) if edge_transform == "bh_coefficient" else dist
    edges = np.full((k, k), np.nan)
    edges[np.ix_(active, active)] = sub
    return VisualGraph(gaussians=stats, edges=edges, active_mask=active_mask)
