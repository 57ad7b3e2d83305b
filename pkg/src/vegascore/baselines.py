"""Training-free comparison scores: entropy, confidence, rotation
prediction, soft neighborhood density, and dispersion.

All probability-based baselines use a plain temperature-1 softmax over
cosine similarities (the sharpened t=0.05 head belongs to the
graph-alignment score only). Entropy is reported raw (mean per-image
Shannon entropy, natural log) alongside its negation, which is the
value to rank by: lower entropy predicts higher accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import neighbor_entropy_mean
from .zeroshot import cosine_matrix

# Raw neighborhood density tends to rank models inversely in this
# setting; consumers ranking by it should expect negative correlation.
SND_ANTICORRELATED = True

SND_DEFAULT_TAU = 0.05


@dataclass
class BaselineScores:
    ent_raw: float
    ent_score: float
    conf: float
    snd: float
    ds: float
    rot: float | None = None


def baseline_scores(
    visual: np.ndarray,
    probs: np.ndarray,
    n_classes: int,
    snd_tau: float = SND_DEFAULT_TAU,
    ds_seed: int = 0,
    rot_visual: np.ndarray | None = None,
    rot_textual: np.ndarray | None = None,
) -> BaselineScores:
    """All training-free baselines for one bundle.

    `probs` must be the temperature-1 softmax rows over the cosine
    similarities; `rot` is filled exactly when rotation tensors are
    given.
    """
    ent_raw, ent_score = entropy_score(probs)
    return BaselineScores(
        ent_raw=ent_raw,
        ent_score=ent_score,
        conf=confidence_score(probs),
        snd=snd_score(visual, tau=snd_tau),
        ds=dispersion_score(visual, k=n_classes, seed=ds_seed),
        rot=(
            rotation_score(rot_visual, rot_textual)
            if rot_visual is not None
            else None
        ),
    )


def entropy_score(probs: np.ndarray) -> tuple[float, float]:
    """(raw mean entropy, negated ranking score) of the probability rows."""
    probs = np.asarray(probs, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        plogp = np.where(probs > 0.0, probs * np.log(probs), 0.0)
    raw = float(-plogp.sum(axis=1).mean())
    return raw, -raw


def confidence_score(probs: np.ndarray) -> float:
    """Mean of the per-image maximum probability."""
    probs = np.asarray(probs, dtype=np.float64)
    return float(probs.max(axis=1).mean())


def rotation_score(rot_visual: np.ndarray, rot_textual: np.ndarray) -> float:
    """Accuracy of 4-way rotation-angle prediction.

    Row block i*4 + r of rot_visual is image i rotated by the r-th angle
    (0/90/180/270 degrees); rot_textual holds the 4 angle-prompt
    embeddings in the same order.
    """
    rot_visual = np.asarray(rot_visual, dtype=np.float64)
    rot_textual = np.asarray(rot_textual, dtype=np.float64)
    if rot_textual.shape[0] != 4 or rot_visual.shape[0] % 4 != 0:
        raise ValueError(
            f"expected 4N x D visual and 4 x D prompts, got "
            f"{rot_visual.shape} and {rot_textual.shape}"
        )
    pred = np.argmax(cosine_matrix(rot_visual, rot_textual), axis=1)
    truth = np.arange(rot_visual.shape[0]) % 4
    return float(np.mean(pred == truth))


def snd_score(visual: np.ndarray, tau: float = SND_DEFAULT_TAU) -> float:
    """Soft neighborhood density of the visual embedding space.

    Each image's neighbor distribution is a temperature-tau softmax of
    its cosine similarity to every other image (self excluded); the
    score is the mean entropy of those distributions.
    """
    visual = np.asarray(visual, dtype=np.float64)
    if visual.shape[0] < 2:
        raise ValueError("neighborhood density needs at least 2 images")
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")
    return float(neighbor_entropy_mean(visual, tau))


def kmeans(
    features: np.ndarray, k: int, seed: int = 0, max_iters: int = 100
) -> tuple[np.ndarray, np.ndarray]:
    """Lloyd's algorithm with seeded kmeans++ initialization.

    Runs until the assignment reaches a fixpoint or max_iters. Empty
    clusters are re-seeded to the point farthest from its own center.
    Deterministic for a fixed seed. Returns (assignments, centers) with
    centers consistent with the returned assignment.
    """
    features = np.asarray(features, dtype=np.float64)
    n = features.shape[0]
    if k > n:
        raise ValueError(f"k={k} exceeds number of points {n}")
    rng = np.random.default_rng(seed)
    centers = _kmeanspp_init(features, k, rng)

    assignments = None
    for _ in range(max_iters):
        dist2 = _sq_dists(features, centers)
        new_assignments = np.argmin(dist2, axis=1)
        if assignments is not None and np.array_equal(new_assignments, assignments):
            break
        assignments = new_assignments
        for cls in range(k):
            members = features[assignments == cls]
            if members.shape[0] > 0:
                centers[cls] = members.mean(axis=0)
            else:
                own = dist2[np.arange(n), assignments]
                centers[cls] = features[int(np.argmax(own))]
    return assignments, centers


def _sq_dists(x: np.ndarray, centers: np.ndarray) -> np.ndarray:
    # ||x - c||^2 via expansion; clip tiny negatives from cancellation
    d2 = (
        np.sum(x * x, axis=1)[:, None]
        - 2.0 * (x @ centers.T)
        + np.sum(centers * centers, axis=1)[None, :]
    )
    return np.maximum(d2, 0.0)


def _kmeanspp_init(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    centers = np.empty((k, x.shape[1]), dtype=np.float64)
    centers[0] = x[rng.integers(n)]
    closest = _sq_dists(x, centers[:1])[:, 0]
    for i in range(1, k):
        total = closest.sum()
        if total <= 0.0:
            # all remaining mass is on already-chosen points; any pick works
            centers[i] = x[int(np.argmax(closest))]
        else:
            centers[i] = x[rng.choice(n, p=closest / total)]
        closest = np.minimum(closest, _sq_dists(x, centers[i : i + 1])[:, 0])
    return centers


def dispersion_score(visual: np.ndarray, k: int, seed: int = 0) -> float:
    """Log of the size-weighted spread of cluster centers.

    Clusters the images into k groups (k = number of class names), then
    returns ln( sum_k n_k ||cbar - c_k||^2 / (k - 1) ) where cbar is the
    unweighted mean of the k centers. Degenerate inputs where every
    center coincides return -inf.
    """
    if k < 2:
        raise ValueError(f"dispersion needs k >= 2, got {k}")
    visual = np.asarray(visual, dtype=np.float64)
    assignments, centers = kmeans(visual, k, seed=seed)
    counts = np.bincount(assignments, minlength=k)
    center_mean = centers.mean(axis=0)
    spread = float(np.sum(counts * np.sum((centers - center_mean) ** 2, axis=1)))
    if spread <= 0.0:
        return float("-inf")
    return float(np.log(spread / (k - 1)))
