"""Zero-shot classification head over precomputed embeddings."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class PseudoLabels:
    """Per-image nearest-class assignments plus per-class member counts."""

    assignments: np.ndarray  # (N,) int
    counts: np.ndarray  # (K,) int

    @property
    def n_images(self) -> int:
        return self.assignments.shape[0]


def cosine_matrix(visual: np.ndarray, textual: np.ndarray) -> np.ndarray:
    """N x K cosine similarities between unit-norm rows (plain dot products)."""
    visual = np.asarray(visual, dtype=np.float64)
    textual = np.asarray(textual, dtype=np.float64)
    if visual.ndim != 2 or textual.ndim != 2 or visual.shape[1] != textual.shape[1]:
        raise ValueError(
            f"dimension mismatch: visual {visual.shape} vs textual {textual.shape}"
        )
    return visual @ textual.T


def pseudo_labels(sim: np.ndarray) -> PseudoLabels:
    """Row-wise argmax assignment; ties go to the lowest class index."""
    sim = np.asarray(sim)
    assignments = np.argmax(sim, axis=1)
    counts = np.bincount(assignments, minlength=sim.shape[1])
    return PseudoLabels(assignments=assignments, counts=counts)


def softmax_probs(sim: np.ndarray, temperature: float = 1.0) -> np.ndarray:
    """Row-wise temperature softmax with max-subtraction for stability."""
    if temperature <= 0:
        raise ValueError(f"temperature must be positive, got {temperature}")
    z = np.asarray(sim, dtype=np.float64) / temperature
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def zero_shot_accuracy(pseudo: PseudoLabels, labels: np.ndarray) -> float:
    """Fraction of images whose nearest class matches the ground-truth label."""
    labels = np.asarray(labels)
    if labels.shape != pseudo.assignments.shape:
        raise ValueError(
            f"labels shape {labels.shape} != assignments {pseudo.assignments.shape}"
        )
    return float(np.mean(pseudo.assignments == labels))
