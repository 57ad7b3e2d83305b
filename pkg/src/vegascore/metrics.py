"""Zoo-level ranking-quality metrics.

Ties are handled deterministically everywhere: top-k selection and
argmax prefer the lower index, and the rank correlation is the tau-a
form with sign(0) = 0 (ties shrink |tau|; this is not the tau-b most
libraries report).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class RankingMetrics:
    r5: float
    tau5: float
    tau: float
    top1_acc: float
    oracle: float

    def as_dict(self) -> dict:
        return {
            "r5": self.r5,
            "tau5": self.tau5,
            "tau": self.tau,
            "top1_acc": self.top1_acc,
            "oracle": self.oracle,
        }


def _as_vectors(acc, scores, min_len: int) -> tuple[np.ndarray, np.ndarray]:
    acc = np.asarray(acc, dtype=np.float64)
    scores = np.asarray(scores, dtype=np.float64)
    if acc.shape != scores.shape or acc.ndim != 1:
        raise ValueError(f"paired 1-D inputs required, got {acc.shape}, {scores.shape}")
    if acc.shape[0] < min_len:
        raise ValueError(f"need at least {min_len} models, got {acc.shape[0]}")
    return acc, scores


def _top5_indices(values: np.ndarray) -> set[int]:
    # stable sort on negated values => ties broken by lower index
    return set(np.argsort(-values, kind="stable")[:5].tolist())


def top5_recall(acc, scores) -> float:
    """Overlap between the five best-by-accuracy and five best-by-score."""
    acc, scores = _as_vectors(acc, scores, 5)
    return len(_top5_indices(acc) & _top5_indices(scores)) / 5.0


def _tau_over(acc: np.ndarray, scores: np.ndarray, idx: np.ndarray) -> float:
    m = idx.shape[0]
    total = 0.0
    for ai in range(m - 1):
        i = idx[ai]
        j = idx[ai + 1 :]
        total += float(np.sum(np.sign(acc[i] - acc[j]) * np.sign(scores[i] - scores[j])))
    return 2.0 * total / (m * (m - 1))


def kendall_tau(acc, scores) -> float:
    """Tau-a rank correlation over all index pairs."""
    acc, scores = _as_vectors(acc, scores, 2)
    return _tau_over(acc, scores, np.arange(acc.shape[0]))


def kendall_tau_top5(acc, scores) -> float:
    """Tau-a restricted to the models both rankings place in their top 5.

    The intersection can be small; with fewer than 2 shared models the
    correlation is defined as 0.
    """
    acc, scores = _as_vectors(acc, scores, 5)
    shared = sorted(_top5_indices(acc) & _top5_indices(scores))
    if len(shared) < 2:
        return 0.0
    return _tau_over(acc, scores, np.asarray(shared))


def top1_accuracy(acc, scores) -> float:
    """Ground-truth accuracy of the single highest-scored model."""
    acc, scores = _as_vectors(acc, scores, 1)
    return float(acc[int(np.argmax(scores))])


def oracle(acc) -> float:
    """Best ground-truth accuracy in the zoo (upper bound for top-1)."""
    acc = np.asarray(acc, dtype=np.float64)
    if acc.ndim != 1 or acc.shape[0] < 1:
        raise ValueError("need at least one model")
    return float(acc.max())


def ranking_metrics(acc, scores) -> RankingMetrics:
    """All five metrics at once (requires at least 5 models)."""
    return RankingMetrics(
        r5=top5_recall(acc, scores),
        tau5=kendall_tau_top5(acc, scores),
        tau=kendall_tau(acc, scores),
        top1_acc=top1_accuracy(acc, scores),
        oracle=oracle(acc),
    )
