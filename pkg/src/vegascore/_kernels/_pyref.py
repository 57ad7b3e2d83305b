"""Pure-numpy reference kernels (fallback when the extension is absent).

Semantics here are the contract; the compiled kernels must agree with
these to floating-point noise. Both paths compute each symmetric entry
once and mirror it, so symmetry is exact.
"""

from __future__ import annotations

import numpy as np


def bhattacharyya_diag_matrix(means: np.ndarray, variances: np.ndarray) -> np.ndarray:
    """Pairwise Bhattacharyya distances between diagonal Gaussians.

    means, variances: (K, D) with every variance > 0. Returns (K, K)
    with zero diagonal. Entry (i, j) is

        (1/8) * sum_d (mu_i - mu_j)^2 / vbar
      + (1/2) * sum_d [ log vbar - (log v_i + log v_j) / 2 ],

    with vbar = (v_i + v_j) / 2 per dimension.
    """
    means = np.ascontiguousarray(means, dtype=np.float64)
    variances = np.ascontiguousarray(variances, dtype=np.float64)
    k = means.shape[0]
    logv_sums = np.sum(np.log(variances), axis=1)
    out = np.zeros((k, k), dtype=np.float64)
    for i in range(k - 1):
        diff = means[i + 1 :] - means[i]
        vbar = 0.5 * (variances[i + 1 :] + variances[i])
        term1 = 0.125 * np.sum(diff * diff / vbar, axis=1)
        term2 = 0.5 * (
            np.sum(np.log(vbar), axis=1) - 0.5 * (logv_sums[i + 1 :] + logv_sums[i])
        )
        out[i, i + 1 :] = term1 + term2
        out[i + 1 :, i] = out[i, i + 1 :]
    return out


def neighbor_entropy_mean(feats: np.ndarray, tau: float, block: int = 256) -> float:
    """Mean entropy of each row's softmax-over-neighbors distribution.

    feats: (N, D) unit-norm rows, N >= 2. For row i the distribution is
    softmax over cos(i, j)/tau for j != i; returns (1/N) * sum_i H_i.
    Row blocks keep peak memory at block x N.
    """
    feats = np.ascontiguousarray(feats, dtype=np.float64)
    n = feats.shape[0]
    total = 0.0
    for start in range(0, n, block):
        stop = min(start + block, n)
        sims = feats[start:stop] @ feats.T
        sims /= tau
        rows = np.arange(start, stop)
        sims[np.arange(stop - start), rows] = -np.inf  # exclude self
        sims -= sims.max(axis=1, keepdims=True)
        e = np.exp(sims)
        denom = e.sum(axis=1, keepdims=True)
        p = e / denom
        with np.errstate(divide="ignore", invalid="ignore"):
            plogp = np.where(p > 0.0, p * np.log(p), 0.0)
        total += float(-plogp.sum())
    return total / n
