"""Synthetic embedding bundles with a controllable alignment knob.

The generative story is deliberately minimal. Class anchors are random
unit vectors sharing a common component of weight rho (rho=0 gives
independent draws, near-orthogonal in high D). An image of class y is

    normalize( alpha * anchor_y + (1 - alpha) * g + sigma * h )

with g, h fresh standard-normal vectors, so alpha=1 puts every image
exactly on its anchor and alpha=0 is pure noise. Labels follow the
generating class, except a label_noise fraction reassigned uniformly.

Randomness comes from numpy's default PCG64 generator; bundles are a
pure function of the config (bitwise reproducible within this
implementation, statistically reproducible elsewhere). Tensor values
are rounded through float32 so written bundles round-trip bit-exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .bundle import DatasetBundle, l2_normalize
from .zeroshot import cosine_matrix, pseudo_labels, zero_shot_accuracy


@dataclass(frozen=True)
class SynthConfig:
    n_classes: int = 10
    dim: int = 32
    n_images: int = 100
    alignment: float = 0.5
    intra_class_spread: float = 0.0
    anchor_correlation: float = 0.0
    label_noise: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.n_classes < 2:
            raise ValueError("need at least 2 classes")
        if self.dim < 2:
            raise ValueError("need at least 2 dimensions")
        if self.n_images < self.n_classes:
            raise ValueError("need at least one image per class (N >= K)")
        if not 0.0 <= self.alignment <= 1.0:
            raise ValueError("alignment must be in [0, 1]")
        if self.intra_class_spread < 0.0:
            raise ValueError("intra_class_spread must be non-negative")
        if not 0.0 <= self.anchor_correlation <= 1.0:
            raise ValueError("anchor_correlation must be in [0, 1]")
        if not 0.0 <= self.label_noise <= 1.0:
            raise ValueError("label_noise must be in [0, 1]")


def _f32_exact(arr: np.ndarray) -> np.ndarray:
    """Round through float32 so the values survive disk round-trips."""
    return arr.astype(np.float32).astype(np.float64)


def _draw_anchors(rng: np.random.Generator, cfg: SynthConfig) -> np.ndarray:
    shared = rng.standard_normal(cfg.dim)
    own = rng.standard_normal((cfg.n_classes, cfg.dim))
    rho = cfg.anchor_correlation
    mix = np.sqrt(rho) * shared[None, :] + np.sqrt(1.0 - rho) * own
    return l2_normalize(mix)


def _true_classes(cfg: SynthConfig) -> np.ndarray:
    # balanced round-robin assignment; every class is populated (N >= K)
    return (np.arange(cfg.n_images) % cfg.n_classes).astype(np.int32)


def _noisy_labels(
    rng: np.random.Generator, true_classes: np.ndarray, cfg: SynthConfig
) -> np.ndarray:
    labels = true_classes.copy()
    n_flip = int(round(cfg.label_noise * cfg.n_images))
    if n_flip > 0:
        which = rng.choice(cfg.n_images, size=n_flip, replace=False)
        labels[which] = rng.integers(cfg.n_classes, size=n_flip)
    return labels


def _visual_features(
    rng: np.random.Generator,
    anchors: np.ndarray,
    true_classes: np.ndarray,
    cfg: SynthConfig,
) -> np.ndarray:
    g = rng.standard_normal((cfg.n_images, cfg.dim))
    h = rng.standard_normal((cfg.n_images, cfg.dim))
    raw = (
        cfg.alignment * anchors[true_classes]
        + (1.0 - cfg.alignment) * g
        + cfg.intra_class_spread * h
    )
    return l2_normalize(raw)


def _class_names(k: int) -> list[str]:
    return [f"class_{i:03d}" for i in range(k)]


def generate_bundle(cfg: SynthConfig) -> DatasetBundle:
    """One synthetic bundle, fully determined by the config."""
    rng = np.random.default_rng(cfg.seed)
    anchors = _draw_anchors(rng, cfg)
    true_classes = _true_classes(cfg)
    labels = _noisy_labels(rng, true_classes, cfg)
    visual = _visual_features(rng, anchors, true_classes, cfg)
    return DatasetBundle(
        model_id=f"synth-seed{cfg.seed}-alpha{cfg.alignment:.3f}",
        dataset_id=f"synth-K{cfg.n_classes}-D{cfg.dim}-N{cfg.n_images}",
        class_names=_class_names(cfg.n_classes),
        visual=_f32_exact(visual),
        textual=_f32_exact(anchors),
        labels=labels,
    )


def generate_zoo(
    n_models: int,
    base: SynthConfig,
    alpha_range: tuple[float, float] = (0.1, 0.9),
) -> list[tuple[DatasetBundle, float]]:
    """A zoo of bundles sharing anchors and labels, graded by alignment.

    Alignment values are evenly spaced across alpha_range, standing in
    for models of varying quality on one dataset. Each member draws its
    visual noise from an independent spawned stream, so the zoo is
    reproducible in any generation order. Returns (bundle, accuracy)
    pairs, the accuracy being the zero-shot accuracy of that bundle
    against its labels.
    """
    if n_models < 2:
        raise ValueError("a zoo needs at least 2 models")
    lo, hi = alpha_range
    for a in (lo, hi):
        if not 0.0 <= a <= 1.0:
            raise ValueError(f"alpha_range values must be in [0, 1], got {a}")

    root = np.random.SeedSequence(base.seed)
    shared_ss, *member_ss = root.spawn(n_models + 1)
    shared_rng = np.random.default_rng(shared_ss)
    anchors = _draw_anchors(shared_rng, base)
    true_classes = _true_classes(base)
    labels = _noisy_labels(shared_rng, true_classes, base)
    textual = _f32_exact(anchors)

    alphas = np.linspace(lo, hi, n_models)
    zoo = []
    for i in range(n_models):
        cfg_i = replace(base, alignment=float(alphas[i]))
        rng_i = np.random.default_rng(member_ss[i])
        visual = _f32_exact(_visual_features(rng_i, anchors, true_classes, cfg_i))
        bundle = DatasetBundle(
            model_id=f"synth-{i:03d}-alpha{alphas[i]:.3f}",
            dataset_id=f"synth-K{base.n_classes}-D{base.dim}-N{base.n_images}",
            class_names=_class_names(base.n_classes),
            visual=visual,
            textual=textual,
            labels=labels,
        )
        sim = cosine_matrix(l2_normalize(visual), l2_normalize(textual))
        acc = zero_shot_accuracy(pseudo_labels(sim), labels)
        zoo.append((bundle, acc))
    return zoo
