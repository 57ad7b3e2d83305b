"""Encoder backends: anything that maps PIL images and strings to
feature vectors. Embeddings are returned raw (no normalization); the
scoring engine normalizes on its side."""

from __future__ import annotations

import hashlib
from typing import Protocol

import numpy as np
from PIL import Image


class EncoderBackend(Protocol):
    name: str

    def embed_images(self, images: list[Image.Image]) -> np.ndarray: ...

    def embed_texts(self, texts: list[str]) -> np.ndarray: ...


class BackendError(Exception):
    pass


class HFClipBackend:
    """CLIP-style dual encoder loaded from the HuggingFace hub.

    Imports torch/transformers lazily so the package works without the
    heavy extras installed. Inference runs in eval mode under no_grad,
    which keeps repeated runs byte-identical on the same machine.
    """

    name = "hf-clip"

    def __init__(self, checkpoint: str, device: str = "cpu"):
        try:
            import torch
            from transformers import AutoProcessor, CLIPModel
        except ImportError as exc:
            raise BackendError(
                "hf-clip backend needs torch and transformers "
                "(pip install 'vlm-bundle-exporter[clip]')"
            ) from exc
        self._torch = torch
        try:
            self.model = CLIPModel.from_pretrained(checkpoint).to(device).eval()
            self.processor = AutoProcessor.from_pretrained(checkpoint)
        except Exception as exc:
            raise BackendError(f"cannot resolve checkpoint {checkpoint!r}: {exc}") from exc
        self.device = device

    def embed_images(self, images):
        inputs = self.processor(images=images, return_tensors="pt").to(self.device)
        with self._torch.no_grad():
            feats = self.model.get_image_features(**inputs)
        return feats.cpu().numpy().astype(np.float32)

    def embed_texts(self, texts):
        inputs = self.processor(
            text=texts, return_tensors="pt", padding=True, truncation=True
        ).to(self.device)
        with self._torch.no_grad():
            feats = self.model.get_text_features(**inputs)
        return feats.cpu().numpy().astype(np.float32)


class StubBackend:
    """Deterministic checkpoint-free encoder for tests and dry runs.

    Images map to a fixed random projection of their 8x8 grayscale
    thumbnail (so rotations produce distinct, consistent vectors);
    texts map to a vector seeded by their SHA-256. Same inputs, same
    bytes, on any machine.
    """

    name = "stub"

    def __init__(self, checkpoint: str = "stub", dim: int = 32):
        self.dim = dim
        rng = np.random.default_rng(0)
        self._projection = rng.standard_normal((64, dim)).astype(np.float32)

    def embed_images(self, images):
        rows = []
        for img in images:
            thumb = img.convert("L").resize((8, 8), Image.NEAREST)
            pixels = np.asarray(thumb, dtype=np.float32).reshape(64) / 255.0
            rows.append(pixels @ self._projection)
        return np.stack(rows).astype(np.float32)

    def embed_texts(self, texts):
        rows = []
        for text in texts:
            digest = hashlib.sha256(text.encode("utf-8")).digest()
            seed = int.from_bytes(digest[:8], "little")
            rows.append(
                np.random.default_rng(seed).standard_normal(self.dim).astype(np.float32)
            )
        return np.stack(rows)


BACKENDS = {
    "hf-clip": HFClipBackend,
    "stub": StubBackend,
}


def make_backend(name: str, checkpoint: str) -> EncoderBackend:
    if name not in BACKENDS:
        raise BackendError(f"unknown backend {name!r}; available: {', '.join(BACKENDS)}")
    return BACKENDS[name](checkpoint)
