"""Export orchestration: decode images, run the encoder in batches,
assemble tensors, write the bundle, and hand it to the scoring engine's
validator."""

from __future__ import annotations

import logging
import shutil
import subprocess

import numpy as np
from PIL import Image

from .backends import EncoderBackend
from .job import ROTATION_ANGLES, ROTATION_TEMPLATE, ExportJob
from .writer import write_bundle_dir

log = logging.getLogger("vlmexport")

_ROTATE_OPS = {
    90: Image.Transpose.ROTATE_90,
    180: Image.Transpose.ROTATE_180,
    270: Image.Transpose.ROTATE_270,
}


class ExportError(Exception):
    pass


def _load_images(job: ExportJob) -> tuple[list[Image.Image], list[int] | None, list[str]]:
    """Decode every image up front; broken files are skipped and logged."""
    images, labels, skipped = [], [], []
    for i, path in enumerate(job.images):
        try:
            with Image.open(path) as img:
                images.append(img.convert("RGB"))
        except (OSError, Image.DecompressionBombError) as exc:
            log.warning("skipping undecodable image %s: %s", path, exc)
            skipped.append(str(path))
            continue
        if job.labels is not None:
            labels.append(job.labels[i])
    if not images:
        raise ExportError("every image failed to decode")
    return images, (labels if job.labels is not None else None), skipped


def _batched(backend: EncoderBackend, images: list[Image.Image], batch_size: int):
    parts = [
        backend.embed_images(images[i : i + batch_size])
        for i in range(0, len(images), batch_size)
    ]
    return np.concatenate(parts, axis=0)


def _rotated_rows(backend, images, batch_size):
    """Rows blocked per image: i*4 + r is image i at the r-th angle."""
    rotated = []
    for img in images:
        rotated.append(img)
        for angle in ROTATION_ANGLES[1:]:
            rotated.append(img.transpose(_ROTATE_OPS[angle]))
    return _batched(backend, rotated, batch_size)


def export(job: ExportJob, backend: EncoderBackend) -> dict:
    """Run one export job; returns a small summary dict.

    Tensors land raw (unnormalized). textual_templates is P x K x D over
    the job's prompt templates; labels are written when the dataset
    supplied them (filtered to successfully decoded images).
    """
    job.validate()
    images, labels, skipped = _load_images(job)
    n, k, p = len(images), len(job.class_names), len(job.templates)

    visual = _batched(backend, images, job.batch_size)
    d = visual.shape[1]

    per_template = []
    for template in job.templates:
        prompts = [template.format(name) for name in job.class_names]
        per_template.append(backend.embed_texts(prompts))
    textual_templates = np.stack(per_template)  # P x K x D

    tensors = {"visual": visual, "textual_templates": textual_templates}
    if labels is not None:
        tensors["labels"] = np.asarray(labels, dtype=np.int32)
    if job.include_rotations:
        tensors["rot_visual"] = _rotated_rows(backend, images, job.batch_size)
        rot_prompts = [ROTATION_TEMPLATE.format(angle) for angle in ROTATION_ANGLES]
        tensors["rot_textual"] = backend.embed_texts(rot_prompts)

    write_bundle_dir(
        job.output,
        model_id=job.model,
        dataset_id=job.dataset_id,
        class_names=job.class_names,
        tensors=tensors,
        export_info={
            "backend": backend.name,
            "requested_images": len(job.images),
            "effective_images": n,
            "skipped": skipped,
            "templates": job.templates,
            "rotation_template": ROTATION_TEMPLATE,
        },
    )
    return {
        "output": str(job.output),
        "images": n,
        "skipped": len(skipped),
        "classes": k,
        "templates": p,
        "dim": d,
        "rotations": job.include_rotations,
    }


def validate_with_engine(bundle_dir, validate_cmd: str = "vega validate") -> None:
    """Run the scoring engine's validator CLI over the written bundle.

    The engine is a separate install; this talks to it strictly through
    its command-line interface.
    """
    argv = validate_cmd.split() + [str(bundle_dir)]
    if shutil.which(argv[0]) is None:
        raise ExportError(
            f"validator {argv[0]!r} not found on PATH; install the scoring "
            "engine or pass --no-validate"
        )
    proc = subprocess.run(argv, capture_output=True, text=True)
    if proc.returncode != 0:
        raise ExportError(
            f"bundle failed engine validation:\n{proc.stdout}{proc.stderr}"
        )
