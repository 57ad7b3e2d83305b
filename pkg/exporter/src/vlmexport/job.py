"""Export job description and dataset discovery."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

DEFAULT_TEMPLATES = [
    "a photo of a {}.",
    "a photo of the {}.",
    "a blurry photo of a {}.",
    "a low resolution photo of a {}.",
    "a cropped photo of a {}.",
    "a bright photo of a {}.",
    "an image of a {}.",
]

ROTATION_TEMPLATE = "An image rotated by {} degrees"
ROTATION_ANGLES = (0, 90, 180, 270)

IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp", ".gif", ".webp"}


class JobError(Exception):
    """Bad job file or dataset layout."""


@dataclass
class ExportJob:
    model: str
    dataset_id: str
    images: list[Path]
    class_names: list[str]
    labels: list[int] | None  # parallel to images when the dataset supplies them
    output: Path
    templates: list[str] = field(default_factory=lambda: list(DEFAULT_TEMPLATES))
    include_rotations: bool = False
    batch_size: int = 16
    backend: str = "hf-clip"

    def validate(self) -> None:
        if not self.templates:
            raise JobError("at least one prompt template is required")
        if len(set(self.class_names)) != len(self.class_names):
            raise JobError("class names must be unique")
        if len(self.class_names) < 2:
            raise JobError("need at least 2 classes")
        if not self.images:
            raise JobError("no images to export")
        if self.labels is not None and len(self.labels) != len(self.images):
            raise JobError("labels must parallel the image list")
        if self.batch_size < 1:
            raise JobError("batch_size must be positive")
        for template in self.templates:
            if "{}" not in template:
                raise JobError(f"template {template!r} has no {{}} placeholder")


def scan_imagefolder(root: Path) -> tuple[list[str], list[Path], list[int]]:
    """Standard one-subdirectory-per-class layout.

    Class names are the sorted subdirectory names; labels follow
    membership. File order inside a class is sorted for determinism.
    """
    if not root.is_dir():
        raise JobError(f"dataset directory {root} does not exist")
    class_dirs = sorted(p for p in root.iterdir() if p.is_dir())
    if len(class_dirs) < 2:
        raise JobError(f"imagefolder {root} needs >= 2 class subdirectories")
    class_names, images, labels = [], [], []
    for idx, sub in enumerate(class_dirs):
        class_names.append(sub.name)
        files = sorted(
            p for p in sub.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES
        )
        images.extend(files)
        labels.extend([idx] * len(files))
    if not images:
        raise JobError(f"imagefolder {root} holds no image files")
    return class_names, images, labels


def load_job(path: str | Path) -> ExportJob:
    """Parse a job JSON file.

    The dataset comes either from `dataset_dir` (imagefolder layout,
    labels derived from membership) or from an explicit `images` list
    plus `class_names` (no labels unless `labels` is given).
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise JobError(f"cannot read job file {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise JobError("job file must hold a JSON object")
    known = {
        "model",
        "dataset_id",
        "dataset_dir",
        "images",
        "class_names",
        "labels",
        "templates",
        "include_rotations",
        "output",
        "batch_size",
        "backend",
    }
    unknown = sorted(set(raw) - known)
    if unknown:
        raise JobError(f"unknown job key(s): {', '.join(unknown)}")
    for key in ("model", "dataset_id", "output"):
        if not isinstance(raw.get(key), str):
            raise JobError(f"job field {key!r} must be a string")

    base = path.parent

    def resolve(p: str) -> Path:
        q = Path(p)
        return q if q.is_absolute() else base / q

    if "dataset_dir" in raw:
        if "images" in raw or "class_names" in raw:
            raise JobError("give either dataset_dir or images/class_names, not both")
        class_names, images, labels = scan_imagefolder(resolve(raw["dataset_dir"]))
    else:
        if not isinstance(raw.get("images"), list) or not isinstance(
            raw.get("class_names"), list
        ):
            raise JobError("without dataset_dir, 'images' and 'class_names' are required")
        images = [resolve(p) for p in raw["images"]]
        class_names = list(raw["class_names"])
        labels = raw.get("labels")

    job = ExportJob(
        model=raw["model"],
        dataset_id=raw["dataset_id"],
        images=images,
        class_names=class_names,
        labels=labels,
        output=resolve(raw["output"]),
        templates=list(raw.get("templates", DEFAULT_TEMPLATES)),
        include_rotations=bool(raw.get("include_rotations", False)),
        batch_size=int(raw.get("batch_size", 16)),
        backend=str(raw.get("backend", "hf-clip")),
    )
    job.validate()
    return job
