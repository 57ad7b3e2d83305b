"""Embedding bundle format: on-disk layout, loading, validation.

A bundle is a directory holding everything one model produced for one
dataset:

    <bundle>/
        manifest.json
        tensors/<name>.bin

`manifest.json` fields:
    format_version : int, must be 1
    model_id       : str
    dataset_id     : str
    class_names    : list of K strings, K >= 2
    tensors        : map name -> {file, dtype, shape, byte_order, layout}

Tensor payloads are raw little-endian, row-major. Float tensors are
32-bit IEEE-754 ("f32"), the labels tensor is 32-bit signed ints
("i32"). Required tensors: "visual" (N x D) and exactly one of
"textual" (K x D) or "textual_templates" (P x K x D). Optional:
"labels" (N), "rot_visual" (4N x D), "rot_textual" (4 x D).

In memory, float tensors are held as float64 (exact upcast from f32,
so write->load round-trips are bit-exact) and labels as int32.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

FORMAT_VERSION = 1

# Rows with norm below this are left as zeros rather than divided.
ZERO_NORM_EPS = 1e-12

_DTYPE_CODES = {"f32": np.dtype("<f4"), "i32": np.dtype("<i4")}

FLOAT_TENSORS = ("visual", "textual", "textual_templates", "rot_visual", "rot_textual")
KNOWN_TENSORS = FLOAT_TENSORS + ("labels",)


class BundleError(Exception):
    """Raised when a bundle cannot be loaded or written."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


@dataclass
class ValidationReport:
    """Collected issues from validating a bundle, on disk or in memory."""

    issues: list[tuple[str, str]] = field(default_factory=list)

    def error(self, message: str) -> None:
        self.issues.append(("error", message))

    def warning(self, message: str) -> None:
        self.issues.append(("warning", message))

    @property
    def ok(self) -> bool:
        return not any(sev == "error" for sev, _ in self.issues)

    def raise_if_failed(self) -> None:
        if not self.ok:
            errors = "; ".join(msg for sev, msg in self.issues if sev == "error")
            raise BundleError(errors, report=self)


@dataclass
class DatasetBundle:
    """One model's embeddings for one dataset.

    `visual` is N x D, `textual` K x D (or None when per-template
    features are supplied instead), `textual_templates` P x K x D.
    `labels`, `rot_visual` and `rot_textual` are optional.
    """

    model_id: str
    dataset_id: str
    class_names: list[str]
    visual: np.ndarray
    textual: np.ndarray | None = None
    textual_templates: np.ndarray | None = None
    labels: np.ndarray | None = None
    rot_visual: np.ndarray | None = None
    rot_textual: np.ndarray | None = None

    @property
    def n_images(self) -> int:
        return self.visual.shape[0]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    @property
    def dim(self) -> int:
        return self.visual.shape[1]

    def validate(self) -> ValidationReport:
        """Check the in-memory invariants; never raises."""
        report = ValidationReport()
        k = self.n_classes
        if k < 2:
            report.error(f"bundle needs at least 2 classes, got {k}")
        if self.visual.ndim != 2:
            report.error(f"visual must be 2-D, got shape {self.visual.shape}")
            return report
        d = self.dim
        if self.textual is None and self.textual_templates is None:
            report.error("bundle carries neither textual nor textual_templates")
        if self.textual is not None and self.textual_templates is not None:
            report.error("bundle carries both textual and textual_templates")
        if self.textual is not None:
            if self.textual.shape != (k, d):
                report.error(
                    f"textual shape {self.textual.shape} != ({k}, {d})"
                )
        if self.textual_templates is not None:
            t = self.textual_templates
            if t.ndim != 3 or t.shape[1] != k or t.shape[2] != d or t.shape[0] < 1:
                report.error(
                    f"textual_templates shape {t.shape} incompatible with K={k}, D={d}"
                )
        if self.labels is not None:
            if self.labels.shape != (self.n_images,):
                report.error(
                    f"labels length {self.labels.shape} != image count {self.n_images}"
                )
            elif self.labels.size and (
                self.labels.min() < 0 or self.labels.max() >= k
            ):
                bad = int(np.argmax((self.labels < 0) | (self.labels >= k)))
                report.error(
                    f"labels[{bad}] = {int(self.labels[bad])} outside [0, {k})"
                )
        if (self.rot_visual is None) != (self.rot_textual is None):
            report.error("rot_visual and rot_textual must be present together")
        if self.rot_visual is not None:
            if self.rot_visual.shape != (4 * self.n_images, d):
                report.error(
                    f"rot_visual shape {self.rot_visual.shape} != "
                    f"({4 * self.n_images}, {d})"
                )
        if self.rot_textual is not None and self.rot_textual.shape != (4, d):
            report.error(f"rot_textual shape {self.rot_textual.shape} != (4, {d})")
        for name in FLOAT_TENSORS:
            arr = getattr(self, name)
            if arr is not None and not np.all(np.isfinite(arr)):
                flat = np.asarray(arr).ravel()
                bad = int(np.argmin(np.isfinite(flat)))
                report.error(f"tensor '{name}' has non-finite value at offset {bad}")
        return report


def l2_normalize(m: np.ndarray, report: ValidationReport | None = None) -> np.ndarray:
    """Normalize rows to unit Euclidean norm.

    Rows with norm below ZERO_NORM_EPS are left as zeros; if a report
    is supplied, a warning is recorded for them.
    """
    m = np.asarray(m, dtype=np.float64)
    norms = np.linalg.norm(m, axis=-1, keepdims=True)
    zero = norms < ZERO_NORM_EPS
    if np.any(zero) and report is not None:
        idx = np.argwhere(zero[..., 0]).ravel()
        report.warning(
            f"{idx.size} zero-norm row(s) left unnormalized (first at {idx[0]})"
        )
    return np.where(zero, m, m / np.where(zero, 1.0, norms))


def average_templates(
    templates: np.ndarray, report: ValidationReport | None = None
) -> np.ndarray:
    """Collapse a P x K x D per-template tensor to K x D class features.

    Arithmetic mean over templates, then row-renormalized. A class whose
    templates cancel to a zero vector stays zero and is flagged.
    """
    templates = np.asarray(templates, dtype=np.float64)
    if templates.ndim != 3 or templates.shape[0] < 1:
        raise ValueError(f"expected P x K x D tensor, got shape {templates.shape}")
    return l2_normalize(templates.mean(axis=0), report=report)


def _expected_shapes(n, k, d, p=None):
    shapes = {
        "visual": (n, d),
        "textual": (k, d),
        "labels": (n,),
        "rot_visual": (4 * n, d),
        "rot_textual": (4, d),
    }
    if p is not None:
        shapes["textual_templates"] = (p, k, d)
    return shapes


def validate_bundle_dir(path: str | Path) -> ValidationReport:
    """Validate a bundle directory without materializing it.

    Total: any input produces either an ok report or structured error
    issues, never an exception.
    """
    report = ValidationReport()
    try:
        _read_bundle(Path(path), report)
    except Exception as exc:  # defensive: validation must not crash
        report.error(f"unexpected failure while validating: {exc!r}")
    return report


def load_bundle(path: str | Path, normalize: bool = True) -> DatasetBundle:
    """Load and validate a bundle directory.

    With normalize=True (the default) every float tensor is row
    L2-normalized after loading, so downstream cosine similarities
    reduce to dot products. Pass normalize=False for the bit-exact raw
    payloads (the write_bundle round-trip guarantee applies to these).
    """
    report = ValidationReport()
    bundle = _read_bundle(Path(path), report)
    report.raise_if_failed()
    assert bundle is not None
    if normalize:
        bundle.visual = l2_normalize(bundle.visual, report)
        if bundle.textual is not None:
            bundle.textual = l2_normalize(bundle.textual, report)
        if bundle.textual_templates is not None:
            bundle.textual_templates = l2_normalize(bundle.textual_templates, report)
        if bundle.rot_visual is not None:
            bundle.rot_visual = l2_normalize(bundle.rot_visual, report)
            bundle.rot_textual = l2_normalize(bundle.rot_textual, report)
    return bundle


def _read_bundle(root: Path, report: ValidationReport) -> DatasetBundle | None:
    manifest_path = root / "manifest.json"
    if not manifest_path.is_file():
        report.error(f"missing manifest: {manifest_path}")
        return None
    try:
        manifest = json.loads(manifest_path.read_text())
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        report.error(f"manifest is not valid JSON: {exc}")
        return None
    if not isinstance(manifest, dict):
        report.error("manifest root must be a JSON object")
        return None

    version = manifest.get("format_version")
    if version != FORMAT_VERSION:
        report.error(f"unknown format_version {version!r} (supported: {FORMAT_VERSION})")
        return None

    for key in ("model_id", "dataset_id"):
        if not isinstance(manifest.get(key), str):
            report.error(f"manifest field '{key}' must be a string")
    class_names = manifest.get("class_names")
    if not isinstance(class_names, list) or not all(
        isinstance(c, str) for c in class_names
    ):
        report.error("manifest field 'class_names' must be a list of strings")
        return None
    if len(class_names) < 2:
        report.error(f"need at least 2 classes, got {len(class_names)}")

    tensors = manifest.get("tensors")
    if not isinstance(tensors, dict):
        report.error("manifest field 'tensors' must be an object")
        return None
    unknown = sorted(set(tensors) - set(KNOWN_TENSORS))
    if unknown:
        report.error(f"unknown tensor name(s): {', '.join(unknown)}")
    if "visual" not in tensors:
        report.error("required tensor 'visual' is missing")
    has_textual = "textual" in tensors
    has_templates = "textual_templates" in tensors
    if has_textual == has_templates:
        report.error("exactly one of 'textual' or 'textual_templates' is required")
    if ("rot_visual" in tensors) != ("rot_textual" in tensors):
        report.error("rot_visual and rot_textual must be declared together")
    if not report.ok:
        return None

    arrays: dict[str, np.ndarray] = {}
    for name, entry in tensors.items():
        arr = _read_tensor(root, name, entry, report)
        if arr is None:
            return None
        arrays[name] = arr

    k = len(class_names)
    visual = arrays["visual"]
    if visual.ndim != 2:
        report.error(f"tensor 'visual' must be rank 2, got shape {visual.shape}")
        return None
    n, d = visual.shape
    p = arrays["textual_templates"].shape[0] if has_templates else None
    expected = _expected_shapes(n, k, d, p)
    for name, arr in arrays.items():
        want = expected[name]
        if arr.shape != want:
            report.error(f"tensor '{name}' shape {arr.shape} != expected {want}")
    if not report.ok:
        return None

    bundle = DatasetBundle(
        model_id=manifest["model_id"],
        dataset_id=manifest["dataset_id"],
        class_names=list(class_names),
        visual=visual.astype(np.float64),
        textual=arrays["textual"].astype(np.float64) if has_textual else None,
        textual_templates=(
            arrays["textual_templates"].astype(np.float64) if has_templates else None
        ),
        labels=arrays.get("labels"),
        rot_visual=(
            arrays["rot_visual"].astype(np.float64) if "rot_visual" in arrays else None
        ),
        rot_textual=(
            arrays["rot_textual"].astype(np.float64)
            if "rot_textual" in arrays
            else None
        ),
    )
    inner = bundle.validate()
    report.issues.extend(inner.issues)
    return bundle if report.ok else None


def _read_tensor(root, name, entry, report) -> np.ndarray | None:
    if not isinstance(entry, dict):
        report.error(f"tensor '{name}' manifest entry must be an object")
        return None
    dtype_code = entry.get("dtype")
    want_code = "i32" if name == "labels" else "f32"
    if dtype_code != want_code:
        report.error(f"tensor '{name}' dtype {dtype_code!r} != required '{want_code}'")
        return None
    if entry.get("byte_order", "little") != "little":
        report.error(f"tensor '{name}' byte_order must be 'little'")
        return None
    if entry.get("layout", "row-major") != "row-major":
        report.error(f"tensor '{name}' layout must be 'row-major'")
        return None
    shape = entry.get("shape")
    if (
        not isinstance(shape, list)
        or not shape
        or not all(isinstance(s, int) and s >= 0 for s in shape)
    ):
        report.error(f"tensor '{name}' shape {shape!r} is not a list of sizes")
        return None
    rel = entry.get("file")
    if not isinstance(rel, str):
        report.error(f"tensor '{name}' missing 'file' field")
        return None
    file_path = root / rel
    if not file_path.is_file():
        report.error(f"tensor '{name}': missing file {file_path}")
        return None
    dtype = _DTYPE_CODES[dtype_code]
    data = file_path.read_bytes()
    expected_bytes = math.prod(shape) * dtype.itemsize
    if len(data) != expected_bytes:
        report.error(
            f"tensor '{name}': file holds {len(data)} bytes, "
            f"shape {shape} requires {expected_bytes}"
        )
        return None
    arr = np.frombuffer(data, dtype=dtype).reshape(shape)
    if dtype_code == "f32" and not np.all(np.isfinite(arr)):
        bad = int(np.argmin(np.isfinite(arr.ravel())))
        report.error(f"tensor '{name}': non-finite value at offset {bad}")
        return None
    return arr


def write_bundle(bundle: DatasetBundle, path: str | Path) -> None:
    """Write a bundle directory; rejects bundles violating invariants.

    Float tensors are cast to f32 on disk; loading with normalize=False
    recovers them bit-exactly when the in-memory values are
    f32-representable (always true for loaded or synthesized bundles).
    """
    bundle.validate().raise_if_failed()
    root = Path(path)
    tensor_dir = root / "tensors"
    try:
        tensor_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise BundleError(f"cannot create bundle directory {root}: {exc}") from exc

    entries = {}

    def emit(name: str, arr: np.ndarray, code: str) -> None:
        payload = np.ascontiguousarray(arr, dtype=_DTYPE_CODES[code])
        rel = f"tensors/{name}.bin"
        (root / rel).write_bytes(payload.tobytes())
        entries[name] = {
            "file": rel,
            "dtype": code,
            "shape": list(arr.shape),
            "byte_order": "little",
            "layout": "row-major",
        }

    emit("visual", bundle.visual, "f32")
    if bundle.textual is not None:
        emit("textual", bundle.textual, "f32")
    if bundle.textual_templates is not None:
        emit("textual_templates", bundle.textual_templates, "f32")
    if bundle.labels is not None:
        emit("labels", np.asarray(bundle.labels), "i32")
    if bundle.rot_visual is not None:
        emit("rot_visual", bundle.rot_visual, "f32")
        emit("rot_textual", bundle.rot_textual, "f32")

    manifest = {
        "format_version": FORMAT_VERSION,
        "model_id": bundle.model_id,
        "dataset_id": bundle.dataset_id,
        "class_names": list(bundle.class_names),
        "tensors": entries,
    }
    (root / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
