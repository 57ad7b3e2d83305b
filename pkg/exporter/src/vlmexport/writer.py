"""Bundle directory writer.

Implements the scoring engine's on-disk contract directly (this package
deliberately does not import the engine): a manifest.json plus raw
little-endian row-major tensors, f32 for floats and i32 for labels.
Extra manifest keys are permitted by the format, so export provenance
is recorded under "export_info".
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

FORMAT_VERSION = 1


def write_bundle_dir(
    out: Path,
    model_id: str,
    dataset_id: str,
    class_names: list[str],
    tensors: dict[str, np.ndarray],
    export_info: dict | None = None,
) -> None:
    """Write one bundle. `tensors` maps tensor names to arrays; labels
    are stored i32, everything else f32."""
    tensor_dir = out / "tensors"
    tensor_dir.mkdir(parents=True, exist_ok=True)
    entries = {}
    for name, arr in tensors.items():
        dtype = "<i4" if name == "labels" else "<f4"
        payload = np.ascontiguousarray(arr, dtype=dtype)
        rel = f"tensors/{name}.bin"
        (out / rel).write_bytes(payload.tobytes())
        entries[name] = {
            "file": rel,
            "dtype": "i32" if name == "labels" else "f32",
            "shape": list(arr.shape),
            "byte_order": "little",
            "layout": "row-major",
        }
    manifest = {
        "format_version": FORMAT_VERSION,
        "model_id": model_id,
        "dataset_id": dataset_id,
        "class_names": list(class_names),
        "tensors": entries,
    }
    if export_info is not None:
        manifest["export_info"] = export_info
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
