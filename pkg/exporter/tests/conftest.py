import json

import numpy as np
import pytest
from PIL import Image, ImageDraw


def draw_blob(size, center, radius, fill):
    img = Image.new("RGB", (size, size), (0, 0, 0))
    d = ImageDraw.Draw(img)
    d.ellipse(
        [center[0] - radius, center[1] - radius, center[0] + radius, center[1] + radius],
        fill=fill,
    )
    return img


def draw_stripes(size, width, fill):
    img = Image.new("RGB", (size, size), (0, 0, 0))
    d = ImageDraw.Draw(img)
    for x in range(0, size, 2 * width):
        d.rectangle([x, 0, x + width - 1, size - 1], fill=fill)
    return img


@pytest.fixture
def toy_dataset(tmp_path):
    """10-image, 2-class imagefolder: blobs vs stripes, 5 images each."""
    root = tmp_path / "toyset"
    blobs = root / "blobs"
    stripes = root / "stripes"
    blobs.mkdir(parents=True)
    stripes.mkdir(parents=True)
    for i in range(5):
        draw_blob(32, (8 + 3 * i, 10 + 2 * i), 5 + i, (255, 200, 40)).save(
            blobs / f"img_{i}.png"
        )
        draw_stripes(32, 2 + i, (40, 200, 255)).save(stripes / f"img_{i}.png")
    return root


@pytest.fixture
def job_file(tmp_path, toy_dataset):
    """A ready-to-run stub-backend job over the toy dataset."""
    path = tmp_path / "job.json"
    path.write_text(
        json.dumps(
            {
                "model": "stub-checkpoint",
                "dataset_id": "toyset",
                "dataset_dir": str(toy_dataset),
                "output": str(tmp_path / "bundle"),
                "include_rotations": True,
                "backend": "stub",
                "batch_size": 4,
            }
        )
    )
    return path


def read_manifest(bundle_dir):
    return json.loads((bundle_dir / "manifest.json").read_text())


def read_tensor(bundle_dir, name):
    manifest = read_manifest(bundle_dir)
    entry = manifest["tensors"][name]
    dtype = {"f32": "<f4", "i32": "<i4"}[entry["dtype"]]
    data = (bundle_dir / entry["file"]).read_bytes()
    return np.frombuffer(data, dtype=dtype).reshape(entry["shape"])
