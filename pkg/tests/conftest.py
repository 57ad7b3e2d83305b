import numpy as np
import pytest

from vegascore.bundle import DatasetBundle


def f32(arr):
    """Round values through float32 so disk round-trips are bit-exact."""
    return np.asarray(arr, dtype=np.float32).astype(np.float64)


def random_bundle(
    rng,
    n_classes=4,
    dim=8,
    n_images=20,
    with_labels=True,
    with_rot=False,
    with_templates=False,
):
    """A structurally valid bundle with random unit-ish rows."""
    visual = f32(rng.standard_normal((n_images, dim)))
    labels = rng.integers(n_classes, size=n_images).astype(np.int32)
    kwargs = {}
    if with_templates:
        kwargs["textual_templates"] = f32(rng.standard_normal((3, n_classes, dim)))
    else:
        kwargs["textual"] = f32(rng.standard_normal((n_classes, dim)))
    if with_rot:
        kwargs["rot_visual"] = f32(rng.standard_normal((4 * n_images, dim)))
        kwargs["rot_textual"] = f32(rng.standard_normal((4, dim)))
    return DatasetBundle(
        model_id="model-under-test",
        dataset_id="toy",
        class_names=[f"c{i}" for i in range(n_classes)],
        visual=visual,
        labels=labels if with_labels else None,
        **kwargs,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(42)
