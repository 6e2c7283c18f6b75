"""Shared builders for small hand-constructed and randomized datasets."""

import numpy as np
import pytest

from denscope.dataset import (
    ORIGIN_DISCOVERED,
    ORIGIN_PROMPT,
    Dataset,
    Detection,
    ObjectLabel,
    SceneRecord,
)


def build_dataset(per_label, *, origins=None, prompt="a test prompt", num_scenes=None):
    """Construct a Dataset from {label_name: {scene_id: feature_vector}}.

    Labels default to prompt origin; override per name via origins.
    Scene count defaults to max referenced id + 1.
    """
    origins = dict(origins or {})
    all_scenes = sorted({s for feats in per_label.values() for s in feats})
    n = num_scenes if num_scenes is not None else (max(all_scenes) + 1)

    def origin_of(name):
        return origins.get(name, ORIGIN_PROMPT)

    names = sorted(per_label)
    prompt_names = sorted(n for n in names if origin_of(n) == ORIGIN_PROMPT)
    disc_names = sorted(n for n in names if origin_of(n) != ORIGIN_PROMPT)
    ordered = prompt_names + disc_names

    labels = [
        ObjectLabel(label_id=k, name=name, origin=origin_of(name))
        for k, name in enumerate(ordered)
    ]
    rows = []
    detections = []
    for lb in labels:
        for scene_id in sorted(per_label[lb.name]):
            detections.append(
                Detection(scene_id=scene_id, label_id=lb.label_id, feature_row=len(rows))
            )
            rows.append(np.asarray(per_label[lb.name][scene_id], dtype=np.float64))
    features = np.vstack(rows).astype(np.float32)
    scenes = [SceneRecord(scene_id=i) for i in range(n)]
    return Dataset(
        prompt=prompt,
        feature_dim=features.shape[1],
        scenes=scenes,
        labels=labels,
        detections=detections,
        features=features,
    )


def random_small_dataset(seed, *, n_labels=2, max_scenes=12, feature_dim=3, scale=2.0):
    """Random occupancy with scene 0 shared by every label.

    Keeps occurrence sets small enough for the naive oracles.
    """
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, max_scenes + 1))
    names = ["alpha", "beta", "gamma", "delta"][:n_labels]
    per = {}
    for name in names:
        size = int(rng.integers(2, n + 1))
        occ = rng.choice(n, size=size, replace=False)
        per[name] = {int(s): rng.normal(0.0, scale, feature_dim) for s in occ}
        per[name].setdefault(0, rng.normal(0.0, scale, feature_dim))
    origins = {
        name: (ORIGIN_PROMPT if k < (len(names) + 1) // 2 else ORIGIN_DISCOVERED)
        for k, name in enumerate(names)
    }
    return build_dataset(per, origins=origins)


def degenerate_pair_dataset(seed=0, *, n=6, feature_dim=3):
    """alpha has random features; tee is identical in every scene.

    Both labels occur in all n scenes, so the joint with tee factors and
    several identities collapse to closed forms.
    """
    rng = np.random.default_rng(seed)
    per = {
        "alpha": {i: rng.normal(0.0, 2.0, feature_dim) for i in range(n)},
        "tee": {i: np.full(feature_dim, 1.5) for i in range(n)},
    }
    return build_dataset(per, origins={"alpha": ORIGIN_PROMPT, "tee": ORIGIN_DISCOVERED})


def benchmark_generator_config(num_scenes=1000, feature_dim=32, weights=(0.7, 0.2, 0.1), sep=20.0):
    """Three well-separated components with skewed weights, as a raw config dict."""
    means = np.zeros((3, feature_dim))
    means[1, 0] = sep
    means[2, 1] = sep
    return {
        "prompt": "a benchmark scene",
        "num_scenes": num_scenes,
        "feature_dim": feature_dim,
        "labels": [
            {
                "name": "object",
                "origin": "prompt",
                "occurrence": 1.0,
                "spread": 1.0,
                "means": means.tolist(),
                "weights": list(weights),
            }
        ],
    }


@pytest.fixture
def tiny_dataset():
    """Two prompt labels, one discovered, seven scenes, hand-checkable sizes."""
    rng = np.random.default_rng(42)
    per = {
        "couch": {s: rng.normal(0.0, 2.0, 4) for s in (0, 1, 2, 3, 4, 5)},
        "lamp": {s: rng.normal(3.0, 2.0, 4) for s in (0, 2, 3, 5, 6)},
        "plant": {s: rng.normal(-2.0, 1.0, 4) for s in (1, 2, 4, 5)},
    }
    return build_dataset(
        per,
        origins={
            "couch": ORIGIN_PROMPT,
            "lamp": ORIGIN_PROMPT,
            "plant": ORIGIN_DISCOVERED,
        },
    )
