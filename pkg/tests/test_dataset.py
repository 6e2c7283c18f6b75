"""Dataset model, on-disk format, and synthetic generator."""

import json

import numpy as np
import pytest

from denscope.dataset import (
    ORIGIN_DISCOVERED,
    ORIGIN_PROMPT,
    Dataset,
    Detection,
    ObjectLabel,
    SceneRecord,
    generate_synthetic,
    load_dataset,
    load_generator_config,
    load_ground_truth,
    normalize_name,
    occurrence_set,
    write_dataset,
    write_ground_truth,
)
from denscope.errors import (
    DatasetError,
    GeneratorConfigError,
    NotDetectedError,
    UnknownLabelError,
)

from conftest import build_dataset


SIMPLE_CONFIG = {
    "prompt": "a room",
    "num_scenes": 40,
    "feature_dim": 4,
    "labels": [
        {
            "name": "couch",
            "origin": "prompt",
            "occurrence": 1.0,
            "means": [[0, 0, 0, 0], [8, 0, 0, 0]],
            "weights": [0.75, 0.25],
            "spread": 1.0,
        },
        {
            "name": "plant",
            "origin": "discovered",
            "occurrence": 0.6,
            "means": [[0, 0, 4, 4]],
            "weights": [1.0],
            "spread": 0.5,
        },
    ],
}


# -- construction and lookups ------------------------------------------------


def test_build_and_lookups(tiny_dataset):
    ds = tiny_dataset
    assert ds.num_scenes == 7
    assert [lb.name for lb in ds.labels] == ["couch", "lamp", "plant"]
    assert [lb.origin for lb in ds.labels] == [
        ORIGIN_PROMPT,
        ORIGIN_PROMPT,
        ORIGIN_DISCOVERED,
    ]
    assert occurrence_set(ds, "couch") == [0, 1, 2, 3, 4, 5]
    assert occurrence_set(ds, "lamp") == [0, 2, 3, 5, 6]
    assert occurrence_set(ds, "plant") == [1, 2, 4, 5]
    # name resolution is case and whitespace insensitive
    assert ds.label(" Lamp ").label_id == ds.label("lamp").label_id
    assert ds.label(2).name == "plant"


def test_features_for_returns_float64_rows_in_scene_order(tiny_dataset):
    ds = tiny_dataset
    mat = ds.features_for("lamp", [5, 0])
    assert mat.dtype == np.float64
    assert mat.shape == (2, 4)
    row5 = ds.features[ds.detection("lamp", 5).feature_row]
    assert np.array_equal(mat[0], row5.astype(np.float64))


def test_unknown_label_raises(tiny_dataset):
    with pytest.raises(UnknownLabelError) as exc:
        tiny_dataset.occurrence_set("sofa")
    assert "sofa" in str(exc.value)
    with pytest.raises(UnknownLabelError):
        tiny_dataset.label(99)


def test_missing_detection_raises(tiny_dataset):
    with pytest.raises(NotDetectedError) as exc:
        tiny_dataset.detection("plant", 0)
    assert "plant" in str(exc.value)


def test_occurrence_set_is_read_only(tiny_dataset):
    occ = tiny_dataset.occurrence_set("couch")
    with pytest.raises(ValueError):
        occ[0] = 99


def test_single_scene_single_label():
    ds = build_dataset({"thing": {0: [1.0, 2.0]}})
    assert occurrence_set(ds, "thing") == [0]
    assert ds.feature_dim == 2


def _one_label_parts():
    scenes = [SceneRecord(0), SceneRecord(1)]
    labels = [ObjectLabel(0, "couch", ORIGIN_PROMPT)]
    detections = [Detection(0, 0, 0), Detection(1, 0, 1)]
    features = np.zeros((2, 3), dtype=np.float32)
    return scenes, labels, detections, features


def test_rejects_sparse_scene_ids():
    scenes, labels, detections, features = _one_label_parts()
    scenes[1] = SceneRecord(7)
    with pytest.raises(DatasetError, match="dense"):
        Dataset("p", 3, scenes, labels, [detections[0]], features[:1])


def test_rejects_duplicate_scene_ids():
    scenes, labels, detections, features = _one_label_parts()
    scenes[1] = SceneRecord(0)
    with pytest.raises(DatasetError, match="duplicate scene_id"):
        Dataset("p", 3, scenes, labels, detections, features)


def test_rejects_unknown_origin():
    scenes, labels, detections, features = _one_label_parts()
    labels = [ObjectLabel(0, "couch", "hallucinated")]
    with pytest.raises(DatasetError, match="origin"):
        Dataset("p", 3, scenes, labels, detections, features)


def test_rejects_names_that_collide_after_normalization():
    scenes, _, detections, features = _one_label_parts()
    labels = [ObjectLabel(0, "Couch", ORIGIN_PROMPT), ObjectLabel(1, "couch ", ORIGIN_PROMPT)]
    detections = [Detection(0, 0, 0), Detection(1, 1, 1)]
    with pytest.raises(DatasetError, match="normalization"):
        Dataset("p", 3, scenes, labels, detections, features)


def test_rejects_dataset_without_prompt_label():
    scenes, _, detections, features = _one_label_parts()
    labels = [ObjectLabel(0, "couch", ORIGIN_DISCOVERED)]
    with pytest.raises(DatasetError, match="prompt-origin"):
        Dataset("p", 3, scenes, labels, detections, features)


def test_rejects_duplicate_detection_for_scene_label_pair():
    scenes, labels, _, features = _one_label_parts()
    detections = [Detection(0, 0, 0), Detection(0, 0, 1)]
    with pytest.raises(DatasetError, match=r"duplicate detection.*scene 0.*couch"):
        Dataset("p", 3, scenes, labels, detections, features)


def test_rejects_feature_row_out_of_range():
    scenes, labels, _, features = _one_label_parts()
    detections = [Detection(0, 0, 0), Detection(1, 0, 5)]
    with pytest.raises(DatasetError, match="feature_row 5"):
        Dataset("p", 3, scenes, labels, detections, features)


def test_rejects_shared_feature_row():
    scenes, labels, _, features = _one_label_parts()
    detections = [Detection(0, 0, 0), Detection(1, 0, 0)]
    with pytest.raises(DatasetError, match="already claimed"):
        Dataset("p", 3, scenes, labels, detections, features)


def test_rejects_row_count_mismatch():
    scenes, labels, detections, features = _one_label_parts()
    with pytest.raises(DatasetError, match="feature matrix size mismatch"):
        Dataset("p", 3, scenes, labels, detections, np.zeros((3, 3), dtype=np.float32))


def test_rejects_non_finite_feature_naming_the_detection():
    scenes, labels, detections, features = _one_label_parts()
    features = features.copy()
    features[1, 2] = np.nan
    with pytest.raises(DatasetError, match=r"non-finite.*scene 1.*couch"):
        Dataset("p", 3, scenes, labels, detections, features)


def test_rejects_label_with_no_detections():
    scenes, labels, detections, features = _one_label_parts()
    labels = labels + [ObjectLabel(1, "ghost", ORIGIN_DISCOVERED)]
    with pytest.raises(DatasetError, match="ghost"):
        Dataset("p", 3, scenes, labels, detections, features)


def test_normalize_name():
    assert normalize_name("  Teddy Bear ") == "teddy bear"


# -- on-disk format ----------------------------------------------------------


def test_write_then_load_is_identity(tmp_path):
    ds, _ = generate_synthetic(SIMPLE_CONFIG, seed=3)
    write_dataset(ds, tmp_path)
    back = load_dataset(tmp_path)
    assert back.prompt == ds.prompt
    assert back.feature_dim == ds.feature_dim
    assert back.scenes == ds.scenes
    assert back.labels == ds.labels
    assert back.detections == ds.detections
    assert np.array_equal(
        back.features.view(np.uint8), ds.features.view(np.uint8)
    ), "feature bytes must survive the round trip unchanged"


def test_written_files_and_manifest_shape(tmp_path):
    ds = build_dataset({"thing": {0: [1.0, 0.5]}})
    write_dataset(ds, tmp_path)
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["prompt"] == "a test prompt"
    assert manifest["feature_dim"] == 2
    assert manifest["num_scenes"] == 1
    assert set(manifest["files"].values()) == {
        "scenes.jsonl",
        "detections.jsonl",
        "features.bin",
    }


def test_feature_bytes_are_little_endian_f4(tmp_path):
    ds = build_dataset({"thing": {0: [1.0, 0.5]}})
    write_dataset(ds, tmp_path)
    blob = (tmp_path / "features.bin").read_bytes()
    assert blob == bytes([0x00, 0x00, 0x80, 0x3F, 0x00, 0x00, 0x00, 0x3F])


def test_load_accepts_manifest_path_or_directory(tmp_path):
    ds = build_dataset({"thing": {0: [1.0, 0.5]}})
    write_dataset(ds, tmp_path)
    a = load_dataset(tmp_path)
    b = load_dataset(tmp_path / "manifest.json")
    assert a.detections == b.detections


def test_load_reports_unknown_scene_with_line_number(tmp_path):
    ds, _ = generate_synthetic(SIMPLE_CONFIG, seed=3)
    write_dataset(ds, tmp_path)
    det_path = tmp_path / "detections.jsonl"
    lines = det_path.read_text().splitlines()
    rec = json.loads(lines[4])
    rec["scene_id"] = 999
    lines[4] = json.dumps(rec)
    det_path.write_text("\n".join(lines) + "\n")
    with pytest.raises(DatasetError, match=r"line 5: detection references unknown scene 999"):
        load_dataset(tmp_path)


def test_load_reports_feature_size_mismatch_in_bytes(tmp_path):
    ds, _ = generate_synthetic(SIMPLE_CONFIG, seed=3)
    write_dataset(ds, tmp_path)
    fpath = tmp_path / "features.bin"
    blob = fpath.read_bytes()
    fpath.write_bytes(blob[:-4])
    with pytest.raises(DatasetError, match="feature matrix size mismatch") as exc:
        load_dataset(tmp_path)
    msg = str(exc.value)
    assert f"{len(blob) - 4} bytes" in msg
    assert f"expected {len(blob)}" in msg


def test_load_reports_invalid_json_line(tmp_path):
    ds = build_dataset({"thing": {0: [1.0, 0.5]}})
    write_dataset(ds, tmp_path)
    det_path = tmp_path / "detections.jsonl"
    det_path.write_text(det_path.read_text() + "{not json\n")
    with pytest.raises(DatasetError, match=r"detections\.jsonl line 2"):
        load_dataset(tmp_path)


def test_load_rejects_conflicting_origins(tmp_path):
    ds = build_dataset(
        {"thing": {0: [1.0, 0.5], 1: [0.0, 0.0]}},
        num_scenes=2,
    )
    write_dataset(ds, tmp_path)
    det_path = tmp_path / "detections.jsonl"
    lines = det_path.read_text().splitlines()
    rec = json.loads(lines[1])
    rec["origin"] = ORIGIN_DISCOVERED
    lines[1] = json.dumps(rec)
    det_path.write_text("\n".join(lines) + "\n")
    with pytest.raises(DatasetError, match="conflicting origins"):
        load_dataset(tmp_path)


def test_load_missing_directory():
    with pytest.raises(DatasetError, match="missing file"):
        load_dataset("/nonexistent/place")


def test_load_rejects_scene_count_mismatch(tmp_path):
    ds = build_dataset({"thing": {0: [1.0, 0.5], 1: [0.0, 0.0]}})
    write_dataset(ds, tmp_path)
    scenes = (tmp_path / "scenes.jsonl").read_text().splitlines()
    (tmp_path / "scenes.jsonl").write_text(scenes[0] + "\n")
    with pytest.raises(DatasetError, match="manifest declares 2"):
        load_dataset(tmp_path)


# -- synthetic generator -----------------------------------------------------


def test_generate_is_deterministic(tmp_path):
    a, truth_a = generate_synthetic(SIMPLE_CONFIG, seed=11)
    b, truth_b = generate_synthetic(SIMPLE_CONFIG, seed=11)
    assert a.scenes == b.scenes
    assert a.detections == b.detections
    assert np.array_equal(a.features.view(np.uint8), b.features.view(np.uint8))
    assert truth_a.assignments == truth_b.assignments

    write_dataset(a, tmp_path / "a")
    write_dataset(b, tmp_path / "b")
    for name in ("manifest.json", "scenes.jsonl", "detections.jsonl", "features.bin"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_generate_different_seeds_differ():
    a, _ = generate_synthetic(SIMPLE_CONFIG, seed=0)
    b, _ = generate_synthetic(SIMPLE_CONFIG, seed=1)
    assert not np.array_equal(a.features, b.features)


def test_generate_occurrence_one_fills_every_scene():
    ds, truth = generate_synthetic(SIMPLE_CONFIG, seed=5)
    assert occurrence_set(ds, "couch") == list(range(40))
    assert truth.presence("couch") == list(range(40))


def test_generate_occurrence_sets_match_ground_truth():
    ds, truth = generate_synthetic(SIMPLE_CONFIG, seed=7)
    for name in ("couch", "plant"):
        assert occurrence_set(ds, name) == truth.presence(name)


def test_generate_component_frequencies_track_weights():
    cfg = dict(SIMPLE_CONFIG, num_scenes=2000)
    _, truth = generate_synthetic(cfg, seed=2)
    comps = np.array(list(truth.assignments["couch"].values()))
    freq = np.mean(comps == 0)
    assert abs(freq - 0.75) < 0.03


def test_generate_occurrence_frequency_tracks_probability():
    cfg = dict(SIMPLE_CONFIG, num_scenes=2000)
    ds, _ = generate_synthetic(cfg, seed=2)
    frac = len(occurrence_set(ds, "plant")) / 2000
    assert abs(frac - 0.6) < 0.03


def test_generate_features_cluster_near_assigned_component_mean():
    _, truth = generate_synthetic(SIMPLE_CONFIG, seed=9)
    ds, _ = generate_synthetic(SIMPLE_CONFIG, seed=9)
    spec = truth.mixtures["couch"]
    for scene_id, comp in truth.assignments["couch"].items():
        feat = ds.features_for("couch", [scene_id])[0]
        d = np.linalg.norm(feat - spec.means[comp])
        assert d < 6.0 * spec.spread


def test_generate_coupling_forces_component():
    cfg = {
        "prompt": "a room",
        "num_scenes": 400,
        "feature_dim": 3,
        "labels": [
            {
                "name": "anchor",
                "origin": "prompt",
                "occurrence": 0.5,
                "means": [[0, 0, 0]],
                "weights": [1.0],
            },
            {
                "name": "follower",
                "origin": "discovered",
                "occurrence": 0.8,
                "means": [[0, 0, 0], [5, 0, 0], [0, 5, 0]],
                "weights": [0.4, 0.4, 0.2],
            },
        ],
        "couplings": [{"if_present": "anchor", "label": "follower", "component": 2}],
    }
    ds, truth = generate_synthetic(cfg, seed=4)
    anchor_scenes = set(truth.presence("anchor"))
    forced = [
        comp
        for scene_id, comp in truth.assignments["follower"].items()
        if scene_id in anchor_scenes
    ]
    free = [
        comp
        for scene_id, comp in truth.assignments["follower"].items()
        if scene_id not in anchor_scenes
    ]
    assert len(forced) > 20
    assert np.mean(np.array(forced) == 2) >= 0.99
    assert 0.05 < np.mean(np.array(free) == 2) < 0.55


def test_generate_loc_within_grid():
    cfg = dict(SIMPLE_CONFIG, grid_size=8)
    ds, _ = generate_synthetic(cfg, seed=1)
    for det in ds.detections:
        assert det.loc is not None
        assert 0 <= det.loc[0] < 8
        assert 0 <= det.loc[1] < 8


def test_ground_truth_round_trip(tmp_path):
    _, truth = generate_synthetic(SIMPLE_CONFIG, seed=3)
    write_ground_truth(truth, tmp_path)
    back = load_ground_truth(tmp_path)
    assert back.assignments == truth.assignments
    assert back.couplings == truth.couplings
    for name, spec in truth.mixtures.items():
        assert np.array_equal(back.mixtures[name].means, spec.means)
        assert np.array_equal(back.mixtures[name].weights, spec.weights)


def test_never_sampled_label_is_an_error():
    cfg = {
        "prompt": "a room",
        "num_scenes": 3,
        "feature_dim": 2,
        "labels": [
            {"name": "a", "origin": "prompt", "occurrence": 1.0, "means": [[0, 0]], "weights": [1.0]},
            {"name": "b", "origin": "discovered", "occurrence": 1e-12, "means": [[1, 1]], "weights": [1.0]},
        ],
    }
    with pytest.raises(DatasetError, match="'b' was never sampled"):
        generate_synthetic(cfg, seed=0)


# -- generator config validation ---------------------------------------------


def _bad_config(**overrides):
    cfg = json.loads(json.dumps(SIMPLE_CONFIG))
    cfg.update(overrides)
    return cfg


def test_config_rejects_bad_weights():
    cfg = _bad_config()
    cfg["labels"][0]["weights"] = [0.5, 0.2]
    with pytest.raises(GeneratorConfigError, match="invalid weights for label 'couch'"):
        load_generator_config(cfg)


def test_config_rejects_negative_weight():
    cfg = _bad_config()
    cfg["labels"][0]["weights"] = [1.5, -0.5]
    with pytest.raises(GeneratorConfigError, match="invalid weights for label 'couch'"):
        load_generator_config(cfg)


def test_config_rejects_weight_count_mismatch():
    cfg = _bad_config()
    cfg["labels"][0]["weights"] = [1.0]
    with pytest.raises(GeneratorConfigError, match="one weight per component"):
        load_generator_config(cfg)


def test_config_rejects_zero_scenes():
    with pytest.raises(GeneratorConfigError, match="zero scenes"):
        load_generator_config(_bad_config(num_scenes=0))


def test_config_rejects_feature_dim_below_two():
    with pytest.raises(GeneratorConfigError, match="feature_dim"):
        load_generator_config(_bad_config(feature_dim=1))


def test_config_rejects_unknown_coupling_target():
    cfg = _bad_config(couplings=[{"if_present": "couch", "label": "nosuch", "component": 0}])
    with pytest.raises(GeneratorConfigError, match="unknown label 'nosuch'"):
        load_generator_config(cfg)


def test_config_rejects_coupling_component_out_of_range():
    cfg = _bad_config(couplings=[{"if_present": "couch", "label": "plant", "component": 3}])
    with pytest.raises(GeneratorConfigError, match="component 3 out of range"):
        load_generator_config(cfg)


def test_config_rejects_self_coupling():
    cfg = _bad_config(couplings=[{"if_present": "couch", "label": "couch", "component": 0}])
    with pytest.raises(GeneratorConfigError, match="itself"):
        load_generator_config(cfg)


def test_config_rejects_occurrence_outside_unit_interval():
    cfg = _bad_config()
    cfg["labels"][1]["occurrence"] = 1.5
    with pytest.raises(GeneratorConfigError, match="occurrence"):
        load_generator_config(cfg)


def test_config_requires_prompt_label():
    cfg = _bad_config()
    for rec in cfg["labels"]:
        rec["origin"] = "discovered"
    with pytest.raises(GeneratorConfigError, match="prompt-origin"):
        load_generator_config(cfg)


def test_config_from_file(tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(SIMPLE_CONFIG))
    cfg = load_generator_config(p)
    assert cfg.num_scenes == 40
    assert [spec.name for spec in cfg.labels] == ["couch", "plant"]
