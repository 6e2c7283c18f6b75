"""Dataset model for object-level detection features.

A dataset is a set of N scenes, a set of object labels (split into
prompt-origin and discovered-origin), and at most one detection per
(scene, label) pair. Each detection points at one row of a contiguous
float32 feature matrix. The on-disk layout is a directory holding

    manifest.json     {"prompt", "feature_dim", "num_scenes", "files": {...}}
    scenes.jsonl      {"scene_id", "seed", "image_ref"} per line
    detections.jsonl  {"scene_id", "label", "origin", "feature_row", "loc"} per line
    features.bin      num_detections x feature_dim little-endian float32, row-major
    ground_truth.json synthetic datasets only

This module also contains the synthetic generator: per-label Gaussian
mixtures with known components, so density ranks and occurrence sets
have analytic ground truth.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DatasetError, GeneratorConfigError, NotDetectedError, UnknownLabelError

ORIGIN_PROMPT = "prompt"
ORIGIN_DISCOVERED = "discovered"
_ORIGINS = (ORIGIN_PROMPT, ORIGIN_DISCOVERED)

MANIFEST_NAME = "manifest.json"
GROUND_TRUTH_NAME = "ground_truth.json"
_DEFAULT_FILES = {
    "scenes": "scenes.jsonl",
    "detections": "detections.jsonl",
    "features": "features.bin",
}


def normalize_name(name: str) -> str:
    """Canonical label name: trimmed and lowercased."""
    return name.strip().lower()


@dataclass(frozen=True)
class SceneRecord:
    scene_id: int
    seed: int | None = None
    image_ref: str | None = None


@dataclass(frozen=True)
class ObjectLabel:
    label_id: int
    name: str
    origin: str


@dataclass(frozen=True)
class Detection:
    scene_id: int
    label_id: int
    feature_row: int
    loc: tuple[int, int] | None = None


class Dataset:
    """Validated, immutable-by-convention collection of scenes, labels,
    detections and their feature matrix.

    Construction checks every structural invariant and raises
    DatasetError naming the offending record. Lookup indices
    (occurrence sets, feature rows per (scene, label)) are built once
    here; all later queries are dictionary lookups.
    """

    def __init__(self, prompt, feature_dim, scenes, labels, detections, features):
        self.prompt = str(prompt)
        self.feature_dim = int(feature_dim)
        self.scenes = list(scenes)
        self.labels = list(labels)
        self.detections = list(detections)
        self.features = np.ascontiguousarray(features, dtype=np.float32)
        self._validate()
        self._build_indices()

    # -- validation ------------------------------------------------------

    def _validate(self):
        if self.feature_dim < 1:
            raise DatasetError(f"feature_dim must be >= 1, got {self.feature_dim}")
        if self.features.ndim != 2 or self.features.shape[1] != self.feature_dim:
            raise DatasetError(
                f"feature matrix shape {self.features.shape} does not match "
                f"feature_dim {self.feature_dim}"
            )

        n = len(self.scenes)
        seen_scene = set()
        for sc in self.scenes:
            if not (0 <= sc.scene_id < n):
                raise DatasetError(
                    f"scene_id {sc.scene_id} outside dense range [0, {n})"
                )
            if sc.scene_id in seen_scene:
                raise DatasetError(f"duplicate scene_id {sc.scene_id}")
            seen_scene.add(sc.scene_id)

        seen_name = set()
        for lb in self.labels:
            if lb.origin not in _ORIGINS:
                raise DatasetError(
                    f"label {lb.name!r}: origin must be one of {_ORIGINS}, got {lb.origin!r}"
                )
            key = normalize_name(lb.name)
            if key in seen_name:
                raise DatasetError(f"duplicate label name after normalization: {key!r}")
            seen_name.add(key)
        if not any(lb.origin == ORIGIN_PROMPT for lb in self.labels):
            raise DatasetError("dataset has no prompt-origin label")
        label_ids = {lb.label_id for lb in self.labels}
        if label_ids != set(range(len(self.labels))):
            raise DatasetError("label_id values must be dense in [0, num_labels)")

        n_rows = self.features.shape[0]
        if len(self.detections) != n_rows:
            raise DatasetError(
                f"feature matrix size mismatch: {n_rows} rows for "
                f"{len(self.detections)} detections"
            )
        seen_pair = set()
        seen_row = set()
        for det in self.detections:
            where = f"detection (scene {det.scene_id}, label_id {det.label_id})"
            if det.scene_id not in seen_scene:
                raise DatasetError(f"{where}: references unknown scene {det.scene_id}")
            if det.label_id not in label_ids:
                raise DatasetError(f"{where}: references unknown label_id {det.label_id}")
            pair = (det.scene_id, det.label_id)
            if pair in seen_pair:
                name = self.labels[det.label_id].name
                raise DatasetError(
                    f"duplicate detection for (scene {det.scene_id}, label {name!r})"
                )
            seen_pair.add(pair)
            if not (0 <= det.feature_row < n_rows):
                raise DatasetError(
                    f"{where}: feature_row {det.feature_row} outside [0, {n_rows})"
                )
            if det.feature_row in seen_row:
                raise DatasetError(
                    f"{where}: feature_row {det.feature_row} already claimed by "
                    "another detection"
                )
            seen_row.add(det.feature_row)
            if det.loc is not None:
                r, c = det.loc
                if r < 0 or c < 0:
                    raise DatasetError(f"{where}: negative loc {det.loc}")
            if not np.isfinite(self.features[det.feature_row]).all():
                name = self.labels[det.label_id].name
                raise DatasetError(
                    f"non-finite feature value for (scene {det.scene_id}, "
                    f"label {name!r}) at feature_row {det.feature_row}"
                )

        detected_labels = {det.label_id for det in self.detections}
        for lb in self.labels:
            if lb.label_id not in detected_labels:
                raise DatasetError(f"label {lb.name!r} has no detections (empty occurrence set)")

    def _build_indices(self):
        self._label_by_name = {normalize_name(lb.name): lb for lb in self.labels}
        self._label_by_id = {lb.label_id: lb for lb in self.labels}
        self._row_of = {}
        occ: dict[int, list[int]] = {lb.label_id: [] for lb in self.labels}
        for det in self.detections:
            occ[det.label_id].append(det.scene_id)
            self._row_of[(det.scene_id, det.label_id)] = det.feature_row
        self._occ = {}
        for label_id, ids in occ.items():
            arr = np.array(sorted(ids), dtype=np.int64)
            arr.setflags(write=False)
            self._occ[label_id] = arr
        self._det_by_pair = {(d.scene_id, d.label_id): d for d in self.detections}

    # -- lookups ---------------------------------------------------------

    @property
    def num_scenes(self) -> int:
        return len(self.scenes)

    def label(self, ref) -> ObjectLabel:
        """Resolve a label by id or by (case-insensitive) name."""
        if isinstance(ref, ObjectLabel):
            return ref
        if isinstance(ref, (int, np.integer)):
            try:
                return self._label_by_id[int(ref)]
            except KeyError:
                raise UnknownLabelError(int(ref)) from None
        try:
            return self._label_by_name[normalize_name(ref)]
        except KeyError:
            raise UnknownLabelError(ref) from None

    def occurrence_set(self, ref) -> np.ndarray:
        """Sorted scene ids where the label was detected (read-only view)."""
        return self._occ[self.label(ref).label_id]

    def detection(self, ref, scene_id: int) -> Detection:
        lb = self.label(ref)
        try:
            return self._det_by_pair[(int(scene_id), lb.label_id)]
        except KeyError:
            raise NotDetectedError(lb.name, int(scene_id)) from None

    def feature_rows(self, ref, scene_ids) -> np.ndarray:
        """Feature-matrix row indices for the label's detections at the
        given scenes, in the given scene order."""
        lb = self.label(ref)
        rows = np.empty(len(scene_ids), dtype=np.int64)
        for k, sid in enumerate(scene_ids):
            try:
                rows[k] = self._row_of[(int(sid), lb.label_id)]
            except KeyError:
                raise NotDetectedError(lb.name, int(sid)) from None
        return rows

    def features_for(self, ref, scene_ids=None) -> np.ndarray:
        """Float64 feature matrix for the label over scene_ids (defaults
        to its full occurrence set), one row per scene in order."""
        if scene_ids is None:
            scene_ids = self.occurrence_set(ref)
        rows = self.feature_rows(ref, scene_ids)
        return self.features[rows].astype(np.float64)


def occurrence_set(ds: Dataset, label) -> list[int]:
    """Sorted, deduplicated scene ids where the label was detected."""
    return [int(s) for s in ds.occurrence_set(label)]


# -- on-disk format --------------------------------------------------------


def _canonical_labels(pairs):
    """Assign label ids: prompt-origin names first, then discovered,
    alphabetical within each group. `pairs` maps name -> origin."""
    rank = {ORIGIN_PROMPT: 0, ORIGIN_DISCOVERED: 1}
    ordered = sorted(pairs.items(), key=lambda kv: (rank[kv[1]], kv[0]))
    return [ObjectLabel(i, name, origin) for i, (name, origin) in enumerate(ordered)]


def _read_jsonl(path: Path):
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                yield lineno, json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"{path.name} line {lineno}: invalid JSON ({exc})") from None


def load_dataset(manifest_path) -> Dataset:
    """Load and validate a dataset directory (or direct manifest path)."""
    path = Path(manifest_path)
    if path.is_dir():
        path = path / MANIFEST_NAME
    if not path.is_file():
        raise DatasetError(f"missing file: {path}")
    base = path.parent

    try:
        manifest = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DatasetError(f"{path.name}: invalid JSON ({exc})") from None
    for key in ("prompt", "feature_dim", "num_scenes"):
        if key not in manifest:
            raise DatasetError(f"{path.name}: missing key {key!r}")
    files = dict(_DEFAULT_FILES)
    files.update(manifest.get("files", {}))
    for role in ("scenes", "detections", "features"):
        if not (base / files[role]).is_file():
            raise DatasetError(f"missing file: {base / files[role]}")

    feature_dim = int(manifest["feature_dim"])
    num_scenes = int(manifest["num_scenes"])

    scenes = []
    for lineno, rec in _read_jsonl(base / files["scenes"]):
        try:
            scenes.append(
                SceneRecord(
                    scene_id=int(rec["scene_id"]),
                    seed=None if rec.get("seed") is None else int(rec["seed"]),
                    image_ref=rec.get("image_ref"),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DatasetError(f"{files['scenes']} line {lineno}: bad record ({exc})") from None
    if len(scenes) != num_scenes:
        raise DatasetError(
            f"{files['scenes']}: holds {len(scenes)} scenes, manifest declares {num_scenes}"
        )
    scene_ids = {sc.scene_id for sc in scenes}

    raw_dets = []
    origins: dict[str, str] = {}
    for lineno, rec in _read_jsonl(base / files["detections"]):
        try:
            name = normalize_name(rec["label"])
            origin = rec["origin"]
            scene_id = int(rec["scene_id"])
            feature_row = int(rec["feature_row"])
            loc = rec.get("loc")
            loc = None if loc is None else (int(loc[0]), int(loc[1]))
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise DatasetError(
                f"{files['detections']} line {lineno}: bad record ({exc})"
            ) from None
        if origin not in _ORIGINS:
            raise DatasetError(
                f"{files['detections']} line {lineno}: origin must be one of "
                f"{_ORIGINS}, got {origin!r}"
            )
        if scene_id not in scene_ids:
            raise DatasetError(
                f"{files['detections']} line {lineno}: detection references "
                f"unknown scene {scene_id}"
            )
        if origins.setdefault(name, origin) != origin:
            raise DatasetError(
                f"{files['detections']} line {lineno}: label {name!r} appears "
                f"with conflicting origins"
            )
        raw_dets.append((lineno, scene_id, name, feature_row, loc))

    labels = _canonical_labels(origins)
    id_of = {lb.name: lb.label_id for lb in labels}
    detections = [
        Detection(scene_id=sid, label_id=id_of[name], feature_row=row, loc=loc)
        for _, sid, name, row, loc in raw_dets
    ]

    fpath = base / files["features"]
    blob = fpath.read_bytes()
    expected = len(detections) * feature_dim * 4
    if len(blob) != expected:
        raise DatasetError(
            f"feature matrix size mismatch: {fpath.name} holds {len(blob)} bytes, "
            f"expected {expected} ({len(detections)} detections x {feature_dim} dims)"
        )
    features = np.frombuffer(blob, dtype="<f4").reshape(len(detections), feature_dim)

    return Dataset(
        prompt=manifest["prompt"],
        feature_dim=feature_dim,
        scenes=scenes,
        labels=labels,
        detections=detections,
        features=features,
    )


def write_dataset(ds: Dataset, out_dir) -> None:
    """Write the dataset directory; load_dataset inverts this bit-exactly."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    manifest = {
        "prompt": ds.prompt,
        "feature_dim": ds.feature_dim,
        "num_scenes": ds.num_scenes,
        "files": dict(_DEFAULT_FILES),
    }
    (out / MANIFEST_NAME).write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")

    with open(out / _DEFAULT_FILES["scenes"], "w", encoding="utf-8") as fh:
        for sc in sorted(ds.scenes, key=lambda s: s.scene_id):
            fh.write(
                json.dumps(
                    {"scene_id": sc.scene_id, "seed": sc.seed, "image_ref": sc.image_ref}
                )
                + "\n"
            )

    name_of = {lb.label_id: lb for lb in ds.labels}
    with open(out / _DEFAULT_FILES["detections"], "w", encoding="utf-8") as fh:
        for det in ds.detections:
            lb = name_of[det.label_id]
            fh.write(
                json.dumps(
                    {
                        "scene_id": det.scene_id,
                        "label": lb.name,
                        "origin": lb.origin,
                        "feature_row": det.feature_row,
                        "loc": None if det.loc is None else list(det.loc),
                    }
                )
                + "\n"
            )

    with open(out / _DEFAULT_FILES["features"], "wb") as fh:
        fh.write(np.ascontiguousarray(ds.features, dtype="<f4").tobytes())


# -- synthetic generator ---------------------------------------------------


@dataclass(frozen=True)
class LabelSpec:
    """Mixture spec for one label: K component means (K x F), component
    weights summing to 1, one shared isotropic spread, and the per-scene
    occurrence probability."""

    name: str
    origin: str
    occurrence: float
    means: np.ndarray
    weights: np.ndarray
    spread: float


@dataclass(frozen=True)
class CouplingRule:
    """When `if_present` occurs in a scene, `label` is drawn from
    component `component` instead of its weights."""

    if_present: str
    label: str
    component: int


@dataclass(frozen=True)
class GeneratorConfig:
    prompt: str
    num_scenes: int
    feature_dim: int
    labels: tuple[LabelSpec, ...]
    couplings: tuple[CouplingRule, ...] = ()
    grid_size: int = 32


@dataclass(frozen=True)
class SyntheticGroundTruth:
    """What the generator actually did: the mixture specs, the component
    each detection was drawn from (per label, per scene), and the
    coupling rules in force."""

    mixtures: dict[str, LabelSpec]
    assignments: dict[str, dict[int, int]]
    couplings: tuple[CouplingRule, ...] = ()

    def presence(self, label_name: str) -> list[int]:
        """Sorted scene ids where the generator placed the label."""
        return sorted(self.assignments[normalize_name(label_name)])


def load_generator_config(source) -> GeneratorConfig:
    """Parse and validate a generator config from a dict or a JSON path."""
    if isinstance(source, (str, Path)):
        path = Path(source)
        if not path.is_file():
            raise GeneratorConfigError(f"missing config file: {path}")
        try:
            source = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise GeneratorConfigError(f"{path.name}: invalid JSON ({exc})") from None
    if not isinstance(source, dict):
        raise GeneratorConfigError("generator config must be a JSON object")

    try:
        prompt = str(source["prompt"])
        num_scenes = int(source["num_scenes"])
        feature_dim = int(source["feature_dim"])
        raw_labels = source["labels"]
    except KeyError as exc:
        raise GeneratorConfigError(f"config missing key {exc.args[0]!r}") from None

    if num_scenes < 1:
        raise GeneratorConfigError("zero scenes: num_scenes must be >= 1")
    if feature_dim < 2:
        raise GeneratorConfigError(f"feature_dim must be >= 2, got {feature_dim}")
    if not raw_labels:
        raise GeneratorConfigError("config declares no labels")

    labels = []
    seen = set()
    for rec in raw_labels:
        name = normalize_name(str(rec.get("name", "")))
        if not name:
            raise GeneratorConfigError("label with empty name")
        if name in seen:
            raise GeneratorConfigError(f"duplicate label {name!r} in config")
        seen.add(name)
        origin = rec.get("origin", ORIGIN_PROMPT)
        if origin not in _ORIGINS:
            raise GeneratorConfigError(
                f"label {name!r}: origin must be one of {_ORIGINS}, got {origin!r}"
            )
        means = np.asarray(rec.get("means"), dtype=np.float64)
        if means.ndim != 2 or means.shape[0] < 1 or means.shape[1] != feature_dim:
            raise GeneratorConfigError(
                f"label {name!r}: means must be K x {feature_dim} with K >= 1"
            )
        weights = np.asarray(rec.get("weights"), dtype=np.float64)
        if weights.shape != (means.shape[0],):
            raise GeneratorConfigError(
                f"invalid weights for label {name!r}: need one weight per component"
            )
        if (weights < 0).any() or not math.isclose(
            float(weights.sum()), 1.0, rel_tol=0, abs_tol=1e-9
        ):
            raise GeneratorConfigError(
                f"invalid weights for label {name!r}: must be >= 0 and sum to 1"
            )
        spread = float(rec.get("spread", 1.0))
        if not spread > 0:
            raise GeneratorConfigError(f"label {name!r}: spread must be positive")
        occurrence = float(rec.get("occurrence", 1.0))
        if not 0.0 <= occurrence <= 1.0:
            raise GeneratorConfigError(f"label {name!r}: occurrence must lie in [0, 1]")
        means.setflags(write=False)
        weights.setflags(write=False)
        labels.append(LabelSpec(name, origin, occurrence, means, weights, spread))

    if not any(spec.origin == ORIGIN_PROMPT for spec in labels):
        raise GeneratorConfigError("config needs at least one prompt-origin label")

    by_name = {spec.name: spec for spec in labels}
    couplings = []
    for rec in source.get("couplings", ()):
        trigger = normalize_name(str(rec.get("if_present", "")))
        target = normalize_name(str(rec.get("label", "")))
        comp = int(rec.get("component", -1))
        if trigger not in by_name:
            raise GeneratorConfigError(f"coupling references unknown label {trigger!r}")
        if target not in by_name:
            raise GeneratorConfigError(f"coupling references unknown label {target!r}")
        if trigger == target:
            raise GeneratorConfigError(f"coupling of label {target!r} with itself")
        if not 0 <= comp < by_name[target].means.shape[0]:
            raise GeneratorConfigError(
                f"coupling for label {target!r}: component {comp} out of range"
            )
        couplings.append(CouplingRule(trigger, target, comp))

    grid_size = int(source.get("grid_size", 32))
    if grid_size < 1:
        raise GeneratorConfigError("grid_size must be >= 1")

    return GeneratorConfig(
        prompt=prompt,
        num_scenes=num_scenes,
        feature_dim=feature_dim,
        labels=tuple(labels),
        couplings=tuple(couplings),
        grid_size=grid_size,
    )


def generate_synthetic(cfg: GeneratorConfig, seed: int):
    """Sample a dataset from the config's mixtures.

    Deterministic for fixed (cfg, seed): one generator drives, in order,
    scene seeds, the presence pass, then per present detection the
    component choice, the feature perturbation, and the loc. Returns
    (Dataset, SyntheticGroundTruth).
    """
    if isinstance(cfg, dict):
        cfg = load_generator_config(cfg)
    rng = np.random.default_rng(seed)
    n, f = cfg.num_scenes, cfg.feature_dim

    scene_seeds = rng.integers(0, 2**31 - 1, size=n)
    scenes = [SceneRecord(scene_id=i, seed=int(scene_seeds[i])) for i in range(n)]

    present = {
        spec.name: rng.random(n) < spec.occurrence if spec.occurrence < 1.0
        else np.ones(n, dtype=bool)
        for spec in cfg.labels
    }

    labels = _canonical_labels({spec.name: spec.origin for spec in cfg.labels})
    id_of = {lb.name: lb.label_id for lb in labels}
    forced_by = {}  # target label -> list of (trigger, component), rule order
    for rule in cfg.couplings:
        forced_by.setdefault(rule.label, []).append(rule)

    detections = []
    rows = []
    assignments: dict[str, dict[int, int]] = {spec.name: {} for spec in cfg.labels}
    for scene_id in range(n):
        for spec in cfg.labels:
            if not present[spec.name][scene_id]:
                continue
            comp = None
            for rule in forced_by.get(spec.name, ()):
                if present[rule.if_present][scene_id]:
                    comp = rule.component
                    break
            if comp is None:
                k = spec.weights.shape[0]
                comp = int(rng.choice(k, p=spec.weights)) if k > 1 else 0
            feat = spec.means[comp] + spec.spread * rng.standard_normal(f)
            loc = rng.integers(0, cfg.grid_size, size=2)
            detections.append(
                Detection(
                    scene_id=scene_id,
                    label_id=id_of[spec.name],
                    feature_row=len(rows),
                    loc=(int(loc[0]), int(loc[1])),
                )
            )
            rows.append(feat)
            assignments[spec.name][scene_id] = comp

    for spec in cfg.labels:
        if not assignments[spec.name]:
            raise DatasetError(
                f"label {spec.name!r} was never sampled across {n} scenes; "
                "raise its occurrence probability or the scene count"
            )

    features = np.asarray(rows, dtype=np.float64).astype(np.float32)
    ds = Dataset(
        prompt=cfg.prompt,
        feature_dim=f,
        scenes=scenes,
        labels=labels,
        detections=detections,
        features=features,
    )
    truth = SyntheticGroundTruth(
        mixtures={spec.name: spec for spec in cfg.labels},
        assignments=assignments,
        couplings=cfg.couplings,
    )
    return ds, truth


def write_ground_truth(truth: SyntheticGroundTruth, out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    doc = {
        "mixtures": {
            name: {
                "origin": spec.origin,
                "occurrence": spec.occurrence,
                "means": spec.means.tolist(),
                "weights": spec.weights.tolist(),
                "spread": spec.spread,
            }
            for name, spec in truth.mixtures.items()
        },
        "assignments": {
            name: sorted([sid, comp] for sid, comp in per.items())
            for name, per in truth.assignments.items()
        },
        "couplings": [
            {"if_present": r.if_present, "label": r.label, "component": r.component}
            for r in truth.couplings
        ],
    }
    (out / GROUND_TRUTH_NAME).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def load_ground_truth(data_dir) -> SyntheticGroundTruth:
    path = Path(data_dir)
    if path.is_dir():
        path = path / GROUND_TRUTH_NAME
    if not path.is_file():
        raise DatasetError(f"missing file: {path}")
    doc = json.loads(path.read_text(encoding="utf-8"))
    mixtures = {}
    for name, rec in doc["mixtures"].items():
        means = np.asarray(rec["means"], dtype=np.float64)
        weights = np.asarray(rec["weights"], dtype=np.float64)
        means.setflags(write=False)
        weights.setflags(write=False)
        mixtures[name] = LabelSpec(
            name=name,
            origin=rec["origin"],
            occurrence=float(rec["occurrence"]),
            means=means,
            weights=weights,
            spread=float(rec["spread"]),
        )
    assignments = {
        name: {int(sid): int(comp) for sid, comp in pairs}
        for name, pairs in doc["assignments"].items()
    }
    couplings = tuple(
        CouplingRule(r["if_present"], r["label"], int(r["component"]))
        for r in doc.get("couplings", ())
    )
    return SyntheticGroundTruth(mixtures=mixtures, assignments=assignments, couplings=couplings)
