"""HTTP/JSON session layer for interactive exploration.

A Session owns one immutable dataset plus the mutable interaction
state: an embedding cache keyed by (label, density kind, dim, seed),
the current scene selection, and the current steering anchor. Every
embedding seed is derived deterministically from the session seed and
the cache key, so replaying a request log against a fresh session with
the same dataset and seed reproduces byte-identical payloads.

create_app wraps a Session in a FastAPI app exposing:

    GET  /api/meta
    GET  /api/object/{label}/violin?subset=<selection id>
    GET  /api/matrix/{prompt_label}/{discovered_label}
    GET  /api/selection
    POST /api/selection        {"scene_ids": [...]}
    GET  /api/pmi?label=<t>&scene=<j>
    POST /api/condition        {"label": <t>, "scene": <j>}  (NDJSON stream)

plus static mounts for scene thumbnails (/files) and the UI bundle (/).
Endpoint errors are JSON bodies {code, message, detail}.
"""

import json
import math
import threading
import zlib

import numpy as np

from . import density
from .dataset import ORIGIN_PROMPT, Dataset
from .embed import EmbedConfig, EmbeddingResult, optimize
from .errors import (
    DatasetError,
    DenscopeError,
    EmbedDivergedError,
    EmptySubsetError,
    InvalidSceneError,
    NoCoOccurrenceError,
    NoDatasetError,
    NotDetectedError,
    UnknownLabelError,
    UnknownSelectionError,
)

DEFAULT_MAX_ITERS = 400  # ample for convergence at interactive sizes

VIOLIN_BANDWIDTH = 1.0
VIOLIN_GRID_POINTS = 256
VIOLIN_PAD = 3.0  # grid padding in bandwidths


def violin_profile(coords, members=None) -> dict:
    """Gaussian-KDE width profile of 1D embedding coordinates.

    The grid always spans all coordinates (padded by 3 bandwidths), so
    a subset profile superimposes on the full one. Subset widths keep
    the full-set normalization: each kept point contributes pdf/m with
    m the full count, making the profile area approximately
    area_scale = |members| / m times the base area.
    """
    coords = np.asarray(coords, dtype=np.float64).reshape(-1)
    m = coords.shape[0]
    grid = np.linspace(
        coords.min() - VIOLIN_PAD * VIOLIN_BANDWIDTH,
        coords.max() + VIOLIN_PAD * VIOLIN_BANDWIDTH,
        VIOLIN_GRID_POINTS,
    )
    kept = coords if members is None else coords[np.asarray(members)]
    z = (grid[None, :] - kept[:, None]) / VIOLIN_BANDWIDTH
    norm = m * VIOLIN_BANDWIDTH * math.sqrt(2.0 * math.pi)
    widths = np.exp(-0.5 * z * z).sum(axis=0) / norm
    return {
        "grid": [float(g) for g in grid],
        "widths": [float(w) for w in widths],
        "area_scale": float(kept.shape[0]) / float(m),
    }


class Session:
    """Interaction state over one dataset; all public methods return
    JSON-ready dicts (or raise DenscopeError subclasses)."""

    def __init__(
        self,
        dataset: Dataset | None = None,
        *,
        seed: int = 0,
        bandwidth: float = density.DEFAULT_BANDWIDTH,
        max_iters: int = DEFAULT_MAX_ITERS,
        warm_start: bool = False,
    ):
        self.dataset = dataset
        self.seed = int(seed)
        self.bandwidth = float(bandwidth)
        self.max_iters = int(max_iters)
        self.warm_start = bool(warm_start)

        self._cache: dict[tuple, EmbeddingResult] = {}
        self._pending: dict[tuple, threading.Event] = {}
        self._cache_lock = threading.Lock()

        self._state_lock = threading.Lock()
        self._selections: dict[int, list[int]] = {}
        self._selection_counter = 0
        self._current_selection: int | None = None
        self._anchor: tuple[str, int] | None = None

    # -- internals ---------------------------------------------------

    def _require_dataset(self) -> Dataset:
        if self.dataset is None:
            raise NoDatasetError()
        return self.dataset

    def _ordered_labels(self):
        """Prompt labels first, then discovered; descending instance
        count within each group, name as tie-break."""
        ds = self._require_dataset()
        rank = {ORIGIN_PROMPT: 0}
        return sorted(
            ds.labels,
            key=lambda lb: (
                rank.get(lb.origin, 1),
                -int(ds.occurrence_set(lb).size),
                lb.name,
            ),
        )

    def derive_seed(self, *parts) -> int:
        """Deterministic per-embedding seed from the session seed and
        the cache key parts (stable across processes)."""
        text = "|".join(str(p) for p in (self.seed, *parts))
        return zlib.crc32(text.encode("utf-8")) & 0x7FFFFFFF

    def _density_for(self, label_name: str, kind: str) -> density.DensityVector:
        ds = self._require_dataset()
        h = self.bandwidth
        if kind == density.KIND_SINGLE:
            return density.single_density(ds, label_name, h)
        if kind.startswith("marginal:"):
            other = kind[len("marginal:"):]
            return density.marginal_density(ds, label_name, other, h)
        if kind.startswith("conditional:"):
            other, scene = kind[len("conditional:"):].rsplit(":", 1)
            return density.conditional_density(ds, label_name, (int(scene), other), h)
        raise ValueError(f"unknown density kind {kind!r}")

    def embedding(self, label, kind: str, dim: int) -> EmbeddingResult:
        """Cached embedding of the requested density. Concurrent
        requests for one key compute it once; distinct keys compute
        in parallel (the session lock is never held while optimizing)."""
        ds = self._require_dataset()
        lb = ds.label(label)
        seed = self.derive_seed(lb.name, kind, dim)
        key = (lb.name, kind, int(dim), seed)
        while True:
            with self._cache_lock:
                hit = self._cache.get(key)
                if hit is not None:
                    return hit
                event = self._pending.get(key)
                mine = event is None
                if mine:
                    event = threading.Event()
                    self._pending[key] = event
            if not mine:
                event.wait()
                continue  # either cached now, or the computing thread failed: retry
            try:
                result = self._compute_embedding(lb.name, kind, int(dim), seed)
                with self._cache_lock:
                    self._cache[key] = result
                return result
            finally:
                with self._cache_lock:
                    self._pending.pop(key, None)
                event.set()

    def _compute_embedding(self, label_name, kind, dim, seed) -> EmbeddingResult:
        ds = self._require_dataset()
        dv = self._density_for(label_name, kind)
        feats = ds.features_for(label_name, dv.instance_ids)
        init = None
        if self.warm_start and kind.startswith("conditional:"):
            other, _ = kind[len("conditional:"):].rsplit(":", 1)
            marg_kind = density.kind_marginal(other)
            marg_key = (label_name, marg_kind, dim, self.derive_seed(label_name, marg_kind, dim))
            with self._cache_lock:
                cached = self._cache.get(marg_key)
            if cached is not None:
                init = cached.coords
        cfg = EmbedConfig(dim=dim, seed=seed, max_iters=self.max_iters)
        return optimize(dv, feats, cfg, init=init)

    # -- endpoint payloads --------------------------------------------

    def meta(self) -> dict:
        ds = self._require_dataset()
        return {
            "prompt": ds.prompt,
            "num_scenes": int(ds.num_scenes),
            "feature_dim": int(ds.feature_dim),
            "bandwidth": float(self.bandwidth),
            "seed": int(self.seed),
            "labels": [
                {
                    "name": lb.name,
                    "origin": lb.origin,
                    "count": int(ds.occurrence_set(lb).size),
                }
                for lb in self._ordered_labels()
            ],
        }

    def violin_payload(self, label, subset_id: int | None = None) -> dict:
        result = self.embedding(label, density.KIND_SINGLE, dim=1)
        coords = result.coords[:, 0]
        payload = {
            "label": result.label,
            "embedding": result.to_json(),
            "profile": violin_profile(coords),
            "subset": None,
        }
        if subset_id is not None:
            with self._state_lock:
                if subset_id not in self._selections:
                    raise UnknownSelectionError(subset_id)
                selected = set(self._selections[subset_id])
            mask = [sid in selected for sid in result.instance_ids]
            members = [sid for sid in result.instance_ids if sid in selected]
            payload["subset"] = {
                "selection_id": int(subset_id),
                "members": members,
                "omitted": not members,
                "profile": violin_profile(coords, mask) if members else None,
            }
        return payload

    def matrix_payload(self, prompt_label, discovered_label) -> dict:
        ds = self._require_dataset()
        lb_s = ds.label(prompt_label)
        lb_t = ds.label(discovered_label)
        try:
            result = self.embedding(lb_s.name, density.kind_marginal(lb_t.name), dim=2)
        except NoCoOccurrenceError as exc:
            return {
                "co_occur": False,
                "labels": [lb_s.name, lb_t.name],
                "message": str(exc),
            }
        return {"co_occur": True, "labels": [lb_s.name, lb_t.name], "embedding": result.to_json()}

    def set_selection(self, scene_ids) -> dict:
        ds = self._require_dataset()
        cleaned = sorted({int(s) for s in scene_ids})
        for sid in cleaned:
            if not 0 <= sid < ds.num_scenes:
                raise InvalidSceneError(sid, ds.num_scenes)
        with self._state_lock:
            self._selection_counter += 1
            selection_id = self._selection_counter
            self._selections[selection_id] = cleaned
            self._current_selection = selection_id
        selected = set(cleaned)

        labels_part = []
        for lb in self._ordered_labels():
            result = self.embedding(lb.name, density.KIND_SINGLE, dim=1)
            members = [sid for sid in result.instance_ids if sid in selected]
            entry = {"label": lb.name, "members": members, "omitted": not members, "overlay": None}
            if members:
                mask = [sid in selected for sid in result.instance_ids]
                entry["overlay"] = violin_profile(result.coords[:, 0], mask)
            labels_part.append(entry)

        scene_of = {sc.scene_id: sc for sc in ds.scenes}
        scenes_part = [
            {
                "scene_id": sid,
                "seed": scene_of[sid].seed,
                "image_ref": scene_of[sid].image_ref,
            }
            for sid in cleaned
        ]
        return {
            "selection_id": selection_id,
            "scene_ids": cleaned,
            "labels": labels_part,
            "scenes": scenes_part,
        }

    def selection_state(self) -> dict:
        self._require_dataset()
        with self._state_lock:
            current = self._current_selection
            ids = list(self._selections.get(current, [])) if current is not None else []
            anchor = self._anchor
        return {
            "selection_id": current,
            "scene_ids": ids,
            "anchor": None if anchor is None else {"label": anchor[0], "scene": anchor[1]},
        }

    def pmi_payload(self, label, scene: int) -> dict:
        ds = self._require_dataset()
        pm = density.pmi_map(ds, (int(scene), label), self.bandwidth)
        det = ds.detection(pm.anchor_label, pm.anchor_scene)
        scene_rec = next(sc for sc in ds.scenes if sc.scene_id == pm.anchor_scene)
        return {
            "anchor": {
                "label": pm.anchor_label,
                "scene": pm.anchor_scene,
                "loc": None if det.loc is None else list(det.loc),
                "image_ref": scene_rec.image_ref,
            },
            "entries": [
                {
                    "label": e.label,
                    "instance_ids": list(e.instance_ids),
                    "values": [float(v) for v in e.values],
                }
                for e in pm.entries
            ],
            "unavailable": list(pm.unavailable),
            "bound": float(pm.bound),
        }

    def condition_stream(self, label, scene: int):
        """Validates the anchor, records it, and returns a generator of
        per-prompt-label dicts: {"label", "ok", "embedding"|"error"}.
        Per-label failures (e.g. no co-occurrence) are isolated lines."""
        ds = self._require_dataset()
        lb_t = ds.label(label)
        ds.detection(lb_t, scene)
        with self._state_lock:
            self._anchor = (lb_t.name, int(scene))
        targets = [
            lb
            for lb in self._ordered_labels()
            if lb.origin == ORIGIN_PROMPT and lb.label_id != lb_t.label_id
        ]
        kind = density.kind_conditional(lb_t.name, int(scene))

        def generate():
            for lb in targets:
                try:
                    result = self.embedding(lb.name, kind, dim=2)
                    yield {"label": lb.name, "ok": True, "embedding": result.to_json()}
                except DenscopeError as exc:
                    yield {"label": lb.name, "ok": False, "error": error_body(exc)}

        return generate()


# -- FastAPI wiring ---------------------------------------------------------

_ERROR_STATUS = [
    (NoDatasetError, 409, "NO_DATASET"),
    (UnknownLabelError, 404, "UNKNOWN_LABEL"),
    (NotDetectedError, 404, "NOT_DETECTED"),
    (UnknownSelectionError, 404, "UNKNOWN_SELECTION"),
    (InvalidSceneError, 400, "INVALID_SCENE"),
    (NoCoOccurrenceError, 409, "NO_CO_OCCURRENCE"),
    (EmptySubsetError, 409, "EMPTY_SUBSET"),
    (EmbedDivergedError, 500, "EMBED_DIVERGED"),
    (DatasetError, 400, "DATASET_INVALID"),
    (DenscopeError, 400, "DOMAIN_ERROR"),
]


def _classify(exc: DenscopeError) -> tuple[int, str]:
    for etype, status, code in _ERROR_STATUS:
        if isinstance(exc, etype):
            return status, code
    return 400, "DOMAIN_ERROR"


def error_body(exc: DenscopeError) -> dict:
    _, code = _classify(exc)
    detail = {
        k: v
        for k, v in vars(exc).items()
        if isinstance(v, (str, int, float, bool)) or v is None
    }
    return {"code": code, "message": str(exc), "detail": detail or None}


def create_app(session: Session, *, ui_dir=None, files_dir=None):
    """FastAPI app over a Session. ui_dir (static UI bundle, served at /)
    and files_dir (scene thumbnails, served at /files) are optional."""
    from fastapi import FastAPI
    from fastapi.exceptions import RequestValidationError
    from fastapi.responses import JSONResponse, StreamingResponse
    from fastapi.staticfiles import StaticFiles
    from pydantic import BaseModel

    class SelectionRequest(BaseModel):
        scene_ids: list[int]

    class ConditionRequest(BaseModel):
        label: str
        scene: int

    app = FastAPI(title="denscope", docs_url=None, redoc_url=None)

    @app.exception_handler(DenscopeError)
    async def on_domain_error(request, exc: DenscopeError):
        status, _ = _classify(exc)
        return JSONResponse(status_code=status, content=error_body(exc))

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(request, exc: RequestValidationError):
        return JSONResponse(
            status_code=422,
            content={
                "code": "INVALID_REQUEST",
                "message": "request does not match the endpoint schema",
                "detail": json.loads(json.dumps(exc.errors(), default=str)),
            },
        )

    @app.get("/api/meta")
    def get_meta():
        return session.meta()

    @app.get("/api/object/{label}/violin")
    def get_violin(label: str, subset: int | None = None):
        return session.violin_payload(label, subset)

    @app.get("/api/matrix/{prompt_label}/{discovered_label}")
    def get_matrix(prompt_label: str, discovered_label: str):
        return session.matrix_payload(prompt_label, discovered_label)

    @app.get("/api/selection")
    def get_selection():
        return session.selection_state()

    @app.post("/api/selection")
    def post_selection(body: SelectionRequest):
        return session.set_selection(body.scene_ids)

    @app.get("/api/pmi")
    def get_pmi(label: str, scene: int):
        return session.pmi_payload(label, scene)

    @app.post("/api/condition")
    def post_condition(body: ConditionRequest):
        stream = session.condition_stream(body.label, body.scene)
        return StreamingResponse(
            (json.dumps(item) + "\n" for item in stream),
            media_type="application/x-ndjson",
        )

    if files_dir is not None:
        app.mount("/files", StaticFiles(directory=str(files_dir)), name="files")
    if ui_dir is not None:
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")
    return app
