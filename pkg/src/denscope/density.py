"""Kernel density estimates over detection features.

All distributions here are discrete: probabilities assigned to the
instances of an object label (one instance per scene in its occurrence
set), obtained by evaluating an exponential-kernel KDE at the sample
points themselves and normalizing. The kernel sum always includes the
query's own term, which bounds every unnormalized value below by 1 and
makes every returned probability strictly positive.

Five distribution constructions are exposed: per-label (single), joint
over a label pair, marginal of a pair onto one label, conditional on a
specific anchor instance, and scene-subset restricted. Plus pointwise
mutual information between two instances, and the per-anchor PMI map
the relationship view consumes.

Everything is float64 and a pure function of (dataset, parameters).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._distance import sq_dists
from .dataset import ORIGIN_PROMPT, Dataset
from .errors import EmptySubsetError, NoCoOccurrenceError

DEFAULT_BANDWIDTH = 40.0

KIND_SINGLE = "single"


def kind_marginal(label_t: str) -> str:
    return f"marginal:{label_t}"


def kind_conditional(label_t: str, scene_j: int) -> str:
    return f"conditional:{label_t}:{scene_j}"


def kind_subset(n_members: int) -> str:
    return f"subset:{n_members}"


@dataclass(frozen=True, eq=False)
class DensityVector:
    """A normalized distribution over one label's instances.

    instance_ids are scene ids (a subset of the occurrence set, in
    ascending order); values align with them, are strictly positive,
    and sum to 1.
    """

    label: str
    label_id: int
    kind: str
    instance_ids: list[int]
    values: np.ndarray

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "kind": self.kind,
            "instance_ids": list(self.instance_ids),
            "values": [float(v) for v in self.values],
        }


@dataclass(frozen=True, eq=False)
class JointDensity:
    """Normalized joint distribution over instance pairs of two labels.

    rows index instances of label_s (scene ids row_ids), columns
    instances of label_t (scene ids col_ids). Entries are strictly
    positive and sum to 1.
    """

    label_s: str
    label_t: str
    row_ids: list[int]
    col_ids: list[int]
    values: np.ndarray


@dataclass(frozen=True, eq=False)
class PmiEntry:
    label: str
    instance_ids: list[int]
    values: np.ndarray


@dataclass(frozen=True)
class PmiMap:
    """Per prompt-label PMI of every instance against one anchor
    instance. Labels that never co-occur with the anchor's label carry
    no PMI and are listed in `unavailable` instead."""

    anchor_label: str
    anchor_scene: int
    entries: list[PmiEntry]
    unavailable: list[str]

    @property
    def bound(self) -> float:
        """Symmetric color-domain bound: max |value| over the map."""
        mags = [float(np.max(np.abs(e.values))) for e in self.entries if len(e.values)]
        return max(mags, default=0.0)


def kernel(z):
    """Exponential kernel exp(-z) for z >= 0; kernel(0) = 1."""
    z = np.asarray(z, dtype=np.float64)
    if np.any(z < 0):
        raise ValueError("kernel argument must be nonnegative")
    out = np.exp(-z)
    return float(out) if out.ndim == 0 else out


def _check_bandwidth(h: float) -> float:
    h = float(h)
    if not h > 0:
        raise ValueError(f"bandwidth must be positive, got {h}")
    return h


def _kernel_matrix(ds: Dataset, label, query_scenes, source_scenes, h: float) -> np.ndarray:
    """K[i][n] = exp(-||z_query_i - z_source_n||^2 / h) for one label."""
    zq = ds.features_for(label, query_scenes)
    zs = ds.features_for(label, source_scenes)
    return np.exp(-sq_dists(zq, zs) / h)


def _intersection(ds: Dataset, label_s, label_t):
    """(label_s, label_t, sorted co-occurrence scene ids); s == t and
    empty intersections are rejected."""
    lb_s = ds.label(label_s)
    lb_t = ds.label(label_t)
    if lb_s.label_id == lb_t.label_id:
        raise ValueError(f"label pair must be distinct, got {lb_s.name!r} twice")
    common = np.intersect1d(ds.occurrence_set(lb_s), ds.occurrence_set(lb_t))
    if common.size == 0:
        raise NoCoOccurrenceError(lb_s.name, lb_t.name)
    return lb_s, lb_t, common


def kde_unnormalized(ds: Dataset, label, scene_i: int, h: float = DEFAULT_BANDWIDTH) -> float:
    """Sum of exp(-||z_i - z_n||^2 / h) over every instance n of the
    label, self-term included, so the result is >= 1."""
    h = _check_bandwidth(h)
    lb = ds.label(label)
    ds.detection(lb, scene_i)  # rejects i outside the occurrence set
    row = _kernel_matrix(ds, lb, [scene_i], ds.occurrence_set(lb), h)
    return float(row.sum())


def single_density(ds: Dataset, label, h: float = DEFAULT_BANDWIDTH) -> DensityVector:
    """Normalized KDE over all instances of one label."""
    h = _check_bandwidth(h)
    lb = ds.label(label)
    occ = ds.occurrence_set(lb)
    k = _kernel_matrix(ds, lb, occ, occ, h)
    u = k.sum(axis=1)
    return DensityVector(
        label=lb.name,
        label_id=lb.label_id,
        kind=KIND_SINGLE,
        instance_ids=[int(s) for s in occ],
        values=u / u.sum(),
    )


def joint_density(ds: Dataset, label_s, label_t, h: float = DEFAULT_BANDWIDTH) -> JointDensity:
    """Joint distribution over (instance of s, instance of t) pairs.

    unnormalized(i, j) sums, over co-occurring scenes n, the product of
    the s-kernel between instances i and n and the t-kernel between
    instances j and n; normalized by the grand sum. Materializes the
    full |O_s| x |O_t| matrix, so intended for inspection-scale inputs.
    """
    h = _check_bandwidth(h)
    lb_s, lb_t, common = _intersection(ds, label_s, label_t)
    occ_s = ds.occurrence_set(lb_s)
    occ_t = ds.occurrence_set(lb_t)
    ks = _kernel_matrix(ds, lb_s, occ_s, common, h)
    kt = _kernel_matrix(ds, lb_t, occ_t, common, h)
    unnorm = ks @ kt.T
    return JointDensity(
        label_s=lb_s.name,
        label_t=lb_t.name,
        row_ids=[int(s) for s in occ_s],
        col_ids=[int(s) for s in occ_t],
        values=unnorm / unnorm.sum(),
    )


def marginal_density(
    ds: Dataset, label_s, label_t, h: float = DEFAULT_BANDWIDTH
) -> DensityVector:
    """Joint of (s, t) with t's instance summed out over the
    co-occurring scenes, renormalized over all instances of s.

    Computed in factored form: the joint entry is a dot product over
    co-occurring scenes, so its partial row sums collapse to a single
    kernel-weighted vector and the full joint is never materialized.
    """
    h = _check_bandwidth(h)
    lb_s, lb_t, common = _intersection(ds, label_s, label_t)
    occ_s = ds.occurrence_set(lb_s)
    ks = _kernel_matrix(ds, lb_s, occ_s, common, h)
    kt_c = _kernel_matrix(ds, lb_t, common, common, h)
    raw = ks @ kt_c.sum(axis=0)
    return DensityVector(
        label=lb_s.name,
        label_id=lb_s.label_id,
        kind=kind_marginal(lb_t.name),
        instance_ids=[int(s) for s in occ_s],
        values=raw / raw.sum(),
    )


DENOM_TARGET_MARGINAL = "target-marginal"
DENOM_ANCHOR_MARGINAL = "anchor-marginal"


def conditional_density(
    ds: Dataset,
    label_s,
    anchor: tuple[int, object],
    h: float = DEFAULT_BANDWIDTH,
    denominator: str = DENOM_TARGET_MARGINAL,
) -> DensityVector:
    """Distribution over instances of s conditioned on one anchor
    instance (scene_j, label_t).

    The raw ratio divides the joint value at (i, anchor) by a marginal;
    `denominator` selects which one:

    - "target-marginal" (default): divide by the marginal of s at i,
      i.e. raw[i] = P(i, j) / P(i); renormalized over the support.
    - "anchor-marginal": divide by the marginal of t at the anchor, a
      constant in i, which after renormalization equals the normalized
      joint column at the anchor.

    Either way the result is renormalized to sum to 1, since the
    embedding optimizer consumes normalized distributions.
    """
    h = _check_bandwidth(h)
    scene_j, label_t = anchor
    lb_s, lb_t, common = _intersection(ds, label_s, label_t)
    ds.detection(lb_t, scene_j)  # rejects anchors outside O_t
    occ_s = ds.occurrence_set(lb_s)

    ks = _kernel_matrix(ds, lb_s, occ_s, common, h)
    kt_anchor = _kernel_matrix(ds, lb_t, [int(scene_j)], common, h)[0]
    joint_col = ks @ kt_anchor

    if denominator == DENOM_TARGET_MARGINAL:
        kt_c = _kernel_matrix(ds, lb_t, common, common, h)
        marg = ks @ kt_c.sum(axis=0)
        raw = joint_col / marg
    elif denominator == DENOM_ANCHOR_MARGINAL:
        raw = joint_col
    else:
        raise ValueError(f"unknown denominator form: {denominator!r}")

    return DensityVector(
        label=lb_s.name,
        label_id=lb_s.label_id,
        kind=kind_conditional(lb_t.name, int(scene_j)),
        instance_ids=[int(s) for s in occ_s],
        values=raw / raw.sum(),
    )


def subset_density(
    ds: Dataset, label, scene_subset, h: float = DEFAULT_BANDWIDTH
) -> DensityVector:
    """Single-label KDE with both queries and kernel sum restricted to
    the scenes in `scene_subset` (intersected with the occurrence set)."""
    h = _check_bandwidth(h)
    lb = ds.label(label)
    subset = {int(s) for s in scene_subset}
    support = np.array(sorted(subset & {int(s) for s in ds.occurrence_set(lb)}), dtype=np.int64)
    if support.size == 0:
        raise EmptySubsetError(lb.name, len(subset))
    k = _kernel_matrix(ds, lb, support, support, h)
    u = k.sum(axis=1)
    return DensityVector(
        label=lb.name,
        label_id=lb.label_id,
        kind=kind_subset(int(support.size)),
        instance_ids=[int(s) for s in support],
        values=u / u.sum(),
    )


def _log_joint_normalizer(ks: np.ndarray, kt: np.ndarray) -> float:
    """log of the joint grand sum, from the factored form."""
    return float(np.log(ks.sum(axis=0) @ kt.sum(axis=0)))


def pmi(
    ds: Dataset,
    instance_a: tuple[int, object],
    instance_b: tuple[int, object],
    h: float = DEFAULT_BANDWIDTH,
) -> float:
    """Pointwise mutual information between two instances:
    log P(a, b) - log P(a) - log P(b), all normalized. Finite because
    every density value is strictly positive."""
    h = _check_bandwidth(h)
    scene_i, label_s = instance_a
    scene_j, label_t = instance_b
    lb_s, lb_t, common = _intersection(ds, label_s, label_t)
    ds.detection(lb_s, scene_i)
    ds.detection(lb_t, scene_j)

    ks = _kernel_matrix(ds, lb_s, ds.occurrence_set(lb_s), common, h)
    kt = _kernel_matrix(ds, lb_t, ds.occurrence_set(lb_t), common, h)
    row_i = list(ds.occurrence_set(lb_s)).index(int(scene_i))
    row_j = list(ds.occurrence_set(lb_t)).index(int(scene_j))
    log_joint = float(np.log(ks[row_i] @ kt[row_j])) - _log_joint_normalizer(ks, kt)

    p_s = single_density(ds, lb_s, h)
    p_t = single_density(ds, lb_t, h)
    return log_joint - float(np.log(p_s.values[row_i])) - float(np.log(p_t.values[row_j]))


def pmi_map(
    ds: Dataset, anchor: tuple[int, object], h: float = DEFAULT_BANDWIDTH
) -> PmiMap:
    """PMI of every prompt-label instance against one anchor instance.

    Prompt labels that never co-occur with the anchor's label (or equal
    it) carry no joint distribution; they are skipped and reported in
    `unavailable`.
    """
    h = _check_bandwidth(h)
    scene_j, label_t = anchor
    lb_t = ds.label(label_t)
    ds.detection(lb_t, scene_j)
    occ_t = ds.occurrence_set(lb_t)
    p_t = single_density(ds, lb_t, h)
    row_j = list(occ_t).index(int(scene_j))
    log_p_t = float(np.log(p_t.values[row_j]))

    entries = []
    unavailable = []
    for lb_s in ds.labels:
        if lb_s.origin != ORIGIN_PROMPT or lb_s.label_id == lb_t.label_id:
            continue
        occ_s = ds.occurrence_set(lb_s)
        common = np.intersect1d(occ_s, occ_t)
        if common.size == 0:
            unavailable.append(lb_s.name)
            continue
        ks = _kernel_matrix(ds, lb_s, occ_s, common, h)
        kt = _kernel_matrix(ds, lb_t, occ_t, common, h)
        log_joint_col = np.log(ks @ kt[row_j]) - _log_joint_normalizer(ks, kt)
        p_s = single_density(ds, lb_s, h)
        values = log_joint_col - np.log(p_s.values) - log_p_t
        entries.append(
            PmiEntry(
                label=lb_s.name,
                instance_ids=[int(s) for s in occ_s],
                values=values,
            )
        )
    return PmiMap(
        anchor_label=lb_t.name,
        anchor_scene=int(scene_j),
        entries=entries,
        unavailable=unavailable,
    )
