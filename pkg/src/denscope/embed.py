"""Low-dimensional embeddings of density vectors.

Two optimizers over 1D/2D coordinates for m instances:

- optimize: minimize KL(P_d || Q_d) + lambda * KL(P_n || Q_n), where
  P_d is any DensityVector over the instances, Q_d the normalized
  exponential-kernel KDE of the coordinates (bandwidth 1), P_n the
  perplexity-calibrated symmetric neighbor distribution of the feature
  points, and Q_n the student-t affinity matrix of the coordinates.
- tsne_embed: the baseline, minimizing KL(P_n || Q_n) alone on the
  same P_n; it reports the density KL of its result for comparison.

Both run plain momentum gradient descent from a small seeded random
initialization and are bit-deterministic for a fixed seed. The public
objective/gradient functions are straightforward float64 references;
the descent loop itself works in float32 with preallocated buffers
(the gradient is a sum of strictly positive kernel terms, so float32
keeps ~1e-6 relative accuracy, and final KL values are recomputed in
float64 from the final coordinates).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._distance import sq_dists
from .density import DensityVector
from .errors import EmbedDivergedError

DEFAULT_LAMBDA = 0.1
_PERPLEXITY_1D = 7.0
_PERPLEXITY_2D = 14.0

_EXAGG_FACTOR = 4.0  # early exaggeration of the neighbor term
_EXAGG_ITERS = 50
_MOMENTUM_EARLY = 0.5
_MOMENTUM_LATE = 0.8
_MOMENTUM_SWITCH = 100
_PROBE_EVERY = 10  # objective sampled every this many iterations
_WINDOW = 50  # convergence window in iterations
_EXP_ARG_CAP = 35.0  # exp(-35) is still a normal float32; caps the f32 exp argument


@dataclass
class EmbedConfig:
    """Optimizer settings.

    perplexity defaults by dim (7 for 1D, 14 for 2D) when left None.
    q_bandwidth is the low-dimensional KDE bandwidth and stays at 1;
    the coordinate scale is free, so it only fixes units.
    fixed_bandwidth, when set, replaces the perplexity calibration with
    constant-bandwidth neighbor affinities exp(-d/fixed_bandwidth).
    """

    dim: int = 2
    lam: float = DEFAULT_LAMBDA
    perplexity: float | None = None
    q_bandwidth: float = 1.0
    max_iters: int = 1000
    convergence_tol: float = 1e-6
    learning_rate: float = 50.0
    seed: int = 0
    fixed_bandwidth: float | None = None

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if self.lam < 0:
            raise ValueError(f"lambda must be nonnegative, got {self.lam}")
        if self.perplexity is not None and not self.perplexity > 0:
            raise ValueError(f"perplexity must be positive, got {self.perplexity}")
        if not self.q_bandwidth > 0:
            raise ValueError(f"q_bandwidth must be positive, got {self.q_bandwidth}")
        if self.max_iters < 0:
            raise ValueError(f"max_iters must be nonnegative, got {self.max_iters}")
        if not self.learning_rate > 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.fixed_bandwidth is not None and not self.fixed_bandwidth > 0:
            raise ValueError(f"fixed_bandwidth must be positive, got {self.fixed_bandwidth}")

    def resolved_perplexity(self) -> float:
        if self.perplexity is not None:
            return float(self.perplexity)
        return _PERPLEXITY_1D if self.dim == 1 else _PERPLEXITY_2D


@dataclass(frozen=True, eq=False)
class NeighborDistribution:
    """Symmetric pairwise neighbor probabilities with zero diagonal,
    summing to 1. betas holds the per-row precisions the calibration
    found (0 where a degenerate row fell back to uniform)."""

    m: int
    p: np.ndarray
    perplexity: float
    betas: np.ndarray


@dataclass(frozen=True, eq=False)
class EmbeddingResult:
    label: str | None
    kind: str
    instance_ids: list[int]
    coords: np.ndarray
    kl_density: float
    kl_neighbor: float
    iterations: int
    seed: int
    trace: list[tuple[int, float]] | None = field(default=None, repr=False, compare=False)

    @property
    def dim(self) -> int:
        return int(self.coords.shape[1])

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "kind": self.kind,
            "dim": self.dim,
            "instance_ids": list(self.instance_ids),
            "coords": [[float(v) for v in row] for row in self.coords],
            "kl_density": float(self.kl_density),
            "kl_neighbor": float(self.kl_neighbor),
            "iterations": int(self.iterations),
            "seed": int(self.seed),
        }


def pairwise_sq_dists(points) -> np.ndarray:
    """Symmetric matrix of squared Euclidean distances, zero diagonal."""
    points = np.asarray(points, dtype=np.float64)
    if points.ndim == 1:
        points = points[:, None]
    if points.ndim != 2 or points.shape[0] < 1:
        raise ValueError(f"expected an m x F point array with m >= 1, got shape {points.shape}")
    if not np.isfinite(points).all():
        raise ValueError("points contain non-finite values")
    return sq_dists(points)


def neighbor_distribution(
    sq_d: np.ndarray, perplexity: float, tol: float = 1e-5, max_search: int = 64
) -> NeighborDistribution:
    """Perplexity-calibrated symmetric neighbor probabilities.

    Per row a, conditional probabilities p_{b|a} proportional to
    exp(-beta_a * d_ab) over b != a, with beta_a found by binary search
    so the row entropy satisfies 2^H = perplexity within `tol` relative
    (at most `max_search` halvings). Rows whose off-diagonal distances
    are all zero have constant conditionals at any beta; they fall back
    to uniform. Symmetrized as (p_{b|a} + p_{a|b}) / 2m.
    """
    d = np.asarray(sq_d, dtype=np.float64)
    m = d.shape[0]
    if d.shape != (m, m):
        raise ValueError(f"sq_dists must be square, got shape {d.shape}")
    perplexity = float(perplexity)
    if not 0 < perplexity < m:
        raise ValueError(
            f"perplexity must lie in (0, m); got {perplexity} with m={m} points"
        )

    target = np.log2(perplexity)
    off = ~np.eye(m, dtype=bool)
    # distances shifted per row by their off-diagonal minimum: exp stays
    # in range at large beta without changing the conditional
    d_off = np.where(off, d, np.inf)
    d_min = d_off.min(axis=1)
    degenerate = d_off.max(axis=1, where=np.isfinite(d_off), initial=0.0) <= 0.0

    # off-diagonal distances, row-shifted; bisect all rows at once and
    # retire each row as its entropy lands within tolerance
    d_shift = (d_off - d_min[:, None])[off].reshape(m, m - 1)
    p_off = np.zeros((m, m - 1), dtype=np.float64)
    p_off[degenerate] = 1.0 / (m - 1)

    betas = np.ones(m, dtype=np.float64)
    lo = np.zeros(m, dtype=np.float64)
    hi = np.full(m, np.inf)
    active = np.flatnonzero(~degenerate)
    for _ in range(max_search):
        if active.size == 0:
            break
        da = d_shift[active]
        w = np.exp(-betas[active, None] * da)
        s = w.sum(axis=1)
        rows = w / s[:, None]
        # H in bits; the -beta*d_min shift cancels out of the entropy
        h = np.log2(s) + betas[active] * np.einsum("ij,ij->i", rows, da) / np.log(2.0)
        p_off[active] = rows
        done = np.abs(2.0**h - perplexity) <= tol * perplexity
        settle = active[~done]
        high = h[~done] > target  # entropy too high: sharpen
        sharpen = settle[high]
        lo[sharpen] = betas[sharpen]
        betas[sharpen] = np.where(
            hi[sharpen] == np.inf, betas[sharpen] * 2.0, (betas[sharpen] + hi[sharpen]) / 2.0
        )
        soften = settle[~high]
        hi[soften] = betas[soften]
        betas[soften] = (lo[soften] + betas[soften]) / 2.0
        active = settle
    betas[degenerate] = 0.0

    p = np.zeros((m, m), dtype=np.float64)
    p[off] = p_off.ravel()
    sym = (p + p.T) / (2.0 * m)
    return NeighborDistribution(m=m, p=sym, perplexity=perplexity, betas=betas)


def fixed_bandwidth_affinities(sq_d: np.ndarray, h: float) -> NeighborDistribution:
    """Neighbor probabilities with one global bandwidth instead of the
    perplexity calibration: p_{b|a} proportional to exp(-d_ab / h)."""
    d = np.asarray(sq_d, dtype=np.float64)
    m = d.shape[0]
    if not h > 0:
        raise ValueError(f"bandwidth must be positive, got {h}")
    w = np.exp(-d / h)
    np.fill_diagonal(w, 0.0)
    rows = w.sum(axis=1, keepdims=True)
    p = w / rows
    sym = (p + p.T) / (2.0 * m)
    return NeighborDistribution(m=m, p=sym, perplexity=float("nan"), betas=np.full(m, 1.0 / h))


def low_dim_density(coords, h: float = 1.0) -> np.ndarray:
    """Q_d: normalized exponential-kernel KDE of the coordinates,
    self-term included."""
    coords = np.asarray(coords, dtype=np.float64)
    if coords.ndim == 1:
        coords = coords[:, None]
    if not np.isfinite(coords).all():
        raise ValueError("coords contain non-finite values")
    if not h > 0:
        raise ValueError(f"bandwidth must be positive, got {h}")
    u = np.exp(-sq_dists(coords) / h).sum(axis=1)
    return u / u.sum()


def student_t_q(coords) -> np.ndarray:
    """Q_n: student-t affinities (1 + d)^-1 off-diagonal, normalized by
    their total. A single point has no pairs and returns [[0.0]]."""
    coords = np.asarray(coords, dtype=np.float64)
    if coords.ndim == 1:
        coords = coords[:, None]
    if not np.isfinite(coords).all():
        raise ValueError("coords contain non-finite values")
    m = coords.shape[0]
    if m == 1:
        return np.zeros((1, 1), dtype=np.float64)
    w = 1.0 / (1.0 + sq_dists(coords))
    np.fill_diagonal(w, 0.0)
    return w / w.sum()


def _kl_density(coords: np.ndarray, p_d: np.ndarray, h: float) -> float:
    q = low_dim_density(coords, h)
    return float(p_d @ (np.log(p_d) - np.log(q)))


def _kl_neighbor(coords: np.ndarray, p_n: np.ndarray) -> float:
    m = coords.shape[0]
    if m == 1:
        return 0.0
    w = 1.0 / (1.0 + sq_dists(coords))
    np.fill_diagonal(w, 0.0)
    q = w / w.sum()
    mask = p_n > 0
    pm = p_n[mask]
    return float(pm @ (np.log(pm) - np.log(q[mask])))


class _ProbeObjective:
    """The descent loop's convergence probe: the same float64 total that
    _kl_density and _kl_neighbor produce, with the target-dependent
    pieces (logs, support mask) hoisted out of the loop and one distance
    matrix shared by both terms."""

    def __init__(self, p_n: np.ndarray, p_d, lam: float, q_bandwidth: float, dim: int):
        m = p_n.shape[0]
        self.lam = lam
        self.h = q_bandwidth
        self.idx = np.flatnonzero(p_n.ravel() > 0.0)
        self.pm = p_n.ravel()[self.idx]
        self.log_pm = np.log(self.pm)
        self.p_d = p_d
        self.log_pd = np.log(p_d) if p_d is not None else None
        self.d = np.empty((m, m), dtype=np.float64)
        self.buf = np.empty((m, m), dtype=np.float64)
        self.comp = np.empty((m, m), dtype=np.float64) if dim > 1 else None

    def total(self, x64: np.ndarray) -> float:
        d, buf = self.d, self.buf
        col = np.ascontiguousarray(x64[:, 0])
        np.subtract(col[:, None], col[None, :], out=d)
        np.multiply(d, d, out=d)
        for k in range(1, x64.shape[1]):
            col = np.ascontiguousarray(x64[:, k])
            np.subtract(col[:, None], col[None, :], out=self.comp)
            np.multiply(self.comp, self.comp, out=self.comp)
            d += self.comp
        np.fill_diagonal(d, 0.0)

        total = 0.0
        if self.p_d is not None:
            np.divide(d, -self.h, out=buf)
            np.exp(buf, out=buf)
            u = buf.sum(axis=1)
            total += float(self.p_d @ (self.log_pd - np.log(u / u.sum())))

        np.add(d, 1.0, out=buf)
        np.reciprocal(buf, out=buf)
        np.fill_diagonal(buf, 0.0)
        q_sel = buf.ravel()[self.idx] / buf.sum()
        kln = float(self.pm @ (self.log_pm - np.log(q_sel)))
        if self.p_d is not None:
            return total + self.lam * kln
        return kln


def objective(coords, p_d, p_n, lam: float, q_bandwidth: float = 1.0):
    """(total, kl_density, kl_neighbor) of the combined objective.

    kl_density = KL(p_d || Q_d(coords)); kl_neighbor = KL(p_n || Q_n(coords))
    over off-diagonal pairs (zero p entries contribute nothing);
    total = kl_density + lam * kl_neighbor. Float64 reference.
    """
    coords = np.asarray(coords, dtype=np.float64)
    if coords.ndim == 1:
        coords = coords[:, None]
    p_d = p_d.values if isinstance(p_d, DensityVector) else np.asarray(p_d, dtype=np.float64)
    kld = _kl_density(coords, p_d, q_bandwidth)
    kln = _kl_neighbor(coords, np.asarray(p_n, dtype=np.float64))
    return kld + lam * kln, kld, kln


def gradient(coords, p_d, p_n, lam: float, q_bandwidth: float = 1.0) -> np.ndarray:
    """Analytic gradient of the combined objective at coords (float64
    reference; checked against central finite differences).

    With u_a = sum_b exp(-d_ab / h), S = sum u, a_i = p_d_i / u_i - 1/S,
    the density term contributes (2/h) * sum_b (a_a + a_b) E_ab (x_a - x_b)
    and the neighbor term the standard 4 * sum_b (p_ab - q_ab) W_ab (x_a - x_b)
    with W = (1 + d)^-1.
    """
    x = np.asarray(coords, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    p_d = p_d.values if isinstance(p_d, DensityVector) else np.asarray(p_d, dtype=np.float64)
    p_n = np.asarray(p_n, dtype=np.float64)
    m = x.shape[0]
    if m == 1:
        return np.zeros_like(x)

    d = sq_dists(x)
    e = np.exp(-d / q_bandwidth)
    u = e.sum(axis=1)
    s = u.sum()
    a = p_d / u - 1.0 / s
    c = (2.0 / q_bandwidth) * (a[:, None] + a[None, :]) * e

    w = 1.0 / (1.0 + d)
    np.fill_diagonal(w, 0.0)
    z = w.sum()
    c = c + 4.0 * lam * (p_n - w / z) * w

    np.fill_diagonal(c, 0.0)
    return c.sum(axis=1)[:, None] * x - c @ x


def _density_target(p_d, m: int):
    """(values, label, kind, instance_ids) from a DensityVector or a
    bare probability vector."""
    if isinstance(p_d, DensityVector):
        values = np.asarray(p_d.values, dtype=np.float64)
        label, kind, ids = p_d.label, p_d.kind, list(p_d.instance_ids)
    else:
        values = np.asarray(p_d, dtype=np.float64)
        label, kind, ids = None, "custom", list(range(m))
    if values.shape != (m,):
        raise ValueError(f"density has {values.shape[0]} values for {m} feature rows")
    if np.any(values <= 0) or abs(float(values.sum()) - 1.0) > 1e-9:
        raise ValueError("density values must be strictly positive and sum to 1")
    return values, label, kind, ids


_F32 = np.float32


# a diverging trajectory overflows float32 before the isfinite check
# turns it into EmbedDivergedError; silence the interim warnings
@np.errstate(over="ignore", invalid="ignore")
def _descend(p_d, p_n, cfg: EmbedConfig, rng, init=None):
    """Momentum descent in float32. Returns (coords float64,
    iterations, probe trace). p_d is None for the neighbor-only path.

    The float32 twin of gradient(): identical term order, with the exp
    argument capped at 35 (exp(-35) ~ 6e-16 is far below the self-term
    contribution of 1, and uncapped arguments would push float32 exp
    into subnormal outputs).
    """
    m = p_n.shape[0]
    dim, lam = cfg.dim, cfg.lam
    dens = p_d is not None
    neg_inv_h = _F32(-1.0 / cfg.q_bandwidth)

    if init is not None:
        x = np.ascontiguousarray(init, dtype=_F32).copy()
        if x.shape != (m, dim):
            raise ValueError(f"init shape {x.shape} does not match ({m}, {dim})")
    else:
        x = (rng.standard_normal((m, dim)) * 1e-2).astype(_F32)
    v = np.zeros_like(x)

    # neighbor matrices pre-scaled by their gradient factor (4 lam for the
    # combined objective, 4 for the neighbor-only path)
    factor = 4.0 * lam if dens else 4.0
    pn32 = (p_n * factor).astype(_F32)
    pn32_ex = (p_n * (factor * _EXAGG_FACTOR)).astype(_F32)
    if dens:
        pd64 = np.asarray(p_d, dtype=np.float64)

    probe = _ProbeObjective(p_n, pd64 if dens else None, lam, cfg.q_bandwidth, dim)

    d = np.empty((m, m), dtype=_F32)
    w = np.empty_like(d)
    c = np.empty_like(d)
    t = np.empty_like(d) if dens else None
    e = np.empty_like(d) if dens else None

    trace = []
    window_probes = _WINDOW // _PROBE_EVERY
    iterations = 0
    for it in range(cfg.max_iters):
        pn_cur = pn32_ex if it < _EXAGG_ITERS else pn32

        # squared distances: D = s_a + s_b - 2 x x^T, clipped at 0
        sq_norm = np.einsum("ij,ij->i", x, x)
        np.matmul(x, x.T, out=d)
        d *= _F32(-2.0)
        d += sq_norm[:, None]
        d += sq_norm[None, :]
        np.maximum(d, _F32(0.0), out=d)

        np.add(d, _F32(1.0), out=w)
        np.reciprocal(w, out=w)
        z = float(w.sum(dtype=np.float64)) - m  # off-diagonal total

        if dens:
            np.multiply(d, neg_inv_h, out=e)
            np.maximum(e, _F32(-_EXP_ARG_CAP), out=e)
            np.exp(e, out=e)
            u = e.sum(axis=1, dtype=np.float64)
            s = float(u.sum())
            a = ((pd64 / u - 1.0 / s) * (2.0 / cfg.q_bandwidth)).astype(_F32)
            np.add(a[:, None], a[None, :], out=c)
            c *= e
            np.multiply(w, _F32(factor / z), out=t)
            np.subtract(pn_cur, t, out=t)
            t *= w
            c += t
        else:
            np.multiply(w, _F32(factor / z), out=c)
            np.subtract(pn_cur, c, out=c)
            c *= w
        np.fill_diagonal(c, 0.0)

        g = c.sum(axis=1, dtype=np.float64).astype(_F32)[:, None] * x - c @ x

        v *= _F32(_MOMENTUM_EARLY if it < _MOMENTUM_SWITCH else _MOMENTUM_LATE)
        g *= _F32(cfg.learning_rate)
        v -= g
        x += v
        iterations = it + 1

        if not np.isfinite(x).all():
            raise EmbedDivergedError(iterations)

        if iterations % _PROBE_EVERY == 0:
            total = probe.total(x.astype(np.float64))
            if not np.isfinite(total):
                raise EmbedDivergedError(iterations)
            trace.append((iterations, total))
            if len(trace) > window_probes:
                prev_it, prev_total = trace[-1 - window_probes]
                if prev_it > _EXAGG_ITERS:  # window fully past exaggeration
                    improvement = (prev_total - total) / max(abs(prev_total), 1e-12)
                    if improvement < cfg.convergence_tol:
                        break

    return x.astype(np.float64), iterations, trace


def _single_point_result(label, kind, ids, cfg: EmbedConfig) -> EmbeddingResult:
    return EmbeddingResult(
        label=label,
        kind=kind,
        instance_ids=ids,
        coords=np.zeros((1, cfg.dim), dtype=np.float64),
        kl_density=0.0,
        kl_neighbor=0.0,
        iterations=0,
        seed=cfg.seed,
        trace=[],
    )


def _build_neighbors(features: np.ndarray, cfg: EmbedConfig) -> np.ndarray:
    sq = pairwise_sq_dists(features)
    if cfg.fixed_bandwidth is not None:
        return fixed_bandwidth_affinities(sq, cfg.fixed_bandwidth).p
    m = features.shape[0]
    perp = min(cfg.resolved_perplexity(), float(m - 1))
    return neighbor_distribution(sq, perp).p


def optimize(p_d, features, cfg: EmbedConfig | None = None, *, init=None) -> EmbeddingResult:
    """Density-preserving embedding of the instances behind p_d.

    Builds the neighbor distribution from `features` (m x F, aligned
    with p_d), starts from a seeded standard-normal initialization
    scaled by 1e-2 (or `init` when given, e.g. to warm-start), and runs
    momentum descent until the relative total-objective improvement
    over a 50-iteration window falls below cfg.convergence_tol or
    cfg.max_iters is reached. Deterministic for a fixed seed.
    """
    cfg = cfg if cfg is not None else EmbedConfig()
    features = np.asarray(features, dtype=np.float64)
    if features.ndim == 1:
        features = features[:, None]
    m = features.shape[0]
    values, label, kind, ids = _density_target(p_d, m)
    if m == 1:
        return _single_point_result(label, kind, ids, cfg)

    p_n = _build_neighbors(features, cfg)
    rng = np.random.default_rng(cfg.seed)
    coords, iterations, trace = _descend(values, p_n, cfg, rng, init=init)
    _, kld, kln = objective(coords, values, p_n, cfg.lam, cfg.q_bandwidth)
    return EmbeddingResult(
        label=label,
        kind=kind,
        instance_ids=ids,
        coords=coords,
        kl_density=kld,
        kl_neighbor=kln,
        iterations=iterations,
        seed=cfg.seed,
        trace=trace,
    )


def tsne_embed(features, cfg: EmbedConfig | None = None, eval_density=None) -> EmbeddingResult:
    """Baseline: minimize KL(P_n || Q_n) alone on the same neighbor
    construction. kl_density is evaluated against `eval_density` when
    given (the comparison target), else reported as nan.
    """
    cfg = cfg if cfg is not None else EmbedConfig()
    features = np.asarray(features, dtype=np.float64)
    if features.ndim == 1:
        features = features[:, None]
    m = features.shape[0]
    if eval_density is not None:
        values, label, kind, ids = _density_target(eval_density, m)
        kind = f"tsne:{kind}"
    else:
        values, label, kind, ids = None, None, "tsne", list(range(m))
    if m == 1:
        return _single_point_result(label, kind, ids, cfg)

    p_n = _build_neighbors(features, cfg)
    rng = np.random.default_rng(cfg.seed)
    coords, iterations, trace = _descend(None, p_n, cfg, rng)
    kln = _kl_neighbor(coords, p_n)
    kld = _kl_density(coords, values, cfg.q_bandwidth) if values is not None else float("nan")
    return EmbeddingResult(
        label=label,
        kind=kind,
        instance_ids=ids,
        coords=coords,
        kl_density=kld,
        kl_neighbor=kln,
        iterations=iterations,
        seed=cfg.seed,
        trace=trace,
    )
