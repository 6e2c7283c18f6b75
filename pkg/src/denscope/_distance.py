"""Squared Euclidean distance matrices.

Computed from explicit coordinate differences rather than the usual
Gram-matrix expansion: the expansion loses up to half the mantissa on
nearby points, and the density contracts downstream are checked against
scalar oracles at 1e-12 relative error. Row blocks cap the temporary at
a few MB regardless of input size.
"""

from __future__ import annotations

import numpy as np

_BLOCK_ELEMS = 2_000_000  # floats per (block, m, f) difference temporary


def sq_dists(a: np.ndarray, b: np.ndarray | None = None) -> np.ndarray:
    """d[i][j] = ||a_i - b_j||^2 in float64. b defaults to a (then the
    result is symmetric with an exactly zero diagonal)."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"expected a 2D point array, got shape {a.shape}")
    symmetric = b is None
    b = a if symmetric else np.asarray(b, dtype=np.float64)
    if b.ndim != 2 or b.shape[1] != a.shape[1]:
        raise ValueError(f"point arrays disagree on dimension: {a.shape} vs {b.shape}")

    n, f = a.shape
    m = b.shape[0]
    out = np.empty((n, m), dtype=np.float64)
    block = max(1, _BLOCK_ELEMS // max(1, m * f))
    for lo in range(0, n, block):
        hi = min(lo + block, n)
        diff = a[lo:hi, None, :] - b[None, :, :]
        np.einsum("ijk,ijk->ij", diff, diff, out=out[lo:hi])
    if symmetric:
        np.fill_diagonal(out, 0.0)
    return out
