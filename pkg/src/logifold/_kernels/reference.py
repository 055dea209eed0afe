"""NumPy reference implementations of the hot entropy kernels.

All functions work in natural log; callers rescale by 1/ln(base).  The
convention 0*log(0) = 0 applies throughout, and a cross-entropy term with
y_a > 0 against g_a = 0 yields +inf.

The pairwise sums exploit the factorization
    sum_{l,r} sum_a P[l,a] * log(P[r,a]) = sum_a colsum(P)[a] * colsum(log P)[a]
which is exact whenever no column mixes zero and positive entries; mixed
columns force the whole pair sum to +inf, and all-zero columns contribute
nothing, so the factorized form covers every finite case.
"""

import numpy as np

BACKEND = "numpy"


def row_entropy_nats(p):
    """Entropy of each row of an (n, t) matrix, in nats."""
    p = np.asarray(p, dtype=np.float64)
    terms = np.where(p > 0.0, p * np.log(np.where(p > 0.0, p, 1.0)), 0.0)
    return -terms.sum(axis=-1)


def row_cross_entropy_nats(y, g):
    """Cross entropy of matching rows of two (n, t) matrices, in nats."""
    y = np.asarray(y, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    pos = y > 0.0
    bad = pos & (g <= 0.0)
    safe_g = np.where(g > 0.0, g, 1.0)
    out = -np.where(pos, y * np.log(safe_g), 0.0).sum(axis=-1)
    out = np.where(bad.any(axis=-1), np.inf, out)
    return out


def pair_cross_total_nats(p):
    """Ordered-pair cross-entropy sum sum_{l,r} h(P[l], P[r]) of a (k, t)
    matrix, diagonal included, in nats."""
    p = np.asarray(p, dtype=np.float64)
    pos = p > 0.0
    col_pos = pos.any(axis=0)
    col_zero = (~pos).any(axis=0)
    if bool(np.any(col_pos & col_zero)):
        return float("inf")
    q = p[:, col_pos]
    if q.shape[1] == 0:
        return 0.0
    return float(-np.dot(q.sum(axis=0), np.log(q).sum(axis=0)))


def batch_pair_cross_total_nats(p):
    """Per-sample ordered-pair sums of a (k, n, t) prediction stack, in nats.

    Returns an (n,) array; entry i is sum_{l,r} h(P[l,i], P[r,i]).
    """
    p = np.asarray(p, dtype=np.float64)
    pos = p > 0.0
    col_pos = pos.any(axis=0)
    col_zero = (~pos).any(axis=0)
    bad = (col_pos & col_zero).any(axis=-1)
    logs = np.log(np.where(pos, p, 1.0))
    out = -(p.sum(axis=0) * logs.sum(axis=0)).sum(axis=-1)
    out[bad] = np.inf
    return out
