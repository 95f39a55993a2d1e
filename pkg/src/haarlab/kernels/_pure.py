"""Numpy implementations of the inner loops (fallback for the compiled core)."""
from __future__ import annotations

from functools import lru_cache

import numpy as np

_MAX_ELEMS = 1 << 22


@lru_cache(maxsize=32)
def sign_patterns(k: int) -> np.ndarray:
    """All ``2**(k-1)`` sign vectors of length ``k`` with the first sign +1."""
    if k == 0:
        return np.ones((1, 0))
    g = np.arange(1 << (k - 1), dtype=np.int64)[:, None]
    bits = (g >> np.arange(k - 1, dtype=np.int64)[None, :]) & 1
    pat = np.ones((g.shape[0], k))
    pat[:, 1:] = 1.0 - 2.0 * bits
    return pat


def norm_pow(V: np.ndarray, r: float, power: float) -> np.ndarray:
    """``||v||_r ** power`` along the last axis."""
    if np.isinf(r):
        n = np.abs(V).max(axis=-1) if V.shape[-1] else np.zeros(V.shape[:-1])
        return n ** power
    if r == 2.0:
        sq = np.einsum("...i,...i->...", V, V)
        return sq if power == 2.0 else sq ** (0.5 * power)
    if r == 1.0:
        return np.abs(V).sum(axis=-1) ** power
    return (np.abs(V) ** r).sum(axis=-1) ** (power / r)


def rademacher_average(A: np.ndarray, counts: np.ndarray, r: float, power: float) -> np.ndarray:
    cells, _, m = A.shape
    out = np.zeros(cells)
    for k in np.unique(counts):
        k = int(k)
        if k == 0:
            continue
        idx = np.nonzero(counts == k)[0]
        P = sign_patterns(k)
        step = max(1, _MAX_ELEMS // (P.shape[0] * max(m, 1)))
        for lo in range(0, idx.size, step):
            sel = idx[lo:lo + step]
            V = np.einsum("pk,ckm->cpm", P, A[sel, :k, :])
            out[sel] = norm_pow(V, r, power).mean(axis=1)
    return out


def lex_less(a: int, b: int) -> bool:
    """Sorted-index tuple of subset ``a`` precedes that of ``b``."""
    d = a ^ b
    if d == 0:
        return False
    x = (d & -d).bit_length() - 1
    if (a >> x) & 1:
        return (b >> (x + 1)) != 0
    return (a >> (x + 1)) == 0


def _better(n1, d1, m1, n2, d2, m2) -> bool:
    lhs, rhs = n1 * d2, n2 * d1
    if lhs != rhs:
        return lhs > rhs
    return lex_less(m1, m2)


def masks_to_bool(masks: np.ndarray, n: int) -> np.ndarray:
    return ((masks[:, None] >> np.arange(n, dtype=np.uint64)[None, :]) & np.uint64(1)).astype(bool)


def c1_batch(member_cells: np.ndarray, weights: np.ndarray, cover_cells: np.ndarray,
             B: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Scaled ``(integral, cover)`` for every row of the boolean subset matrix ``B``.

    ``member_cells[i, c]`` marks cell ``c`` inside member ``i``;
    ``cover_cells[i, c]`` marks cell ``c`` inside the sigma-image of ``i``.
    """
    Wc = np.where(member_cells, weights[:, None], 0).astype(np.int64)
    n, cells = Wc.shape
    num = np.empty(B.shape[0], dtype=np.int64)
    den = np.empty(B.shape[0], dtype=np.int64)
    step = max(1, _MAX_ELEMS // max(1, n * cells))
    Sc = cover_cells.astype(np.int32)
    for lo in range(0, B.shape[0], step):
        b = B[lo:lo + step]
        vals = np.where(b[:, :, None], Wc[None, :, :], 0)
        num[lo:lo + step] = vals.max(axis=1).sum(axis=1) if n else 0
        den[lo:lo + step] = ((b.astype(np.int32) @ Sc) > 0).sum(axis=1)
    return num, den


def carleson_batch(image_weights: np.ndarray, preimage_weights: np.ndarray,
                   B: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Scaled ``([[sigma(C)]], [[C]])`` for every row of ``B``."""
    Bi = B.astype(np.int64)
    s_img = Bi @ image_weights.T
    s_pre = Bi @ preimage_weights.T
    den = np.where(B, s_img, 0).max(axis=1)
    num = np.where(B, s_pre, 0).max(axis=1)
    return num, den


def _best_of(num: np.ndarray, den: np.ndarray, masks: np.ndarray):
    ok = den > 0
    if not ok.any():
        return -1, 1, 0
    ratio = np.where(ok, num / np.where(ok, den, 1), -np.inf)
    top = ratio.max()
    cand = np.nonzero(ratio >= top * (1 - 1e-9))[0]
    best = None
    for i in cand:
        item = (int(num[i]), int(den[i]), int(masks[i]))
        if best is None or _better(*item, *best):
            best = item
    return best


def c1_search(member_cells, weights, cover_cells, start: int, stop: int):
    n = member_cells.shape[0]
    masks = np.arange(start, stop, dtype=np.uint64)
    num, den = c1_batch(member_cells, weights, cover_cells, masks_to_bool(masks, n))
    return _best_of(num, den, masks)


def carleson_ratio_search(image_weights, preimage_weights, start: int, stop: int):
    n = image_weights.shape[0]
    masks = np.arange(start, stop, dtype=np.uint64)
    num, den = carleson_batch(image_weights, preimage_weights, masks_to_bool(masks, n))
    return _best_of(num, den, masks)
