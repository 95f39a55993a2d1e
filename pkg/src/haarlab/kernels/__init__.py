"""Hot loops with a compiled core and a numpy fallback.

The compiled extension ``_ckernels`` is used when it was built and
``HAARLAB_PURE`` is not set; otherwise the numpy versions in ``_pure`` run.
Both backends return identical exact results for the subset searches;
Rademacher averages agree to rounding.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from haarlab.kernels import _pure

try:
    from haarlab.kernels import _ckernels
except ImportError:  # extension not built
    _ckernels = None

BACKENDS = {"pure": _pure}
if _ckernels is not None:
    BACKENDS["compiled"] = _ckernels

if _ckernels is not None and not os.environ.get("HAARLAB_PURE"):
    BACKEND = "compiled"
else:
    BACKEND = "pure"


def backend(name: str | None = None):
    name = name or BACKEND
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"kernel backend {name!r} is not available; have {sorted(BACKENDS)}") from None


def rademacher_average(A: np.ndarray, counts: np.ndarray, r: float, power: float,
                       which: str | None = None) -> np.ndarray:
    A = np.ascontiguousarray(A, dtype=np.float64)
    counts = np.ascontiguousarray(counts, dtype=np.int64)
    return backend(which).rademacher_average(A, counts, float(r), float(power))


def _padded(mat: np.ndarray) -> np.ndarray:
    # boolean (n, cells) -> per-cell member index lists padded with -1
    n, cells = mat.shape
    width = max(1, int(mat.sum(axis=0).max(initial=0)))
    out = np.full((cells, width), -1, dtype=np.int32)
    for c in range(cells):
        idx = np.nonzero(mat[:, c])[0]
        out[c, :idx.size] = idx
    return out


@dataclass
class C1Problem:
    """Integer data for exhaustive evaluation of the maximal-function ratio."""

    member_cells: np.ndarray   # bool (n, cells)
    weights: np.ndarray        # int64 (n,)
    cover_cells: np.ndarray    # bool (n, cells)
    _lists: tuple | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.member_cells.shape[0]

    def lists(self):
        if self._lists is None:
            self._lists = (_padded(self.member_cells), _padded(self.cover_cells))
        return self._lists

    def search(self, start: int, stop: int, which: str | None = None):
        name = which or BACKEND
        if name == "compiled":
            cm, sm = self.lists()
            return backend(name).c1_search(cm, np.ascontiguousarray(self.weights, dtype=np.int64),
                                           sm, start, stop)
        return _pure.c1_search(self.member_cells, self.weights, self.cover_cells, start, stop)

    def evaluate(self, B: np.ndarray):
        return _pure.c1_batch(self.member_cells, self.weights, self.cover_cells, B)


@dataclass
class CarlesonProblem:
    """Scaled containment weights for ``[[sigma(C)]] / [[C]]``."""

    image_weights: np.ndarray     # int64 (n, n)
    preimage_weights: np.ndarray  # int64 (n, n)

    @property
    def n(self) -> int:
        return self.image_weights.shape[0]

    def search(self, start: int, stop: int, which: str | None = None):
        return backend(which).carleson_ratio_search(
            np.ascontiguousarray(self.image_weights, dtype=np.int64),
            np.ascontiguousarray(self.preimage_weights, dtype=np.int64), start, stop)

    def evaluate(self, B: np.ndarray):
        return _pure.carleson_batch(self.image_weights, self.preimage_weights, B)


better = _pure._better
