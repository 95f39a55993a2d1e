"""Haar expansions, dyadic step functions, square functions and norms.

Coefficients are stored in L-infinity normalisation, ``f = sum_I x_I h_I``
with ``h_I = +1`` on the left half of ``I`` and ``-1`` on the right half.
For such ``f`` the pairing ``<f, h_I / |I|>`` is the stored coefficient.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

from haarlab import kernels
from haarlab.dyadic import Interval, IntervalCollection
from haarlab.rational import DyadicRational

DEFAULT_CAP = 20


class CapacityError(RuntimeError):
    """An exact computation was asked to exceed its configured size cap."""


@dataclass(frozen=True)
class NormedSpace:
    """``R^m`` with the ``l^r`` norm, ``1 <= r <= inf``."""

    r: float = 2.0
    m: int = 1

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("dimension must be positive")
        if not (self.r >= 1):
            raise ValueError("l^r exponent must lie in [1, inf]")
        object.__setattr__(self, "r", float(self.r))

    @classmethod
    def parse(cls, text: str) -> "NormedSpace":
        r, m = text.split(",")
        r = r.strip().lower()
        return cls(math.inf if r in ("inf", "infinity") else float(r), int(m))

    def __str__(self) -> str:
        r = "inf" if math.isinf(self.r) else f"{self.r:g}"
        return f"{r},{self.m}"

    def norm(self, v) -> float:
        v = np.atleast_1d(np.asarray(v, dtype=float))
        return float(kernels._pure.norm_pow(v, self.r, 1.0))


SCALAR = NormedSpace(2.0, 1)


class HaarVector:
    """Finitely supported map from dyadic intervals to vectors in a :class:`NormedSpace`."""

    __slots__ = ("space", "_coeffs", "depth")

    def __init__(self, coeffs: Mapping[Interval, object] | Iterable = (), space: NormedSpace = SCALAR,
                 depth: int | None = None):
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        store: dict[Interval, np.ndarray] = {}
        for I, x in items:
            I = I if isinstance(I, Interval) else Interval(*I)
            v = np.array(x, dtype=float).reshape(-1)
            if v.size != space.m:
                raise ValueError(f"coefficient at {I} has dimension {v.size}, space has {space.m}")
            if not v.any():
                continue
            if I in store:
                raise ValueError(f"duplicate coefficient for {I}")
            v.setflags(write=False)
            store[I] = v
        if depth is not None and store and max(I.level for I in store) > depth:
            raise ValueError(f"support exceeds depth bound {depth}")
        self.space = space
        self._coeffs = dict(sorted(store.items()))
        self.depth = depth

    # -- construction helpers ---------------------------------------------
    @classmethod
    def scalar(cls, coeffs: Mapping[Interval, float], depth: int | None = None) -> "HaarVector":
        return cls(coeffs, SCALAR, depth)

    @classmethod
    def basis(cls, I: Interval, space: NormedSpace = SCALAR, coeff=1.0) -> "HaarVector":
        x = np.zeros(space.m)
        x[:] = coeff
        return cls({I: x}, space)

    # -- access --------------------------------------------------------------
    @property
    def is_scalar(self) -> bool:
        return self.space.m == 1

    @property
    def support(self) -> IntervalCollection:
        return IntervalCollection(self._coeffs)

    @property
    def max_level(self) -> int:
        return max((I.level for I in self._coeffs), default=-1)

    def __len__(self) -> int:
        return len(self._coeffs)

    def __iter__(self):
        return iter(self._coeffs)

    def items(self):
        return self._coeffs.items()

    def __getitem__(self, I: Interval) -> np.ndarray:
        return self._coeffs.get(I, np.zeros(self.space.m))

    def coefficient(self, I: Interval) -> float:
        """Scalar coefficient (``m == 1`` only)."""
        return float(self[I][0])

    def scalar_coeffs(self) -> dict[Interval, float]:
        self._require_scalar()
        return {I: float(x[0]) for I, x in self._coeffs.items()}

    def matrix(self) -> tuple[tuple[Interval, ...], np.ndarray]:
        intervals = tuple(self._coeffs)
        X = np.array([self._coeffs[I] for I in intervals]).reshape(len(intervals), self.space.m)
        return intervals, X

    def _require_scalar(self):
        if not self.is_scalar:
            raise ValueError("operation needs a scalar (m = 1) Haar expansion")

    # -- algebra ---------------------------------------------------------------
    def __add__(self, other: "HaarVector") -> "HaarVector":
        if other.space != self.space:
            raise ValueError("spaces differ")
        out = {I: x.copy() for I, x in self._coeffs.items()}
        for I, x in other._coeffs.items():
            out[I] = out[I] + x if I in out else x.copy()
        return HaarVector(out, self.space)

    def __mul__(self, c: float) -> "HaarVector":
        return HaarVector({I: c * x for I, x in self._coeffs.items()}, self.space, self.depth)

    __rmul__ = __mul__

    def __neg__(self) -> "HaarVector":
        return self * -1.0

    def __sub__(self, other: "HaarVector") -> "HaarVector":
        return self + (-other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, HaarVector):
            return NotImplemented
        return (self.space == other.space and self._coeffs.keys() == other._coeffs.keys()
                and all(np.array_equal(x, other._coeffs[I]) for I, x in self._coeffs.items()))

    def allclose(self, other: "HaarVector", rtol: float = 1e-12, atol: float = 0.0) -> bool:
        if self.space != other.space or self._coeffs.keys() != other._coeffs.keys():
            return False
        return all(np.allclose(x, other._coeffs[I], rtol=rtol, atol=atol) for I, x in self._coeffs.items())

    def restrict(self, intervals) -> "HaarVector":
        keep = set(intervals)
        return HaarVector({I: x for I, x in self._coeffs.items() if I in keep}, self.space)

    def map_coeffs(self, fn) -> "HaarVector":
        return HaarVector({I: fn(I, x) for I, x in self._coeffs.items()}, self.space)

    def __repr__(self) -> str:
        body = ", ".join(f"{I}: {x.tolist() if self.space.m > 1 else float(x[0])}"
                         for I, x in list(self._coeffs.items())[:6])
        more = ", ..." if len(self._coeffs) > 6 else ""
        return f"HaarVector({{{body}{more}}}, space={self.space})"


class StepFunction:
    """Function on [0, 1) constant on the ``2**level`` cells of a dyadic grid."""

    __slots__ = ("level", "values")

    def __init__(self, level: int, values):
        v = np.asarray(values, dtype=float)
        if v.shape != (1 << level,):
            raise ValueError(f"grid level {level} needs {1 << level} values, got shape {v.shape}")
        self.level = level
        self.values = v

    @classmethod
    def zeros(cls, level: int) -> "StepFunction":
        return cls(level, np.zeros(1 << level))

    def integral(self) -> float:
        return float(self.values.sum()) / (1 << self.level)

    def integral_exact(self) -> DyadicRational:
        """Exact integral; every binary64 value is a dyadic rational."""
        total = DyadicRational(0)
        for x in self.values:
            if x:
                total = total + DyadicRational.from_float(float(x))
        return DyadicRational(total.num, total.exp + self.level)

    def refine(self, level: int) -> "StepFunction":
        if level < self.level:
            raise ValueError("can only refine to a finer grid")
        return StepFunction(level, np.repeat(self.values, 1 << (level - self.level)))

    def sup(self) -> float:
        return float(self.values.max(initial=0.0))

    def on(self, I: Interval) -> np.ndarray:
        """Values on the cells of ``I``."""
        c = I.cells(self.level)
        return self.values[c.start:c.stop]

    def __repr__(self) -> str:
        return f"StepFunction(level={self.level}, values={self.values!r})"


def haar_step(I: Interval, grid_level: int) -> StepFunction:
    """``h_I`` sampled on the level-``grid_level`` grid."""
    if grid_level < I.level + 1:
        raise ValueError(f"grid level {grid_level} too coarse for h_{I}; need >= {I.level + 1}")
    v = np.zeros(1 << grid_level)
    c = I.cells(grid_level)
    mid = (c.start + c.stop) // 2
    v[c.start:mid] = 1.0
    v[mid:c.stop] = -1.0
    return StepFunction(grid_level, v)


def _grid_level(f: HaarVector, grid_level: int | None) -> int:
    need = f.max_level + 1
    if grid_level is None:
        return max(need, 0)
    if grid_level < need:
        raise ValueError(f"grid level {grid_level} too coarse; support needs {need}")
    return grid_level


def square_function_sq(coeff_sq: Mapping[Interval, float], grid_level: int) -> np.ndarray:
    """``sum_I c_I 1_I`` on the grid for nonnegative weights ``c_I``."""
    out = np.zeros(1 << grid_level)
    by_level: dict[int, list] = {}
    for I, c in coeff_sq.items():
        by_level.setdefault(I.level, []).append((I.pos, c))
    for n, entries in by_level.items():
        e = np.zeros(1 << n)
        pos, vals = zip(*entries)
        e[list(pos)] = vals
        out += np.repeat(e, 1 << (grid_level - n))
    return out


def scalar_square_function(f: HaarVector, grid_level: int | None = None) -> StepFunction:
    """Dyadic square function ``S(f) = (sum_I a_I**2 1_I)**(1/2)``."""
    if not f.is_scalar:
        raise ValueError("scalar_square_function needs m = 1; use vector_square_function")
    N = _grid_level(f, grid_level)
    sq = square_function_sq({I: float(x[0]) ** 2 for I, x in f.items()}, N)
    return StepFunction(N, np.sqrt(sq))


def chain_arrays(f: HaarVector, grid_level: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-cell signed coefficient vectors ``h_I(t) x_I`` of the intervals containing the cell.

    Returns ``A`` of shape ``(cells, k, m)`` with the active rows packed first
    and ``counts`` giving the number of active rows per cell.
    """
    cells, m = 1 << grid_level, f.space.m
    levels = sorted({I.level for I in f})
    slot = {n: j for j, n in enumerate(levels)}
    A = np.zeros((cells, max(len(levels), 1), m))
    present = np.zeros((cells, max(len(levels), 1)), dtype=bool)
    for I, x in f.items():
        c = I.cells(grid_level)
        mid = (c.start + c.stop) // 2
        j = slot[I.level]
        A[c.start:mid, j] = x
        A[mid:c.stop, j] = -x
        present[c.start:c.stop, j] = True
    order = np.argsort(~present, axis=1, kind="stable")
    A = np.take_along_axis(A, order[:, :, None], axis=1)
    counts = present.sum(axis=1).astype(np.int64)
    return A, counts


def vector_square_function(f: HaarVector, mode: str = "exact", *, samples: int = 10_000,
                           seed: int = 0, cap: int = DEFAULT_CAP, grid_level: int | None = None,
                           return_stderr: bool = False):
    """Rademacher square function ``(E ||sum_I r_I x_I h_I(t)||**2)**(1/2)``.

    ``mode="exact"`` averages over every sign pattern.  Signs of intervals
    not containing ``t`` leave the sum at ``t`` unchanged, so each cell only
    enumerates the patterns of its own chain of intervals; the result equals
    the average over all ``2**len(support)`` patterns.  ``cap`` bounds the
    support size of vector expansions; scalar ones need no enumeration.

    ``mode="montecarlo"`` draws ``samples`` sign vectors (one sign per
    support interval, support in canonical order) with
    ``numpy.random.default_rng(seed).integers(0, 2, (samples, k))``.  With
    ``return_stderr=True`` the standard error of the mean squared norm per
    cell is returned as a second value.
    """
    N = _grid_level(f, grid_level)
    if mode in ("exact", "ex"):
        if not f.is_scalar and len(f) > cap:
            raise CapacityError(f"exact Rademacher average over {len(f)} intervals exceeds cap {cap}; "
                                f"use mode='montecarlo'")
        if not len(f):
            out = StepFunction.zeros(N)
            return (out, np.zeros(1 << N)) if return_stderr else out
        if f.is_scalar:
            S = scalar_square_function(f, N)
        else:
            A, counts = chain_arrays(f, N)
            S = StepFunction(N, np.sqrt(kernels.rademacher_average(A, counts, f.space.r, 2.0)))
        return (S, np.zeros(1 << N)) if return_stderr else S
    if mode not in ("montecarlo", "mc"):
        raise ValueError(f"unknown square-function mode {mode!r}")
    if samples < 2:
        raise ValueError("Monte Carlo needs at least two samples")
    intervals, X = f.matrix()
    k = len(intervals)
    if k == 0:
        out = StepFunction.zeros(N)
        return (out, np.zeros(1 << N)) if return_stderr else out
    rng = np.random.default_rng(seed)
    signs = rng.integers(0, 2, size=(samples, k), dtype=np.int8) * 2 - 1
    Hm = np.zeros((1 << N, k))
    for j, I in enumerate(intervals):
        Hm[:, j] = haar_step(I, N).values
    total = np.zeros(1 << N)
    total_sq = np.zeros(1 << N)
    chunk = max(1, (1 << 21) // ((1 << N) * f.space.m))
    for lo in range(0, samples, chunk):
        s = signs[lo:lo + chunk].astype(float)
        V = np.einsum("sk,ck,km->scm", s, Hm, X)
        q = kernels._pure.norm_pow(V, f.space.r, 2.0)
        total += q.sum(axis=0)
        total_sq += (q * q).sum(axis=0)
    mean = total / samples
    var = np.maximum(total_sq / samples - mean * mean, 0.0) * samples / (samples - 1)
    S = StepFunction(N, np.sqrt(mean))
    if return_stderr:
        return S, np.sqrt(var / samples)
    return S


def lp_norm(g: StepFunction, p: float) -> float:
    """``(integral |g|**p)**(1/p)`` for ``p > 0``; ``p = inf`` gives the sup."""
    if not p > 0:
        raise ValueError("L^p exponent must be positive")
    if math.isinf(p):
        return float(np.abs(g.values).max(initial=0.0))
    v = np.abs(g.values)
    return float(np.mean(v ** p) ** (1.0 / p))


def hp_norm(f: HaarVector, p: float, mode: str = "exact", **kw) -> float:
    """``||f||_{H^p_X} = ||SS(f)||_{L^p}``."""
    if not p > 0:
        raise ValueError("H^p exponent must be positive")
    if f.is_scalar and mode in ("exact", "ex"):
        return lp_norm(scalar_square_function(f, kw.get("grid_level")), p)
    return lp_norm(vector_square_function(f, mode, **kw), p)


def _energy_by_interval(sq: Mapping[Interval, object], zero) -> dict[Interval, object]:
    # sum_{J <= I} sq_J |J| for every I that is a member or an ancestor of one
    acc: dict[Interval, object] = {}
    for J, c in sq.items():
        e = c * _measure(J, zero)
        acc[J] = acc.get(J, zero) + e
        for A in J.ancestors():
            acc[A] = acc.get(A, zero) + e
    return acc


def _measure(I: Interval, zero):
    return Fraction(1, 1 << I.level) if isinstance(zero, Fraction) else 2.0 ** -I.level


def bmo_norm_sq_from_squares(sq: Mapping[Interval, object], exact: bool = True):
    """``sup_I (1/|I|) sum_{J <= I} sq_J |J|`` from squared coefficients.

    With ``exact=True`` the inputs are taken as rationals and the result is
    exact (a :class:`DyadicRational` when it is dyadic).
    """
    zero = Fraction(0) if exact else 0.0
    sq = {I: (Fraction(c) if exact and not isinstance(c, DyadicRational) else
              (c.as_fraction() if exact else float(c))) for I, c in sq.items() if c}
    if not sq:
        return DyadicRational(0) if exact else 0.0
    best = zero
    for I, e in _energy_by_interval(sq, zero).items():
        v = e / _measure(I, zero)
        if v > best:
            best = v
    if exact and best.denominator & (best.denominator - 1) == 0:
        return DyadicRational.coerce(best)
    return best


def bmo_norm(f: HaarVector) -> float:
    """``||f||_BMO`` (scalar); the supremum runs over members and ancestors of the support."""
    f._require_scalar()
    return math.sqrt(bmo_norm_sq_from_squares({I: float(x[0]) ** 2 for I, x in f.items()},
                                              exact=False))


def l2_norm_sq_from_squares(sq: Mapping[Interval, object]):
    """Exact ``||sum_I c_I h_I||_2**2 = sum_I c_I**2 |I|``."""
    total = Fraction(0)
    for I, c in sq.items():
        c = c.as_fraction() if isinstance(c, DyadicRational) else Fraction(c)
        total += c * Fraction(1, 1 << I.level)
    if total.denominator & (total.denominator - 1) == 0:
        return DyadicRational.coerce(total)
    return total


def l2_norm(f: HaarVector) -> float:
    """``||f||_{L^2}`` of a scalar expansion (Parseval)."""
    f._require_scalar()
    return math.sqrt(sum(float(x[0]) ** 2 * 2.0 ** -I.level for I, x in f.items()))


def is_atom(f: HaarVector, p: float, I: Interval, cap: int = DEFAULT_CAP, rtol: float = 1e-12) -> bool:
    """Dyadic ``H^p_X`` atom test: ``supp SS(f)`` inside ``I`` and ``sup SS(f) <= |I|**(-1/p)``."""
    if not all(I.contains(J) for J in f):
        return False
    if not len(f):
        return True
    bound = 2.0 ** (I.level / p)
    return vector_square_function(f, "exact", cap=cap).sup() <= bound * (1 + rtol)


def rademacher_average(vectors, space: NormedSpace, power: float = 1.0) -> float:
    """Exact ``E ||sum_j r_j v_j||**power`` over all sign patterns."""
    V = np.asarray(vectors, dtype=float).reshape(-1, space.m)
    if len(V) > 62:
        raise CapacityError("too many vectors for exact sign enumeration")
    return float(kernels.rademacher_average(V[None], np.array([len(V)]), space.r, power)[0])


def bochner_lp_norm(values: np.ndarray, space: NormedSpace, p: float) -> float:
    """``(integral ||F(t)||**p dt)**(1/p)`` for a vector step function given per cell."""
    V = np.asarray(values, dtype=float)
    norms = kernels._pure.norm_pow(V.reshape(V.shape[0], space.m), space.r, 1.0)
    return float(np.mean(norms ** p) ** (1.0 / p))


def vector_step_values(f: HaarVector, grid_level: int | None = None) -> np.ndarray:
    """Pointwise values ``sum_I x_I h_I(t)`` per cell, shape ``(cells, m)``."""
    N = _grid_level(f, grid_level)
    out = np.zeros((1 << N, f.space.m))
    for I, x in f.items():
        out += haar_step(I, N).values[:, None] * x[None, :]
    return out
