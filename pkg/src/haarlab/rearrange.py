"""Rearrangements of dyadic intervals and the operators they induce."""
from __future__ import annotations

import math
import warnings
from typing import Iterable, Mapping, NamedTuple

import numpy as np

from haarlab import kernels
from haarlab.dyadic import Interval, IntervalCollection, all_intervals, level_intervals
from haarlab.haar import (DEFAULT_CAP, SCALAR, CapacityError, HaarVector, NormedSpace, bmo_norm)


class Rearrangement:
    """A finite injective map ``tau`` on dyadic intervals with inverse ``sigma``."""

    __slots__ = ("_tau", "_sigma", "depth")

    def __init__(self, pairs: Mapping[Interval, Interval] | Iterable, depth: int | None = None):
        items = pairs.items() if isinstance(pairs, Mapping) else pairs
        tau: dict[Interval, Interval] = {}
        sigma: dict[Interval, Interval] = {}
        for I, J in items:
            I = I if isinstance(I, Interval) else Interval(*I)
            J = J if isinstance(J, Interval) else Interval(*J)
            if I in tau:
                raise ValueError(f"interval {I} is mapped twice")
            if J in sigma:
                raise ValueError(f"not injective: {sigma[J]} and {I} both map to {J}")
            tau[I] = J
            sigma[J] = I
        levels = [I.level for I in tau] + [J.level for J in sigma]
        natural = max(levels, default=0)
        if depth is not None and natural > depth:
            raise ValueError(f"rearrangement reaches level {natural} beyond depth {depth}")
        self._tau = dict(sorted(tau.items()))
        self._sigma = dict(sorted(sigma.items()))
        self.depth = natural if depth is None else depth

    @classmethod
    def identity(cls, depth: int) -> "Rearrangement":
        return cls({I: I for I in all_intervals(depth)}, depth)

    def __call__(self, I: Interval) -> Interval:
        return self._tau[I]

    def tau(self, I: Interval) -> Interval:
        return self._tau[I]

    def sigma(self, J: Interval) -> Interval:
        return self._sigma[J]

    def items(self):
        return self._tau.items()

    def __len__(self) -> int:
        return len(self._tau)

    def __eq__(self, other) -> bool:
        return isinstance(other, Rearrangement) and self._tau == other._tau

    def __repr__(self) -> str:
        return f"Rearrangement({len(self._tau)} pairs, depth={self.depth})"

    @property
    def domain(self) -> IntervalCollection:
        return IntervalCollection(self._tau)

    @property
    def image(self) -> IntervalCollection:
        return IntervalCollection(self._sigma)

    def in_domain(self, I: Interval) -> bool:
        return I in self._tau

    def in_image(self, J: Interval) -> bool:
        return J in self._sigma

    def image_of(self, C) -> IntervalCollection:
        return IntervalCollection(self._tau[I] for I in C)

    def preimage_of(self, C) -> IntervalCollection:
        """``sigma(C)``; every member must lie in ``tau(D)``."""
        out = []
        for J in C:
            if J not in self._sigma:
                raise ValueError(f"interval {J} is not in the image of tau")
            out.append(self._sigma[J])
        return IntervalCollection(out)

    def inverse(self) -> "Rearrangement":
        return Rearrangement(self._sigma, self.depth)

    def is_measure_preserving(self) -> bool:
        return all(I.level == J.level for I, J in self._tau.items())

    def restrict(self, intervals) -> "Rearrangement":
        keep = set(intervals)
        return Rearrangement({I: J for I, J in self._tau.items() if I in keep}, self.depth)

    # -- text format ---------------------------------------------------------
    def dumps(self) -> str:
        lines = [f"depth {self.depth}"]
        lines += [f"{I} -> {J}" for I, J in self._tau.items()]
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "Rearrangement":
        depth = None
        pairs = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("depth"):
                depth = int(line.split()[1])
                continue
            try:
                a, b = line.split("->")
                pairs.append((Interval.parse(a), Interval.parse(b)))
            except ValueError as exc:
                raise ValueError(f"line {lineno}: cannot parse {raw!r}") from exc
        if depth is None:
            raise ValueError("rearrangement file lacks a 'depth N' header")
        return cls(pairs, depth)


def weight_exponent(I: Interval, J: Interval) -> int:
    """``log2(|I| / |J|)``."""
    return J.level - I.level


def apply_T(f: HaarVector, tau: Rearrangement, p: float) -> HaarVector:
    """``T_{tau,p} (x) Id_X``: coefficient ``x_I (|I|/|tau(I)|)**(1/p)`` moved to ``tau(I)``."""
    if not p > 0:
        raise ValueError("p must be positive")
    out = {}
    for I, x in f.items():
        if not tau.in_domain(I):
            raise ValueError(f"support interval {I} is outside the domain of tau")
        J = tau(I)
        out[J] = x * 2.0 ** (weight_exponent(I, J) / p)
    return HaarVector(out, f.space)


def apply_S_sigma(f: HaarVector, tau: Rearrangement) -> HaarVector:
    """``S_sigma``: ``h_J -> h_{sigma(J)}`` on ``tau(D)``, zero elsewhere."""
    f._require_scalar()
    return HaarVector({tau.sigma(J): x for J, x in f.items() if tau.in_image(J)}, f.space)


def apply_S_sigma_squares(sq: Mapping[Interval, object], tau: Rearrangement) -> dict:
    """``S_sigma`` acting on a table of squared coefficients (exact path)."""
    return {tau.sigma(J): c for J, c in sq.items() if tau.in_image(J)}


# -- operator norm search ------------------------------------------------------

class OpNormBound(NamedTuple):
    bound: float
    witness: HaarVector
    evaluations: int


class _Grid:
    """Cell-to-coefficient layout of a fixed support on a fixed grid."""

    def __init__(self, intervals: list[Interval]):
        N = max(I.level for I in intervals) + 1
        cells = 1 << N
        self.level = N
        self.k = len(intervals)
        members = [[] for _ in range(cells)]
        for j, I in enumerate(intervals):
            c = I.cells(N)
            mid = (c.start + c.stop) // 2
            for t in c:
                members[t].append((j, 1.0 if t < mid else -1.0))
        width = max(1, max(len(m) for m in members))
        self.idx = np.full((cells, width), self.k, dtype=np.int64)
        self.sign = np.zeros((cells, width))
        self.counts = np.zeros(cells, dtype=np.int64)
        self.incidence = np.zeros((cells, self.k))
        for t, mem in enumerate(members):
            self.counts[t] = len(mem)
            for s, (j, h) in enumerate(mem):
                self.idx[t, s] = j
                self.sign[t, s] = h
                self.incidence[t, j] = 1.0

    def sq_function_sq(self, X: np.ndarray, space: NormedSpace) -> np.ndarray:
        """Squared square function per cell for coefficient matrix ``X`` (k, m)."""
        if space.m == 1:
            return self.incidence @ (X[:, 0] ** 2)
        Xp = np.vstack([X, np.zeros((1, X.shape[1]))])
        A = self.sign[:, :, None] * Xp[self.idx]
        return kernels.rademacher_average(A, self.counts, space.r, 2.0)


class _RatioEvaluator:
    def __init__(self, tau: Rearrangement, p: float, space: NormedSpace, support: list[Interval]):
        self.p = p
        self.space = space
        self.support = support
        self.src = _Grid(support)
        self.dst = _Grid([tau(I) for I in support])
        self.w = np.array([2.0 ** (weight_exponent(I, tau(I)) / p) for I in support])
        self.count = 0

    def _norm(self, sq: np.ndarray) -> float:
        return float(np.mean(sq ** (self.p / 2.0)) ** (1.0 / self.p))

    def ratio(self, X: np.ndarray) -> float:
        self.count += 1
        den = self._norm(self.src.sq_function_sq(X, self.space))
        if den == 0.0:
            return -math.inf
        num = self._norm(self.dst.sq_function_sq(X * self.w[:, None], self.space))
        return num / den

    def batch(self, Xs: np.ndarray) -> np.ndarray:
        if self.space.m != 1:
            return np.array([self.ratio(X) for X in Xs])
        self.count += len(Xs)
        a2 = Xs[:, :, 0] ** 2
        s = (a2 @ self.src.incidence.T) ** (self.p / 2.0)
        t = ((a2 * self.w ** 2) @ self.dst.incidence.T) ** (self.p / 2.0)
        den = np.mean(s, axis=1) ** (1.0 / self.p)
        num = np.mean(t, axis=1) ** (1.0 / self.p)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(den > 0, num / np.where(den > 0, den, 1.0), -np.inf)


def _ascend(ev: _RatioEvaluator, X: np.ndarray, iterations: int, tol: float):
    best = ev.ratio(X)
    step = 0.5 * float(np.abs(X).max()) if X.any() else 1.0
    min_step = 1e-9 * max(step, 1e-300)
    k, m = X.shape
    for _ in range(iterations):
        cands = np.repeat(X[None], 2 * k * m, axis=0)
        flat = cands.reshape(2 * k * m, k * m)
        ar = np.arange(k * m)
        flat[2 * ar, ar] += step
        flat[2 * ar + 1, ar] -= step
        vals = ev.batch(cands)
        j = int(np.argmax(vals))
        if vals[j] > best * (1 + tol):
            X, best = cands[j].copy(), float(vals[j])
        else:
            step *= 0.5
            if step < min_step:
                break
    return best, X


def opnorm_lower(tau: Rearrangement, p: float, space: NormedSpace = SCALAR, *, restarts: int = 32,
                 iterations: int = 100, seed: int = 0, support: Iterable[Interval] | None = None,
                 cap: int = DEFAULT_CAP, tol: float = 1e-10) -> OpNormBound:
    """Certified lower bound for ``||T_{tau,p} (x) Id_X : H^p_X -> H^p_X||``.

    Every candidate is scored by its exact ratio ``||T f|| / ||f||``, so the
    returned value is attained by the returned witness.  Candidates are all
    basis vectors ``h_I`` and the end points of ``restarts`` seeded runs of
    best-move coordinate ascent with step halving.
    """
    if not 0 < p <= 2:
        raise ValueError("p must lie in (0, 2]")
    sup = sorted(support) if support is not None else list(tau.domain)
    if not sup:
        raise ValueError("rearrangement has an empty domain")
    for I in sup:
        if not tau.in_domain(I):
            raise ValueError(f"candidate support interval {I} is outside the domain of tau")
    if space.m > 1 and len(sup) > cap:
        sup = sup[:cap]
    ev = _RatioEvaluator(tau, p, space, sup)
    k, m = len(sup), space.m

    best, best_X = -math.inf, None
    for j in range(k):
        for i in range(m):
            X = np.zeros((k, m))
            X[j, i] = 1.0
            val = ev.ratio(X)
            if val > best:
                best, best_X = val, X
    for r in range(restarts):
        rng = np.random.default_rng([seed, r])
        X = rng.standard_normal((k, m))
        if r % 2:
            X *= rng.random(k)[:, None] < 0.5
            if not X.any():
                X[rng.integers(k)] = 1.0
        val, X = _ascend(ev, X, iterations, tol)
        if val > best:
            best, best_X = val, X
    witness = HaarVector({I: best_X[j] for j, I in enumerate(sup)}, space)
    return OpNormBound(best, witness, ev.count)


def bmo_opnorm_lower(tau: Rearrangement, witnesses: Iterable[HaarVector]) -> float:
    """``max ||S_sigma f||_BMO / ||f||_BMO`` over the given scalar witnesses."""
    best = 0.0
    for i, f in enumerate(witnesses):
        d = bmo_norm(f)
        if d == 0.0:
            warnings.warn(f"witness {i} is zero and was skipped", RuntimeWarning, stacklevel=2)
            continue
        best = max(best, bmo_norm(apply_S_sigma(f, tau)) / d)
    return best


# -- generators ----------------------------------------------------------------

GENERATOR_KINDS = ("levelperm", "blockshift", "randominjection", "carlesondistorter")


def generate(kind: str, depth: int, seed: int = 0) -> Rearrangement:
    """Seeded test rearrangements on ``D_{<=depth}``.

    ``levelperm``: independent random permutation of each level.
    ``blockshift``: swap the subtrees under two random same-level intervals.
    ``randominjection``: random bijection of ``D_{<=depth}``.
    ``carlesondistorter``: swap the chain ``[0, 2**-k)``, ``k < depth``, with
    randomly chosen disjoint level-``depth`` intervals outside ``[0, 2**-depth)``;
    the chain's images are then a disjoint family whose preimage is nested.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    rng = np.random.default_rng(seed)
    D = all_intervals(depth)
    if kind == "levelperm":
        pairs = {}
        for n in range(depth + 1):
            lvl = level_intervals(n)
            perm = rng.permutation(len(lvl))
            pairs.update({I: lvl[int(j)] for I, j in zip(lvl, perm)})
        return Rearrangement(pairs, depth)
    if kind == "blockshift":
        pairs = {I: I for I in D}
        n = int(rng.integers(1, depth + 1))
        a, b = (int(x) for x in rng.choice(1 << n, size=2, replace=False))
        for I in D:
            if I.level >= n:
                top = I.pos >> (I.level - n)
                off = I.pos - (top << (I.level - n))
                if top == a:
                    pairs[I] = Interval(I.level, (b << (I.level - n)) + off)
                elif top == b:
                    pairs[I] = Interval(I.level, (a << (I.level - n)) + off)
        return Rearrangement(pairs, depth)
    if kind == "randominjection":
        perm = rng.permutation(len(D))
        return Rearrangement({I: D[int(j)] for I, j in zip(D, perm)}, depth)
    if kind == "carlesondistorter":
        pairs = {I: I for I in D}
        chain = [Interval(k, 0) for k in range(depth)]
        pool = list(level_intervals(depth))[1:]
        picks = rng.choice(len(pool), size=len(chain), replace=False)
        for C, j in zip(chain, picks):
            T = pool[int(j)]
            pairs[C], pairs[T] = T, C
        return Rearrangement(pairs, depth)
    raise ValueError(f"unknown rearrangement kind {kind!r}; choose from {GENERATOR_KINDS}")
