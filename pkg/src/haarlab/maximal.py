"""The maximal function ``mu_H``, the constant ``C_1`` and related witnesses.

For ``H`` inside ``tau(D)``,

    mu_H(t) = sup_{I in H} |sigma(I)| / |I| * 1_I(t),    sigma = tau^{-1},

and ``C_1`` is the supremum over nonempty ``H`` of ``int mu_H / |sigma(H)*|``.
At finite depth the supremum runs over the finitely many subsets of
``tau(D)``; values reported here are these truncated suprema.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from haarlab import kernels
from haarlab._parallel import ordered_map
from haarlab.dyadic import Interval, IntervalCollection, cover_measure, g1_all
from haarlab.haar import SCALAR, CapacityError, HaarVector
from haarlab.rational import DyadicRational, format_exact
from haarlab.rearrange import Rearrangement

EXACT_CAP = 20
ENUM_LIMIT = 22
GREEDY_RESTARTS = 64
_CHUNK = 1 << 14
_MAX_GRID = 15


def _members_in_image(H, tau: Rearrangement) -> list[Interval]:
    out = []
    for I in H:
        if not tau.in_image(I):
            raise ValueError(f"interval {I} is not in tau(D)")
        out.append(I)
    return sorted(out)


def _log_ratio(I: Interval, tau: Rearrangement) -> int:
    # log2(|sigma(I)| / |I|)
    return I.level - tau.sigma(I).level


def mu(H, tau: Rearrangement) -> "StepFunction":
    """``mu_H`` on the grid of the finest member of ``H`` (zero off ``H*``)."""
    from haarlab.haar import StepFunction

    members = _members_in_image(H, tau)
    N = max((I.level for I in members), default=0)
    best = np.full(1 << N, -math.inf)
    for I in members:
        c = I.cells(N)
        np.maximum(best[c.start:c.stop], _log_ratio(I, tau), out=best[c.start:c.stop])
    vals = np.where(np.isfinite(best), np.exp2(np.where(np.isfinite(best), best, 0.0)), 0.0)
    return StepFunction(N, vals)


def resolve(H, tau: Rearrangement) -> IntervalCollection:
    """The resolving collection ``B``: per cell, the deepest member attaining ``mu_H``."""
    members = _members_in_image(H, tau)
    if not members:
        return IntervalCollection()
    N = max(I.level for I in members)
    best = np.full(1 << N, np.iinfo(np.int64).min, dtype=np.int64)
    choice = np.full(1 << N, -1, dtype=np.int64)
    # canonical order is shallow-to-deep, so ">=" keeps the deepest among ties
    for j, I in enumerate(members):
        c = I.cells(N)
        v = _log_ratio(I, tau)
        seg = best[c.start:c.stop]
        take = v >= seg
        seg[take] = v
        choice[c.start:c.stop][take] = j
    return IntervalCollection(members[int(j)] for j in np.unique(choice[choice >= 0]))


def mu_integral_from_resolution(B, tau: Rearrangement) -> DyadicRational:
    """``sum_{K in B} |sigma(K)| (|K| - |G_1(K|B)*|) / |K|``."""
    total = DyadicRational(0)
    children = g1_all(B)
    for K, kids in children.items():
        gap = K.measure - cover_measure(kids)
        total = total + tau.sigma(K).measure * gap / K.measure
    return total


def mu_integral(H, tau: Rearrangement) -> DyadicRational:
    """Exact ``int_0^1 mu_H`` through the resolving collection."""
    return mu_integral_from_resolution(resolve(H, tau), tau)


def sigma_cover(H, tau: Rearrangement) -> DyadicRational:
    return cover_measure(tau.preimage_of(H))


def witness_squares(B) -> dict[Interval, DyadicRational]:
    """``c_K**2 = (|K| - |G_1(K|B)*|) / |K|`` for ``K`` in ``B``."""
    children = g1_all(B)
    if not children:
        raise ValueError("witness needs a nonempty collection")
    return {K: (K.measure - cover_measure(children[K])) / K.measure for K in sorted(children)}


def witness_f(B) -> HaarVector:
    """``f = sum_{K in B} c_K h_K`` with ``c_K`` the positive root of :func:`witness_squares`."""
    return HaarVector({K: math.sqrt(float(c)) for K, c in witness_squares(B).items()}, SCALAR)


@dataclass(frozen=True)
class MaximalReport:
    H: IntervalCollection
    B: IntervalCollection
    integral: DyadicRational
    sigma_cover: DyadicRational
    ratio: Fraction

    def to_dict(self) -> dict:
        return {
            "H": str(self.H), "B": str(self.B),
            "integral": format_exact(self.integral),
            "sigma_cover": format_exact(self.sigma_cover),
            "ratio": format_exact(self.ratio),
        }


def maximal_report(H, tau: Rearrangement) -> MaximalReport:
    H = IntervalCollection(H)
    B = resolve(H, tau)
    integral = mu_integral_from_resolution(B, tau)
    cover = sigma_cover(H, tau)
    ratio = Fraction(integral.as_fraction() / cover.as_fraction()) if cover else Fraction(0)
    return MaximalReport(H, B, integral, cover, ratio)


# -- subset suprema ------------------------------------------------------------

def _grid_depth(tau: Rearrangement, members: list[Interval]) -> int:
    D = max([I.level for I in members] + [tau.sigma(I).level for I in members])
    if D > _MAX_GRID:
        raise CapacityError(f"intervals reach level {D}; subset search supports level <= {_MAX_GRID}")
    return D


def c1_problem(tau: Rearrangement, members: list[Interval]) -> tuple[kernels.C1Problem, int]:
    D = _grid_depth(tau, members)
    n, cells = len(members), 1 << D
    mc = np.zeros((n, cells), dtype=bool)
    sc = np.zeros((n, cells), dtype=bool)
    w = np.zeros(n, dtype=np.int64)
    for i, I in enumerate(members):
        c = I.cells(D)
        mc[i, c.start:c.stop] = True
        s = tau.sigma(I).cells(D)
        sc[i, s.start:s.stop] = True
        w[i] = 1 << (_log_ratio(I, tau) + D)
    return kernels.C1Problem(mc, w, sc), D


def carleson_problem(tau: Rearrangement, members: list[Interval]) -> tuple[kernels.CarlesonProblem, int]:
    D = _grid_depth(tau, members)
    n = len(members)
    img = np.zeros((n, n), dtype=np.int64)
    pre = np.zeros((n, n), dtype=np.int64)
    sig = [tau.sigma(I) for I in members]
    for i in range(n):
        for j in range(n):
            if members[i].contains(members[j]):
                img[i, j] = 1 << (D - members[j].level + members[i].level)
            if sig[i].contains(sig[j]):
                pre[i, j] = 1 << (D - sig[j].level + sig[i].level)
    return kernels.CarlesonProblem(img, pre), D


def _exhaustive(problem, n: int, which: str | None):
    total = 1 << n
    starts = range(1, total, _CHUNK)
    results = ordered_map(lambda s: problem.search(s, min(s + _CHUNK, total), which), starts)
    best = None
    for item in results:
        if item[0] < 0:
            continue
        if best is None or kernels.better(*item, *best):
            best = item
    return best


def _branch_and_bound(problem: kernels.C1Problem):
    """Exact depth-first search over subsets in lexicographic order with pruning.

    Subsets are visited in the order of their sorted index tuples, so a
    later tie never displaces the incumbent and a branch may be cut as soon
    as it provably cannot beat the incumbent strictly.  For a partial set
    ``S`` and candidates ``j >= i``, with ``lambda = best``:

        N(S u A) - lambda D(S u A)
            <= N(S) - lambda D(S) + sum_j max(0, gain_j - lambda cost_j)

    where ``gain_j`` is the gain of adding ``j`` alone (``N`` is a maximum
    coverage, hence submodular) and ``cost_j`` charges each newly covered
    cell ``1/mult`` with ``mult`` the number of candidates covering it.
    """
    Wc = np.where(problem.member_cells, problem.weights[:, None], 0).astype(np.int64)
    Sc = problem.cover_cells
    n, cells = Wc.shape
    mult = np.zeros((n + 1, cells), dtype=np.int64)
    for j in range(n - 1, -1, -1):
        mult[j] = mult[j + 1] + Sc[j]
    best = [None]

    def can_improve(i, cur, cov, num, den) -> bool:
        if best[0] is None:
            return True
        bn, bd, _ = best[0]
        gains = np.maximum(Wc[i:] - cur[None, :], 0).sum(axis=1)
        fresh = Sc[i:] & ~cov[None, :]
        m = np.maximum(mult[i], 1)
        costs = (fresh / m[None, :]).sum(axis=1)
        base = num * bd - bn * den
        terms = gains * bd - bn * costs
        total = base + np.maximum(terms, 0.0).sum()
        scale = abs(base) + bn * cells + bd * float(gains.sum()) + 1.0
        if total > 1e-9 * scale:
            return True
        if total < -1e-9 * scale:
            return False
        # too close to call in floating point: redo exactly
        exact = Fraction(int(base))
        for r in range(n - i):
            c = sum((Fraction(1, int(m[k])) for k in np.nonzero(fresh[r])[0]), Fraction(0))
            t = int(gains[r]) * bd - bn * c
            if t > 0:
                exact += t
        return exact > 0

    def dfs(i, cur, cov, num, den, mask):
        for j in range(i, n):
            if not can_improve(j, cur, cov, num, den):
                break
            ncur = np.maximum(cur, Wc[j])
            ncov = cov | Sc[j]
            item = (int(ncur.sum()), int(ncov.sum()), mask | (1 << j))
            if best[0] is None or kernels.better(*item, *best[0]):
                best[0] = item
            dfs(j + 1, ncur, ncov, item[0], item[1], item[2])

    dfs(0, np.zeros(cells, dtype=np.int64), np.zeros(cells, dtype=bool), 0, 0, 0)
    return best[0]


def _greedy(problem, n: int, seed: int, restarts: int):
    """Seeded add/remove-one local search; returns the best ``(num, den, mask)`` found."""

    def score(rows: np.ndarray):
        num, den = problem.evaluate(rows)
        return num, den

    def mask_of(row) -> int:
        return sum(1 << int(i) for i in np.nonzero(row)[0])

    best = None
    # singletons always give ratio 1 and seed the incumbent deterministically
    eye = np.eye(n, dtype=bool)
    num, den = score(eye)
    for i in range(n):
        item = (int(num[i]), int(den[i]), 1 << i)
        if den[i] > 0 and (best is None or kernels.better(*item, *best)):
            best = item

    def run(r: int):
        rng = np.random.default_rng([seed, r])
        cur = rng.random(n) < rng.uniform(0.1, 0.9)
        if not cur.any():
            cur[rng.integers(n)] = True
        cnum, cden = score(cur[None])
        here = (int(cnum[0]), int(cden[0]), mask_of(cur))
        while True:
            flips = np.repeat(cur[None], n, axis=0) ^ eye
            ok = flips.any(axis=1)
            fnum, fden = score(flips)
            move = None
            for i in np.nonzero(ok)[0]:
                if fden[i] == 0:
                    continue
                item = (int(fnum[i]), int(fden[i]), mask_of(flips[i]))
                if item[0] * here[1] > here[0] * item[1] and (move is None or kernels.better(*item, *move[0])):
                    move = (item, i)
            if move is None:
                return here
            here = move[0]
            cur = flips[move[1]]

    for item in ordered_map(run, range(restarts)):
        if kernels.better(*item, *best):
            best = item
    return best


def _subset_sup(kind: str, tau: Rearrangement, mode: str, max_intervals: int, seed: int,
                restarts: int, which: str | None, algorithm: str | None = None):
    members = list(tau.image)
    if not members:
        raise ValueError("rearrangement has an empty image")
    n = len(members)
    build = c1_problem if kind == "c1" else carleson_problem
    problem, D = build(tau, members)
    if mode == "exact":
        if n > max_intervals:
            raise CapacityError(f"exact enumeration over {n} intervals exceeds cap {max_intervals}; "
                                f"use mode='greedy'")
        if algorithm not in (None, "enumerate", "bnb"):
            raise ValueError(f"unknown exact algorithm {algorithm!r}")
        if kind == "c1" and (algorithm == "bnb" or (algorithm is None and n > ENUM_LIMIT)):
            num, den, mask = _branch_and_bound(problem)
        else:
            if n > 62:
                raise CapacityError("exact enumeration is limited to 62 intervals")
            num, den, mask = _exhaustive(problem, n, which)
    elif mode == "greedy":
        num, den, mask = _greedy(problem, n, seed, restarts)
    else:
        raise ValueError(f"unknown mode {mode!r}; use 'exact' or 'greedy'")
    chosen = IntervalCollection(members[i] for i in range(n) if (mask >> i) & 1)
    value = Fraction(num, den << D) if kind == "c1" else Fraction(num, den)
    return value, chosen


def c1(tau: Rearrangement, mode: str = "exact", *, max_intervals: int = EXACT_CAP, seed: int = 0,
       restarts: int = GREEDY_RESTARTS, backend: str | None = None,
       algorithm: str | None = None) -> tuple[Fraction, IntervalCollection]:
    """``C_1 = sup_H int mu_H / |sigma(H)*|`` over nonempty ``H`` inside ``tau(D)``.

    ``mode="exact"`` is certain: it enumerates every subset when there are at
    most ``ENUM_LIMIT`` candidates and runs branch and bound beyond that.
    Ties go to the lexicographically smallest sorted member list.
    ``mode="greedy"`` returns a lower bound from seeded local search.
    """
    return _subset_sup("c1", tau, mode, max_intervals, seed, restarts, backend, algorithm)


def carleson_ratio_sup(tau: Rearrangement, mode: str = "exact", *, max_intervals: int = EXACT_CAP,
                       seed: int = 0, restarts: int = GREEDY_RESTARTS,
                       backend: str | None = None) -> tuple[Fraction, IntervalCollection]:
    """``sup [[sigma(C)]] / [[C]]`` over nonempty ``C`` inside ``tau(D)``."""
    return _subset_sup("carleson", tau, mode, max_intervals, seed, restarts, backend)
