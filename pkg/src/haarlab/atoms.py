"""Stopping-time atomic decomposition of Haar expansions.

Construction (top-down on the support tree ``L``):

* For ``J`` in ``L`` let ``s(J)`` be the square function on ``J`` of the part
  of ``f`` carried by ``J`` and its ancestors in ``L``, and ``l(J)`` the least
  integer with ``s(J) <= 2**l(J)``.
* ``J`` is a stopping interval when it has no ancestor in ``L`` or when
  ``l(J)`` exceeds ``l`` of its nearest ancestor in ``L``.
* Each support interval joins the block of its nearest stopping ancestor (or
  itself), so blocks are order-convex with a unique top.
* While the Carleson constant of the stopping family exceeds 4, the largest
  stopping interval strictly inside the worst offender is merged into the
  block above it.  Removing members never raises a Carleson constant and the
  maximal support intervals alone have constant 1, so this terminates.
* ``n(I)`` is the least integer with ``SS(f_I) <= 2**n(I)`` everywhere.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from haarlab import kernels
from haarlab.dyadic import Interval, IntervalCollection, carleson_constant, carleson_sums, is_block
from haarlab.haar import (DEFAULT_CAP, CapacityError, HaarVector, hp_norm, is_atom,
                          vector_square_function)
from haarlab.rational import format_exact

CARLESON_LIMIT = 4


@dataclass
class AtomicDecomposition:
    p: float
    E: IntervalCollection
    blocks: dict[Interval, IntervalCollection]
    exponents: dict[Interval, int]
    scalars: dict[Interval, float]
    atoms: dict[Interval, HaarVector]
    pieces: dict[Interval, HaarVector]
    merges: int = 0

    def reconstruct(self) -> HaarVector:
        """``sum_I f_I``, the block pieces added back together."""
        items = {}
        for piece in self.pieces.values():
            for J, x in piece.items():
                items[J] = x
        space = next(iter(self.pieces.values())).space
        return HaarVector(items, space)

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "stopping": str(self.E),
            "merges": self.merges,
            "blocks": [
                {"top": str(I), "members": str(self.blocks[I]), "n": self.exponents[I],
                 "lambda": self.scalars[I]}
                for I in self.E
            ],
        }


def _exp_ceiling_sq(sq) -> int:
    """Least integer ``n`` with ``sq <= 4**n`` (``sq > 0``), exact for rationals."""
    if isinstance(sq, Fraction):
        n = (sq.numerator.bit_length() - sq.denominator.bit_length()) // 2 - 1
        while Fraction(4) ** n < sq:
            n += 1
        while Fraction(4) ** (n - 1) >= sq:
            n -= 1
        return n
    n = math.ceil(0.5 * math.log2(sq))
    while 4.0 ** n < sq:
        n += 1
    while 4.0 ** (n - 1) >= sq:
        n -= 1
    return n


def _support_parents(L: list[Interval]) -> dict[Interval, Interval | None]:
    members = set(L)
    return {J: next((A for A in J.ancestors() if A in members), None) for J in L}


def _chain_sq(f: HaarVector, chain: list[Interval]):
    """Squared square function of ``sum_{K in chain} x_K h_K`` on the deepest member.

    ``chain`` is nested.  Exact (rational) for scalar expansions.
    """
    if f.is_scalar:
        return sum((Fraction(float(f[K][0])) ** 2 for K in chain), Fraction(0))
    V = np.array([f[K] for K in chain])
    return float(kernels.rademacher_average(V[None], np.array([len(chain)]), f.space.r, 2.0)[0])


def _blocks(L: list[Interval], parents, stopping: set) -> dict[Interval, list[Interval]]:
    owner: dict[Interval, Interval] = {}
    for J in L:  # canonical order visits ancestors first
        owner[J] = J if J in stopping else owner[parents[J]]
    out: dict[Interval, list[Interval]] = {I: [] for I in sorted(stopping)}
    for J in L:
        out[owner[J]].append(J)
    return out


def _sup_sq(f: HaarVector, block: list[Interval], parents_in_block) -> object:
    best = None
    for J in block:
        chain = [J]
        K = parents_in_block[J]
        while K is not None:
            chain.append(K)
            K = parents_in_block[K]
        v = _chain_sq(f, chain)
        if best is None or v > best:
            best = v
    return best


def atomic_decomposition(f: HaarVector, p: float, mode: str = "exact",
                         cap: int = DEFAULT_CAP) -> AtomicDecomposition:
    if not p > 0:
        raise ValueError("p must be positive")
    if not len(f):
        raise ValueError("cannot decompose the zero expansion")
    if mode != "exact":
        raise ValueError("atoms are certified with the exact square function only")
    if not f.is_scalar and len(f) > cap:
        raise CapacityError(f"vector expansion with {len(f)} terms exceeds exact cap {cap}")
    L = list(f.support)
    parents = _support_parents(L)

    level: dict[Interval, int] = {}
    for J in L:
        chain = [J] + [A for A in J.ancestors() if A in parents]
        level[J] = _exp_ceiling_sq(_chain_sq(f, chain))
    stopping = {J for J in L if parents[J] is None or level[J] > level[parents[J]]}

    merges = 0
    while len(stopping) > 1 and carleson_constant(stopping) > CARLESON_LIMIT:
        sums = carleson_sums(stopping)
        worst = max(sorted(sums), key=lambda I: sums[I])
        inner = sorted(J for J in stopping if J != worst and worst.contains(J))
        stopping.discard(inner[0])
        merges += 1

    blocks = _blocks(L, parents, stopping)
    E = IntervalCollection(blocks)
    out_blocks, exps, lams, atoms, pieces = {}, {}, {}, {}, {}
    for I, members in blocks.items():
        mset = set(members)
        in_block = {J: (parents[J] if parents[J] in mset and J != I else None) for J in members}
        n = _exp_ceiling_sq(_sup_sq(f, members, in_block))
        piece = f.restrict(members)
        lam = 2.0 ** (n - I.level / p)
        out_blocks[I] = IntervalCollection(members)
        exps[I] = n
        lams[I] = lam
        pieces[I] = piece
        atoms[I] = piece * (1.0 / lam)
    return AtomicDecomposition(p, E, out_blocks, exps, lams, atoms, pieces, merges)


@dataclass
class DecompositionReport:
    passed: bool
    checks: list[dict] = field(default_factory=list)
    norm_ratio: float = math.nan
    block_constant: float | None = None
    carleson: str = ""

    def failures(self) -> list[dict]:
        return [c for c in self.checks if not c["passed"]]

    def to_dict(self) -> dict:
        return {"passed": self.passed, "checks": self.checks, "carleson": self.carleson,
                "norm_ratio": self.norm_ratio, "block_constant": self.block_constant}


def validate_decomposition(f: HaarVector, p: float, d: AtomicDecomposition,
                           cap: int = DEFAULT_CAP, slack: float = 1e-9) -> DecompositionReport:
    """Check a decomposition; hard checks decide ``passed``, the norm ratios are reported only."""
    checks = []

    def check(name: str, ok: bool, detail: str = ""):
        checks.append({"check": name, "passed": bool(ok), "detail": detail})

    L = set(f.support)
    car = carleson_constant(d.E) if len(d.E) else None
    check("carleson_packing", car is not None and car <= CARLESON_LIMIT,
          f"[[E]] = {format_exact(car) if car is not None else 'undefined'} (limit {CARLESON_LIMIT})")

    seen: set = set()
    part_ok, block_ok = True, True
    for I in d.E:
        B = set(d.blocks[I])
        if B & seen:
            part_ok = False
        seen |= B
        if I not in B or not is_block(B, L) or min(B) != I:
            block_ok = False
    check("partition", part_ok and seen == L, f"{len(d.E)} blocks over {len(L)} support intervals")
    check("blocks", block_ok, "each block order-convex in the support with its stopping interval on top")

    recon = d.reconstruct()
    rec_ok = recon == f
    scale_ok = all(d.atoms[I].allclose(d.pieces[I] * (1.0 / d.scalars[I]), rtol=1e-14)
                   and d.pieces[I] == f.restrict(d.blocks[I]) for I in d.E)
    check("reconstruction", rec_ok and scale_ok, "sum of block pieces equals f; lambda_I * a_I = f_I")

    bound_ok, worst = True, 0.0
    for I in d.E:
        piece = d.pieces[I]
        n = d.exponents[I]
        if piece.is_scalar:
            members = list(d.blocks[I])
            mset = set(members)
            parents = _support_parents(members)
            in_block = {J: (parents[J] if parents[J] in mset else None) for J in members}
            sq = _sup_sq(f, members, in_block)
            ok = sq <= Fraction(4) ** n
            worst = max(worst, float(sq) / 4.0 ** n)
        else:
            s = vector_square_function(piece, "exact", cap=cap).sup()
            ok = s <= 2.0 ** n * (1 + slack)
            worst = max(worst, (s / 2.0 ** n) ** 2)
        bound_ok &= bool(ok)
    check("block_square_bound", bound_ok, f"max SS(f_I)^2 / 4^n(I) = {worst:.6g}")

    atoms_ok = all(is_atom(d.atoms[I], p, I, cap=cap) for I in d.E)
    check("atoms", atoms_ok, "each a_I is an H^p atom for its stopping interval")

    fp = hp_norm(f, p) ** p
    lam_sum = sum(2.0 ** (-I.level) * 2.0 ** (p * d.exponents[I]) for I in d.E)
    block_c = None
    if p >= 1:
        pieces = sum(hp_norm(d.pieces[I], p) ** p for I in d.E)
        block_c = fp / pieces if pieces else None
    return DecompositionReport(
        passed=all(c["passed"] for c in checks), checks=checks,
        norm_ratio=lam_sum / fp if fp else math.nan, block_constant=block_c,
        carleson=format_exact(car) if car is not None else "")
