import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given

from haarlab.dyadic import Interval, IntervalCollection, all_intervals, carleson_constant
from haarlab.haar import CapacityError, HaarVector, bmo_norm, bmo_norm_sq_from_squares
from haarlab.lab import swap_example
from haarlab.maximal import (EXACT_CAP, c1, carleson_ratio_sup, maximal_report, mu, mu_integral,
                             resolve, sigma_cover, witness_f, witness_squares)
from haarlab.rational import DyadicRational
from haarlab.rearrange import GENERATOR_KINDS, Rearrangement, generate

from conftest import taus

I0, L0, R0 = Interval(0, 0), Interval(1, 0), Interval(1, 1)
Q0, Q1 = Interval(2, 0), Interval(2, 1)


def oracle_ratio(H, tau):
    """int mu_H / |sigma(H)*| from the definitions, in Fractions on a fine grid."""
    N = max(I.level for I in H) + max(tau.sigma(I).level for I in H) + 1
    cells = [Fraction(0)] * (1 << N)
    for I in H:
        r = Fraction(1 << I.level, 1 << tau.sigma(I).level)
        for c in I.cells(N):
            cells[c] = max(cells[c], r)
    covered = [False] * (1 << N)
    for I in H:
        for c in tau.sigma(I).cells(N):
            covered[c] = True
    return sum(cells) / sum(covered)


def oracle_c1(tau):
    members = sorted(tau.image)
    best, arg = None, None
    for k in range(1, len(members) + 1):
        for H in itertools.combinations(members, k):
            v = oracle_ratio(H, tau)
            if best is None or v > best or (v == best and list(H) < list(arg)):
                best, arg = v, H
    return best, IntervalCollection(arg)


def oracle_carleson(tau):
    members = sorted(tau.image)
    best = None
    for k in range(1, len(members) + 1):
        for C in itertools.combinations(members, k):
            v = carleson_constant(tau.preimage_of(C)).as_fraction() / carleson_constant(C).as_fraction()
            best = v if best is None or v > best else best
    return best


class TestMu:
    def test_identity(self):
        m = mu([L0, Q0], Rearrangement.identity(2))
        assert list(m.values) == [1, 1, 0, 0]

    def test_swap_examples(self):
        tau = swap_example()
        assert list(mu([Q0], tau).values) == [2, 0, 0, 0]
        assert list(mu([Q0, L0], tau).values) == [2, 0.5, 0, 0]

    def test_grid_level_is_deepest_member(self):
        assert mu([L0], Rearrangement.identity(2)).level == 1

    def test_member_outside_image(self):
        with pytest.raises(ValueError, match="1:1"):
            mu([R0], Rearrangement({I0: L0}, 1))


class TestResolve:
    def test_examples(self):
        assert resolve(all_intervals(1), Rearrangement.identity(1)) == IntervalCollection([L0, R0])
        assert resolve([Q1], Rearrangement.identity(2)) == IntervalCollection([Q1])
        assert resolve([Q0, L0], swap_example()) == IntervalCollection([Q0, L0])


class TestMuIntegral:
    def test_examples(self):
        assert mu_integral([I0], Rearrangement.identity(1)) == 1
        assert mu_integral([Q0, L0], swap_example()) == DyadicRational(5, 3)
        assert mu_integral([Q0], swap_example()) == DyadicRational(1, 1)

    @given(taus(5))
    def test_closed_form_equals_grid(self, tau):
        rng = np.random.default_rng(len(tau))
        pool = sorted(tau.image)
        for _ in range(5):
            H = [pool[int(i)] for i in rng.choice(len(pool), size=int(rng.integers(1, len(pool) + 1)),
                                                  replace=False)]
            assert mu_integral(H, tau) == mu(H, tau).integral_exact()
            rep = maximal_report(H, tau)
            assert rep.ratio == oracle_ratio(H, tau)
            assert set(rep.B) <= set(rep.H)
            assert rep.integral > 0


class TestWitness:
    def test_examples(self):
        assert witness_f([I0]) == HaarVector.basis(I0)
        sq = witness_squares([I0, L0])
        assert sq == {I0: DyadicRational(1, 1), L0: 1}
        assert witness_f([I0, L0]).coefficient(I0) == pytest.approx(math.sqrt(0.5))
        assert bmo_norm(witness_f([I0, L0])) == pytest.approx(1.0)

    @given(taus(5))
    def test_resolving_witness_is_bmo_normalized(self, tau):
        rng = np.random.default_rng(tau.depth)
        pool = sorted(tau.image)
        H = [pool[int(i)] for i in rng.choice(len(pool), size=min(6, len(pool)), replace=False)]
        assert bmo_norm_sq_from_squares(witness_squares(resolve(H, tau))) == 1


class TestC1:
    def test_identity_is_one(self):
        for d in range(1, 5):
            v, H = c1(Rearrangement.identity(d), max_intervals=31)
            assert v == 1 and H == IntervalCollection([I0])

    def test_swap_example_matches_oracle(self):
        v, H = c1(swap_example())
        assert (v, H) == oracle_c1(swap_example())
        assert v == Fraction(3, 2)
        assert mu_integral([Q0, L0], swap_example()) / sigma_cover([Q0, L0], swap_example()) == Fraction(5, 4)

    @pytest.mark.parametrize("seed", range(12))
    def test_exact_matches_oracle_on_random(self, seed):
        tau = generate(GENERATOR_KINDS[seed % 4], 1 + seed % 3, seed)
        if len(tau.image) > 10:
            tau = tau.restrict(sorted(tau.domain)[:10])
        assert c1(tau) == oracle_c1(tau)

    @pytest.mark.parametrize("seed", range(20))
    def test_branch_and_bound_equals_enumeration(self, seed):
        tau = generate(GENERATOR_KINDS[seed % 4], 2 + seed % 2, seed)
        assert c1(tau, algorithm="bnb") == c1(tau, algorithm="enumerate")

    def test_greedy_lower_bound(self):
        for seed in range(15):
            tau = generate(GENERATOR_KINDS[seed % 4], 3, seed)
            exact, _ = c1(tau)
            greedy, G = c1(tau, "greedy", seed=seed)
            assert 1 <= greedy <= exact
            assert maximal_report(G, tau).ratio == greedy

    def test_at_least_one(self):
        for seed in range(10):
            assert c1(generate("randominjection", 2, seed))[0] >= 1

    def test_capacity(self):
        with pytest.raises(CapacityError):
            c1(generate("randominjection", 5, 0))
        with pytest.raises(ValueError):
            c1(swap_example(), "exact", algorithm="magic")
        with pytest.raises(ValueError):
            c1(swap_example(), "fast")

    def test_backends_agree(self):
        from haarlab.kernels import BACKENDS
        for seed in range(6):
            tau = generate(GENERATOR_KINDS[seed % 4], 3, seed)
            results = {c1(tau, backend=b) for b in BACKENDS}
            assert len(results) == 1

    def test_thread_count_does_not_change_result(self, monkeypatch):
        import haarlab.maximal as mx
        monkeypatch.setattr(mx, "_CHUNK", 64)
        tau = generate("randominjection", 3, 3)
        out = set()
        for t in ("1", "2", "8"):
            monkeypatch.setenv("HAARLAB_THREADS", t)
            out.add(c1(tau))
        assert len(out) == 1


class TestCarlesonRatio:
    def test_identity_and_levelperm(self):
        assert carleson_ratio_sup(Rearrangement.identity(2))[0] == 1
        assert carleson_ratio_sup(generate("levelperm", 1, 1))[0] == 1

    def test_swap_example(self):
        tau = swap_example()
        v, C = carleson_ratio_sup(tau)
        pair = IntervalCollection([Q0, L0])
        assert v >= carleson_constant(tau.preimage_of(pair)).as_fraction() / carleson_constant(pair).as_fraction()
        assert v == oracle_carleson(tau)

    @pytest.mark.parametrize("seed", range(6))
    def test_matches_oracle(self, seed):
        tau = generate(GENERATOR_KINDS[seed % 4], 2, seed)
        assert carleson_ratio_sup(tau)[0] == oracle_carleson(tau)
        assert carleson_ratio_sup(tau, "greedy", seed=seed)[0] <= carleson_ratio_sup(tau)[0]
