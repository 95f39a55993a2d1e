import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings

from haarlab.dyadic import Interval, all_intervals
from haarlab.haar import SCALAR, HaarVector, NormedSpace, hp_norm, l2_norm
from haarlab.maximal import carleson_ratio_sup, mu_integral, resolve, sigma_cover, witness_f
from haarlab.rearrange import (GENERATOR_KINDS, Rearrangement, apply_S_sigma, apply_T,
                               bmo_opnorm_lower, generate, opnorm_lower)

from conftest import random_scalar, random_vector, taus

I0, L0, R0 = Interval(0, 0), Interval(1, 0), Interval(1, 1)


class TestRearrangement:
    def test_injectivity_error_names_pair(self):
        with pytest.raises(ValueError, match="1:0 and 1:1 both map to 2:0"):
            Rearrangement({L0: Interval(2, 0), R0: Interval(2, 0)})

    def test_sigma_is_inverse(self):
        tau = generate("randominjection", 3, 5)
        for I, J in tau.items():
            assert tau.sigma(J) == I
        assert tau.inverse().inverse() == tau

    def test_sigma_only_on_image(self):
        tau = Rearrangement({I0: L0}, 1)
        with pytest.raises(KeyError):
            tau.sigma(R0)

    def test_text_round_trip(self):
        tau = generate("carlesondistorter", 3, 2)
        assert Rearrangement.loads(tau.dumps()) == tau

    def test_loader_errors(self):
        with pytest.raises(ValueError, match="depth"):
            Rearrangement.loads("0:0 -> 1:0\n")
        with pytest.raises(ValueError, match="both map to"):
            Rearrangement.loads("depth 1\n1:0 -> 0:0\n1:1 -> 0:0\n")
        with pytest.raises(ValueError, match="line 2"):
            Rearrangement.loads("depth 1\n1:0 => 0:0\n")


class TestApplyT:
    def test_examples(self):
        tau = Rearrangement({I0: L0}, 1)
        assert apply_T(HaarVector.basis(I0), tau, 1) == HaarVector.scalar({L0: 2.0})
        f = HaarVector.scalar({I0: 1.5, L0: -2.0})
        assert apply_T(f, Rearrangement.identity(2), 0.7) == f

    def test_measure_preserving_p2_relabels(self, rng):
        tau = generate("levelperm", 4, 3)
        f = random_scalar(rng, 4)
        g = apply_T(f, tau, 2.0)
        assert {tau(I): x for I, x in f.scalar_coeffs().items()} == g.scalar_coeffs()

    def test_error_names_interval(self):
        with pytest.raises(ValueError, match="1:1"):
            apply_T(HaarVector.basis(R0), Rearrangement({I0: I0}, 1), 1)

    @given(taus())
    def test_inverse_composition(self, tau):
        rng = np.random.default_rng(len(tau))
        f = random_scalar(rng, tau.depth)
        for p in (0.5, 1.0, 2.0):
            back = apply_T(apply_T(f, tau, p), tau.inverse(), p)
            assert back.allclose(f, rtol=1e-14)

    @given(taus(5))
    def test_scalar_p2_isometry_exact_on_squares(self, tau):
        rng = np.random.default_rng(tau.depth)
        f = random_scalar(rng, tau.depth)
        sq = {I: Fraction(float(x[0])) ** 2 for I, x in f.items()}
        image = {tau(I): c * Fraction(1 << tau(I).level, 1 << I.level) for I, c in sq.items()}
        lhs = sum(c / (1 << J.level) for J, c in image.items())
        rhs = sum(c / (1 << I.level) for I, c in sq.items())
        assert lhs == rhs
        assert hp_norm(apply_T(f, tau, 2.0), 2) == pytest.approx(hp_norm(f, 2), rel=1e-13)

    def test_vector_coefficients(self, rng):
        tau = generate("randominjection", 3, 1)
        f = random_vector(rng, 3, NormedSpace(1.0, 2), 6)
        g = apply_T(f, tau, 1.0)
        for I, x in f.items():
            assert np.allclose(g[tau(I)], x * 2.0 ** (tau(I).level - I.level))


class TestSSigma:
    def test_examples(self):
        tau = Rearrangement({I0: L0, L0: I0}, 1)
        assert apply_S_sigma(HaarVector.basis(L0), tau) == HaarVector.basis(I0)
        assert len(apply_S_sigma(HaarVector.basis(R0), tau)) == 0

    def test_energy_formula(self, rng):
        tau = generate("randominjection", 3, 9)
        f = random_scalar(rng, 3, 0.6)
        g = apply_S_sigma(f, tau)
        expected = sum(float(x[0]) ** 2 * float(tau.sigma(K).measure) for K, x in f.items() if tau.in_image(K))
        assert l2_norm(g) ** 2 == pytest.approx(expected, rel=1e-13)

    def test_left_inverse_of_relabeling(self, rng):
        tau = generate("randominjection", 3, 4)
        f = random_scalar(rng, 3)
        moved = HaarVector.scalar({tau(I): float(x[0]) for I, x in f.items()})
        assert apply_S_sigma(moved, tau) == f


class TestOpNorm:
    def test_identity(self):
        for p in (0.5, 1.0, 2.0):
            assert opnorm_lower(Rearrangement.identity(2), p, restarts=2).bound == pytest.approx(1.0, rel=1e-12)

    def test_single_interval_hand_value(self):
        res = opnorm_lower(Rearrangement({I0: L0}, 1), 1.0, restarts=2)
        assert res.bound == pytest.approx(1.0, rel=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_p2_isometry(self, seed):
        tau = generate(GENERATOR_KINDS[seed % 4], 3, seed)
        res = opnorm_lower(tau, 2.0, restarts=4, seed=seed)
        assert abs(res.bound - 1) <= 1e-6
        assert res.bound <= 1 + 1e-9

    def test_witness_attains_bound(self):
        tau = generate("carlesondistorter", 3, 1)
        res = opnorm_lower(tau, 1.0, restarts=4, iterations=30)
        f = res.witness
        assert hp_norm(apply_T(f, tau, 1.0), 1.0) / hp_norm(f, 1.0) == pytest.approx(res.bound, rel=1e-12)

    def test_vector_space_witness(self):
        tau = generate("blockshift", 2, 1)
        space = NormedSpace(1.0, 2)
        res = opnorm_lower(tau, 1.0, space, restarts=2, iterations=10)
        f = res.witness
        assert f.space == space
        assert hp_norm(apply_T(f, tau, 1.0), 1.0) / hp_norm(f, 1.0) == pytest.approx(res.bound, rel=1e-12)

    def test_deterministic(self):
        tau = generate("randominjection", 3, 2)
        a = opnorm_lower(tau, 0.75, restarts=3, seed=11)
        b = opnorm_lower(tau, 0.75, restarts=3, seed=11)
        assert a.bound == b.bound and a.witness == b.witness

    def test_errors(self):
        with pytest.raises(ValueError):
            opnorm_lower(Rearrangement({}, 1), 1.0)
        with pytest.raises(ValueError):
            opnorm_lower(Rearrangement.identity(1), 2.5)


class TestBmoOpNorm:
    def test_identity(self):
        assert bmo_opnorm_lower(Rearrangement.identity(2), [HaarVector.basis(I0)]) == pytest.approx(1.0)

    def test_witness_bound_dominates_c1_ratio(self, rng):
        for seed in range(20):
            tau = generate(GENERATOR_KINDS[seed % 4], 3, seed)
            pool = sorted(tau.image)
            H = [pool[int(i)] for i in rng.choice(len(pool), size=4, replace=False)]
            B = resolve(H, tau)
            bound = bmo_opnorm_lower(tau, [witness_f(B)])
            assert bound ** 2 >= float(mu_integral(H, tau) / sigma_cover(H, tau)) * (1 - 1e-12)

    def test_monotone_in_witnesses(self, rng):
        tau = generate("randominjection", 3, 0)
        ws = [random_scalar(rng, 3) for _ in range(6)]
        assert bmo_opnorm_lower(tau, ws[:3]) <= bmo_opnorm_lower(tau, ws)

    def test_zero_witness_warns(self):
        with pytest.warns(RuntimeWarning):
            assert bmo_opnorm_lower(Rearrangement.identity(1), [HaarVector(), HaarVector.basis(I0)]) == 1


class TestGenerators:
    @pytest.mark.parametrize("kind", GENERATOR_KINDS)
    def test_injective_deterministic_in_range(self, kind):
        for d in (1, 3, 5):
            tau = generate(kind, d, 17)
            assert tau == generate(kind, d, 17)
            assert set(tau.domain) <= set(all_intervals(d))
            assert set(tau.image) <= set(all_intervals(d))
            assert len(tau.image) == len(tau.domain)

    def test_levelperm_preserves_measure(self):
        for s in range(10):
            assert generate("levelperm", 4, s).is_measure_preserving()

    def test_distorter_inflates_carleson_ratio(self):
        value, C = carleson_ratio_sup(generate("carlesondistorter", 3, 0))
        assert value > 1

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            generate("nope", 2)
        with pytest.raises(ValueError):
            generate("levelperm", 0)
