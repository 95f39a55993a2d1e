import os
import subprocess
import sys

import numpy as np
import pytest

from haarlab import kernels
from haarlab.haar import NormedSpace, chain_arrays
from haarlab.maximal import c1_problem, carleson_problem
from haarlab.rearrange import GENERATOR_KINDS, generate

from conftest import random_vector

compiled = pytest.mark.skipif("compiled" not in kernels.BACKENDS, reason="extension not built")


def test_pure_backend_always_available():
    assert "pure" in kernels.BACKENDS
    with pytest.raises(ValueError):
        kernels.backend("fortran")


def test_env_forces_pure_backend():
    out = subprocess.run([sys.executable, "-c", "import haarlab.kernels as k; print(k.BACKEND)"],
                         env={**os.environ, "HAARLAB_PURE": "1"}, capture_output=True, text=True)
    assert out.stdout.strip() == "pure"


@compiled
@pytest.mark.parametrize("space", [NormedSpace(1.0, 2), NormedSpace(2.0, 3), NormedSpace(float("inf"), 2),
                                   NormedSpace(1.5, 1)])
def test_rademacher_average_parity(space):
    rng = np.random.default_rng(0)
    f = random_vector(rng, 4, space, 14)
    A, counts = chain_arrays(f, f.max_level + 1)
    for power in (1.0, 2.0, 3.5):
        a = kernels.rademacher_average(A, counts, space.r, power, which="pure")
        b = kernels.rademacher_average(A, counts, space.r, power, which="compiled")
        assert np.allclose(a, b, rtol=1e-13, atol=0)


@compiled
@pytest.mark.parametrize("seed", range(6))
def test_subset_search_parity(seed):
    tau = generate(GENERATOR_KINDS[seed % 4], 2 + seed % 2, seed)
    members = sorted(tau.image)
    P, _ = c1_problem(tau, members)
    full = 1 << P.n
    assert P.search(1, full, "pure") == P.search(1, full, "compiled")
    C, _ = carleson_problem(tau, members)
    assert C.search(1, full, "pure") == C.search(1, full, "compiled")


def test_search_result_is_the_evaluated_best():
    tau = generate("randominjection", 2, 4)
    members = sorted(tau.image)
    P, _ = c1_problem(tau, members)
    num, den, mask = P.search(1, 1 << P.n)
    B = np.array([[(m >> i) & 1 for i in range(P.n)] for m in range(1, 1 << P.n)], dtype=bool)
    nums, dens = P.evaluate(B)
    ratios = nums / dens
    assert num / den == pytest.approx(ratios.max(), rel=1e-15)
    first = int(np.flatnonzero(ratios == ratios.max())[0]) + 1
    # lexicographic tie-break on sorted member tuples, not on the mask integer
    best = [m + 1 for m in np.flatnonzero(ratios == ratios.max())]
    as_tuple = lambda m: [i for i in range(P.n) if (m >> i) & 1]
    assert mask == min(best, key=as_tuple)
    assert first in best
