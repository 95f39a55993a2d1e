import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from haarlab.dyadic import Interval, all_intervals
from haarlab.haar import HaarVector, NormedSpace
from haarlab.rearrange import GENERATOR_KINDS, generate

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def intervals(max_level: int = 6):
    return st.integers(0, max_level).flatmap(
        lambda n: st.integers(0, (1 << n) - 1).map(lambda k: Interval(n, k)))


def collections(max_level: int = 5, min_size: int = 1, max_size: int = 20):
    return st.sets(intervals(max_level), min_size=min_size, max_size=max_size)


def taus(max_depth: int = 4):
    return st.builds(generate, st.sampled_from(GENERATOR_KINDS), st.integers(1, max_depth),
                     st.integers(0, 10_000))


def random_scalar(rng, depth, density=0.4):
    pool = all_intervals(depth)
    keep = rng.random(len(pool)) < density
    keep[rng.integers(len(pool))] = True
    return HaarVector.scalar({I: rng.standard_normal() for I, k in zip(pool, keep) if k}, depth)


def random_vector(rng, depth, space: NormedSpace, size: int):
    pool = all_intervals(depth)
    idx = rng.choice(len(pool), size=min(size, len(pool)), replace=False)
    return HaarVector({pool[int(i)]: rng.standard_normal(space.m) for i in idx}, space, depth)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
