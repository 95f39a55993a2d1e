import json
import math
from fractions import Fraction

import numpy as np
import pytest

from haarlab.dyadic import Interval, IntervalCollection
from haarlab.haar import HaarVector, NormedSpace
from haarlab.io import (dumps_csv, dumps_json, dumps_haar, loads_haar, read_haar, read_tau, to_jsonable,
                        write_haar, write_tau)
from haarlab.rational import DyadicRational
from haarlab.rearrange import generate

from conftest import random_vector


def test_haar_round_trip(tmp_path, rng):
    for space in (NormedSpace(1.0, 2), NormedSpace(math.inf, 3), NormedSpace(2.0, 1)):
        f = random_vector(rng, 4, space, 9)
        assert loads_haar(dumps_haar(f)) == f
        write_haar(tmp_path / "f.txt", f)
        assert read_haar(tmp_path / "f.txt") == f


def test_haar_format_errors():
    with pytest.raises(ValueError, match="header"):
        loads_haar("0:0 1.0\n")
    with pytest.raises(ValueError, match="line 2"):
        loads_haar("space 2 2 3\n0:0 1.0\n")
    with pytest.raises(ValueError):
        loads_haar("")
    with pytest.raises(ValueError, match="depth"):
        loads_haar("space 2 1 1\n3:0 1.0\n")


def test_haar_format_comments_and_header():
    f = loads_haar("# a comment\nspace inf 2 2\n1:1 1 -2  # trailing\n")
    assert f.space == NormedSpace(math.inf, 2) and f.depth == 2
    assert np.array_equal(f[Interval(1, 1)], [1.0, -2.0])


def test_tau_round_trip(tmp_path):
    tau = generate("blockshift", 3, 8)
    write_tau(tmp_path / "t.txt", tau)
    assert read_tau(tmp_path / "t.txt") == tau


def test_json_exact_values_are_strings():
    obj = {"a": DyadicRational(5, 3), "b": Fraction(1, 3), "I": Interval(2, 1),
           "C": IntervalCollection([Interval(0, 0)]), "x": np.float64(0.5), "n": np.int64(3),
           "arr": np.array([1.0, 2.0]), "inf": math.inf, "bool": np.bool_(True)}
    data = json.loads(dumps_json(obj))
    assert data == {"a": "5/2^3", "b": "1/3", "I": "2:1", "C": "0:0", "x": 0.5, "n": 3,
                    "arr": [1.0, 2.0], "inf": "inf", "bool": True}


def test_json_is_deterministic():
    obj = {"z": 1, "a": [DyadicRational(1, 1)]}
    assert dumps_json(obj) == dumps_json(dict(reversed(list(obj.items()))))


def test_csv():
    text = dumps_csv([{"p": 1.0, "c1": Fraction(3, 2)}, {"p": 2.0, "extra": [1, 2]}])
    lines = text.splitlines()
    assert lines[0] == "c1,extra,p"
    assert lines[1] == "3/2^1,,1.0"
    assert lines[2] == ',"[1, 2]",2.0'
    assert dumps_csv([]) == ""


def test_haar_vector_serialization():
    f = HaarVector.scalar({Interval(0, 0): 2.0})
    assert to_jsonable(f) == {"0:0": 2.0}
