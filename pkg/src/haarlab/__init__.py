"""Dyadic Haar analysis of rearrangement operators.

Exact dyadic intervals and collections, Haar expansions with scalar and
Rademacher square functions, rearrangement operators with norm searches,
the maximal function ``mu_H`` and the constant ``C_1``, atomic
decompositions, and a seeded verification harness.
"""
from haarlab.atoms import AtomicDecomposition, atomic_decomposition, validate_decomposition
from haarlab.dyadic import (Interval, IntervalCollection, all_intervals, carleson_constant,
                            condensation_score, cover_measure, g1, gn, is_block)
from haarlab.haar import (SCALAR, CapacityError, HaarVector, NormedSpace, StepFunction, bmo_norm,
                          hp_norm, is_atom, l2_norm, scalar_square_function, vector_square_function)
from haarlab.kernels import BACKEND
from haarlab.maximal import (c1, carleson_ratio_sup, maximal_report, mu, mu_integral, resolve,
                             witness_f)
from haarlab.rational import DyadicRational
from haarlab.rearrange import (Rearrangement, apply_S_sigma, apply_T, generate, opnorm_lower)

__version__ = "0.1.0"

__all__ = [
    "AtomicDecomposition", "BACKEND", "CapacityError", "DyadicRational", "HaarVector", "Interval",
    "IntervalCollection", "NormedSpace", "Rearrangement", "SCALAR", "StepFunction", "all_intervals",
    "apply_S_sigma", "apply_T", "atomic_decomposition", "bmo_norm", "c1", "carleson_constant",
    "carleson_ratio_sup", "condensation_score", "cover_measure", "g1", "generate", "gn", "hp_norm",
    "is_atom", "is_block", "l2_norm", "maximal_report", "mu", "mu_integral", "opnorm_lower",
    "resolve", "scalar_square_function", "validate_decomposition", "vector_square_function",
    "witness_f",
]
