"""Quantum information-set decoding toolkit.

Modules: ``gf2core`` (binary linear algebra and instances), ``qsim``
(statevector simulator and resource model), ``circuits`` (quantum ISD
circuit builders), ``classical_isd`` (Prange, Lee-Brickell), ``hybrid``
(classical-quantum trade-offs), ``estimator`` (asymptotic and concrete
runtime exponents) and ``cli``.
"""

__version__ = "0.1.0"

from .gf2core import Gf2Matrix, Gf2Vector, Permutation, SdpInstance, random_instance
from .classical_isd import brute_force, lee_brickell, prange
from .hybrid import HybridStats, InnerSolver, combined_hybrid, hybrid_prange, punctured_hybrid
from .estimator import t_combined, t_hybrid_prange, t_punctured

__all__ = [
    "__version__",
    "Gf2Matrix",
    "Gf2Vector",
    "Permutation",
    "SdpInstance",
    "random_instance",
    "brute_force",
    "lee_brickell",
    "prange",
    "HybridStats",
    "InnerSolver",
    "combined_hybrid",
    "hybrid_prange",
    "punctured_hybrid",
    "t_combined",
    "t_hybrid_prange",
    "t_punctured",
]
