"""Certified search for geometric progressions in syndetic sets.

Windows (finite truncations A ∩ [1, N]) come from :mod:`synprog.synsets`;
square-ratio and n^k r finders plus the brute-force oracle live in
:mod:`synprog.gpsearch`; the CRT, lattice and Triveni constructions in
:mod:`synprog.constructions`.
"""

from .arith import CongruenceSystem, CrtSolution, Factorization, crt_solve, factorize, is_pairwise_coprime, primes_upto
from .constructions import (
    AlignmentSolution,
    GapCertificate,
    GcdControlledFamily,
    ShiftCertificate,
    TriveniTriplet,
    align_offsets,
    crt_shift,
    embed_family,
    extend_triveni,
    gap_or_gp,
    gcd_controlled_family,
    gp_from_pairwise_prime,
    greedy_maximal_pairwise_prime,
    grow_triveni_order,
    order_one_triveni,
    verify_triveni,
)
from .gpsearch import (
    GPWitness,
    RatioClass,
    check_witness,
    find_ratio_nkr,
    find_square_method1,
    find_square_method2,
    oracle_enumerate,
)
from .lattice import TlLattice, build_lattice, mul_closure, r_exponent
from .synsets import RuleWindow, SetRule, SyndeticWindow, load_set, materialize, parse_rule, save_set, syndetic_gap

__version__ = "0.1.0"

__all__ = [
    "AlignmentSolution",
    "CongruenceSystem",
    "CrtSolution",
    "Factorization",
    "GPWitness",
    "GapCertificate",
    "GcdControlledFamily",
    "RatioClass",
    "RuleWindow",
    "SetRule",
    "ShiftCertificate",
    "SyndeticWindow",
    "TlLattice",
    "TriveniTriplet",
    "align_offsets",
    "build_lattice",
    "check_witness",
    "crt_shift",
    "crt_solve",
    "embed_family",
    "extend_triveni",
    "factorize",
    "find_ratio_nkr",
    "find_square_method1",
    "find_square_method2",
    "gap_or_gp",
    "gcd_controlled_family",
    "gp_from_pairwise_prime",
    "greedy_maximal_pairwise_prime",
    "grow_triveni_order",
    "is_pairwise_coprime",
    "load_set",
    "materialize",
    "mul_closure",
    "oracle_enumerate",
    "order_one_triveni",
    "parse_rule",
    "primes_upto",
    "r_exponent",
    "save_set",
    "syndetic_gap",
    "verify_triveni",
]
