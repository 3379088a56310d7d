"""The divisor lattice T(l) of admissible gcds for intervals of length 2l+1."""

from __future__ import annotations

import itertools
import math
import threading
from dataclasses import dataclass, field
from typing import Iterable

from .arith import is_probable_prime, primes_upto
from .errors import ElementNotInLattice, LatticeTooLarge, NotPrime, PreconditionViolated

MAX_L = 20

_cache: dict[int, "TlLattice"] = {}
_cache_lock = threading.Lock()


def r_exponent(p: int, l: int) -> int:
    """Largest t with p**t <= 2l+1."""
    if not is_probable_prime(p):
        raise NotPrime(f"{p} is not prime")
    if l < 1:
        raise PreconditionViolated("l must be >= 1")
    bound, t, power = 2 * l + 1, 0, p
    while power <= bound:
        t += 1
        power *= p
    return t


def c_bound(l: int) -> int:
    """C(l) = (2l+1)^(2l+1), a strict upper bound for every lattice element."""
    return (2 * l + 1) ** (2 * l + 1)


@dataclass(frozen=True)
class TlLattice:
    l: int
    exponent_table: dict[int, int]
    elements: tuple[int, ...]
    _members: frozenset[int] = field(repr=False, compare=False)

    @property
    def top(self) -> int:
        """prod p^r(p,l); every element divides it."""
        return math.prod(p**r for p, r in self.exponent_table.items())

    @property
    def C(self) -> int:
        return c_bound(self.l)

    @property
    def D(self) -> int:
        return len(self.elements)

    def __contains__(self, x: int) -> bool:
        return x in self._members

    def __iter__(self):
        return iter(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def check_subset(self, xs: Iterable[int]) -> None:
        for x in xs:
            if x not in self._members:
                raise ElementNotInLattice(f"{x} is not in T({self.l})")

    def mul_closure(self, F: Iterable[int]) -> frozenset[int]:
        """Mul(F): lattice elements divisible by some member of F."""
        F = tuple(F)
        self.check_subset(F)
        return frozenset(v for v in self.elements if any(v % u == 0 for u in F))

    def complement_of_mul(self, F: Iterable[int]) -> tuple[int, ...]:
        """T(l) minus Mul(F), ascending."""
        closed = self.mul_closure(F)
        return tuple(v for v in self.elements if v not in closed)

    def max_divisor_in(self, s: int, allowed: Iterable[int]) -> int:
        """Largest element of ``allowed`` dividing s (1 always qualifies if present)."""
        best = 0
        for v in allowed:
            if v > best and s % v == 0:
                best = v
        return best

    def admits_gcd(self, a: int, b: int) -> bool:
        return math.gcd(a, b) in self._members


def build_lattice(l: int, max_l: int = MAX_L) -> TlLattice:
    """T(l), materialized once per l and cached."""
    if l < 1:
        raise PreconditionViolated("l must be >= 1")
    if l > max_l:
        raise LatticeTooLarge(f"l={l} exceeds lattice guard {max_l}", {"l": l, "max_l": max_l})
    with _cache_lock:
        cached = _cache.get(l)
        if cached is not None:
            return cached
        table = {p: r_exponent(p, l) for p in primes_upto(2 * l + 1)}
        powers = [[p**e for e in range(r + 1)] for p, r in table.items()]
        elements = sorted({math.prod(combo) for combo in itertools.product(*powers)})
        lattice = TlLattice(l, table, tuple(elements), frozenset(elements))
        _cache[l] = lattice
        return lattice


def mul_closure(lattice: TlLattice, F: Iterable[int]) -> frozenset[int]:
    return lattice.mul_closure(F)


def lambda_budget(m_value: int, l: int) -> int:
    """Witness-size budget m + 2C(l) used by the order-growth step."""
    return m_value + 2 * c_bound(l)
