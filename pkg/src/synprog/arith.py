"""Arbitrary-precision integer primitives: gcd families, primes, factoring, CRT."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from functools import lru_cache, reduce
from typing import Iterable, Sequence

import numpy as np

from .errors import NonCoprimeModuli, PreconditionViolated

TRIAL_DIVISION_LIMIT = 10**6

# deterministic for n < 3.3e24
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


def lcm(*xs: int) -> int:
    return reduce(lambda a, b: a // math.gcd(a, b) * b, xs, 1)


def prod(xs: Iterable[int]) -> int:
    return math.prod(xs)


def is_pairwise_coprime(xs: Sequence[int]) -> bool:
    """True iff every two entries are coprime. Repeated values > 1 fail."""
    xs = list(xs)
    for x in xs:
        if x < 1:
            raise PreconditionViolated(f"expected positive integers, got {x}")
    return _coprime_split(xs)[0]


def _coprime_split(xs: list[int]) -> tuple[bool, int]:
    # halves keep the gcds balanced; a running product would make this quadratic
    if len(xs) <= 16:
        running = 1
        for x in xs:
            if math.gcd(running, x) != 1:
                return False, 0
            running *= x
        return True, running
    mid = len(xs) // 2
    ok, left = _coprime_split(xs[:mid])
    if not ok:
        return False, 0
    ok, right = _coprime_split(xs[mid:])
    if not ok or math.gcd(left, right) != 1:
        return False, 0
    return True, left * right


def is_probable_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    bases = list(_MR_BASES)
    if n.bit_length() > 81:
        rng = random.Random(n)
        bases += [rng.randrange(2, n - 1) for _ in range(16)]
    for a in bases:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def primes_upto(n: int) -> list[int]:
    """Primes <= n, ascending (sieve of Eratosthenes)."""
    if n < 2:
        return []
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    sieve[4::2] = False
    for p in range(3, math.isqrt(n) + 1, 2):
        if sieve[p]:
            sieve[p * p :: 2 * p] = False
    return np.flatnonzero(sieve).tolist()


def smallest_prime_factor_table(n: int) -> np.ndarray:
    """spf[x] for 0 <= x <= n (spf[0] = spf[1] = 0)."""
    spf = np.zeros(n + 1, dtype=np.int64)
    if n >= 2:
        spf[2::2] = 2
    for p in range(3, n + 1, 2):
        if spf[p] == 0:
            spf[p] = p
            if p * p <= n:
                block = spf[p * p :: 2 * p]
                block[block == 0] = p
    return spf


def _brent_rho(n: int, seed: int) -> int:
    rng = random.Random(seed)
    while True:
        y, c, m = rng.randrange(1, n), rng.randrange(1, n), 128
        g = r = q = 1
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g


def _split(n: int, out: dict[int, int]) -> None:
    if n == 1:
        return
    if is_probable_prime(n):
        out[n] = out.get(n, 0) + 1
        return
    d = _brent_rho(n, seed=n)
    _split(d, out)
    _split(n // d, out)


@dataclass(frozen=True)
class Factorization:
    value: int
    factors: tuple[tuple[int, int], ...]

    def recompose(self) -> int:
        return math.prod(p**e for p, e in self.factors)

    @property
    def prime_powers(self) -> tuple[int, ...]:
        """Exact prime-power divisors p^e with p^e | n and p^(e+1) not dividing n."""
        return tuple(p**e for p, e in self.factors)


@lru_cache(maxsize=1)
def _trial_primes() -> tuple[int, ...]:
    return tuple(primes_upto(TRIAL_DIVISION_LIMIT))


def factorize(n: int) -> Factorization:
    """Trial division up to 10^6, then Brent's rho on the cofactor."""
    if n < 1:
        raise PreconditionViolated("factorize requires n >= 1")
    found: dict[int, int] = {}
    m = n
    limit = math.isqrt(m)
    for p in _trial_primes():
        if p > limit:
            break
        if m % p == 0:
            while m % p == 0:
                found[p] = found.get(p, 0) + 1
                m //= p
            limit = math.isqrt(m)
    if m > 1:
        if m <= TRIAL_DIVISION_LIMIT**2:
            found[m] = found.get(m, 0) + 1
        else:
            _split(m, found)
    return Factorization(n, tuple(sorted(found.items())))


@dataclass(frozen=True)
class CongruenceSystem:
    """x = residue (mod modulus) for each pair; residues are normalized on construction."""

    congruences: tuple[tuple[int, int], ...]

    def __init__(self, congruences: Iterable[tuple[int, int]]):
        normalized = []
        for residue, modulus in congruences:
            if modulus < 2:
                raise PreconditionViolated(f"modulus must be >= 2, got {modulus}")
            normalized.append((residue % modulus, modulus))
        object.__setattr__(self, "congruences", tuple(normalized))

    @property
    def moduli(self) -> tuple[int, ...]:
        return tuple(m for _, m in self.congruences)


@dataclass(frozen=True)
class CrtSolution:
    base: int
    modulus: int

    def satisfies(self, system: CongruenceSystem) -> bool:
        moduli = system.moduli
        if not moduli:
            return self.base == 0 and self.modulus == 1
        return residues_mod(self.base, moduli) == [r for r, _ in system.congruences]


def _product_tree(ms: Sequence[int]) -> list[list[int]]:
    levels = [list(ms)]
    while len(levels[-1]) > 1:
        row = levels[-1]
        levels.append([row[i] * row[i + 1] if i + 1 < len(row) else row[i] for i in range(0, len(row), 2)])
    return levels


def residues_mod(x: int, moduli: Sequence[int]) -> list[int]:
    """[x mod m for m in moduli] via a remainder tree."""
    if len(moduli) <= 32:
        return [x % m for m in moduli]
    levels = _product_tree(moduli)
    rems = [x % levels[-1][0]]
    for row in reversed(levels[:-1]):
        rems = [rems[i // 2] % m for i, m in enumerate(row)]
    return rems


def _crt_merge(cs: Sequence[tuple[int, int]]) -> tuple[int, int]:
    if len(cs) <= 8:
        x, big_m = 0, 1
        for r, m in cs:
            x += big_m * ((r - x) * pow(big_m % m, -1, m) % m)
            big_m *= m
        return x, big_m
    # x = sum c_i * M/m_i; (M mod m_i^2)/m_i gives M/m_i mod m_i without big inverses
    ms = [m for _, m in cs]
    levels = _product_tree(ms)
    big_m = levels[-1][0]
    cof = residues_mod(big_m, [m * m for m in ms])
    vals = [r * pow(q // m, -1, m) % m for (r, m), q in zip(cs, cof)]
    for row in levels[:-1]:
        vals = [
            vals[i] * row[i + 1] + vals[i + 1] * row[i] if i + 1 < len(row) else vals[i]
            for i in range(0, len(row), 2)
        ]
    return vals[0] % big_m, big_m


def crt_solve(system: CongruenceSystem | Iterable[tuple[int, int]]) -> CrtSolution:
    """Unique solution in [0, prod moduli) of a pairwise-coprime system.

    Large systems go through product and remainder trees, which keeps
    thousands of moduli fast; the result is re-substituted before it is
    returned.
    """
    if not isinstance(system, CongruenceSystem):
        system = CongruenceSystem(system)
    if not is_pairwise_coprime(system.moduli):
        raise NonCoprimeModuli(f"moduli not pairwise coprime: {system.moduli}")
    solution = CrtSolution(*_crt_merge(system.congruences))
    if not solution.satisfies(system):  # pragma: no cover - arithmetic self-check
        raise AssertionError("CRT re-substitution failed")
    return solution


def iter_primes(start: int = 2):
    """Unbounded ascending prime stream (segmented sieve, doubling blocks)."""
    lo, size = 2, 1 << 15
    while True:
        hi = lo + size
        base = primes_upto(math.isqrt(hi) + 1)
        block = np.ones(hi - lo, dtype=bool)
        for p in base:
            first = max(p * p, (lo + p - 1) // p * p)
            block[first - lo :: p] = False
        for i in np.flatnonzero(block):
            p = lo + int(i)
            if p >= start:
                yield p
        lo, size = hi, min(size * 2, 1 << 22)


def iter_prime_squares():
    """An infinite pairwise-prime set of composites: p^2 for primes p."""
    for p in iter_primes():
        yield p * p


def select_coprime(stream, count: int, avoid: int = 1) -> list[int]:
    """First ``count`` elements >= 2 of ``stream`` coprime to ``avoid`` and to each other."""
    out, running = [], avoid
    for n in stream:
        if len(out) >= count:
            break
        if n >= 2 and math.gcd(n, running) == 1:
            out.append(n)
            running *= n
    if len(out) < count:
        raise PreconditionViolated(f"stream ran out after {len(out)} of {count} coprime elements")
    return out
