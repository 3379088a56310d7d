"""Certificate-producing constructions built on the CRT and the lattice T(l).

Each construction re-checks its own output before returning it: shift
certificates are re-substituted, gcd families are checked pair by pair,
Triveni triplets are verified against the window they came from.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Mapping, Sequence, Union

from .arith import (
    crt_solve,
    factorize,
    is_pairwise_coprime,
    iter_primes,
    lcm,
    primes_upto,
    residues_mod,
    select_coprime,
    smallest_prime_factor_table,
)
from .errors import (
    ElementNotInLattice,
    GrowthGuardExceeded,
    Inconclusive,
    NonCoprimeModuli,
    NonCoprimeX,
    NotFoundInWindow,
    PreconditionViolated,
    TriveniOrderExhausted,
    WindowTooSmall,
)
from .gpsearch import GPWitness, check_witness
from .lattice import TlLattice, build_lattice, c_bound, lambda_budget
from .synsets import SyndeticWindow, Window

DEFAULT_T_MAX = 16
MAX_FAMILY_H = 8
MAX_FAMILY_DIGITS = 100_000
MAX_EMBED_DIGITS = 50_000

Stream = Union[Callable[[], Iterator[int]], Iterable[int]]


def _stream(H0: Stream) -> Iterator[int]:
    return iter(H0()) if callable(H0) else iter(H0)


# ---------------------------------------------------------------------------
# shift certificates


@dataclass(frozen=True)
class ShiftCertificate:
    """u_t = u0 + t*stride satisfies (u_t + t_i) = m_i (mod m_i^2) for every t >= 0."""

    u0: int
    stride: int
    moduli: tuple[int, ...]
    offsets: tuple[int, ...]

    def position(self, t: int) -> int:
        return self.u0 + t * self.stride

    def quotient(self, t: int, i: int) -> int:
        """r_{i,t} = (u_t + t_i) / m_i, which is 1 mod m_i."""
        return (self.position(t) + self.offsets[i]) // self.moduli[i]

    def holds_at(self, t: int) -> bool:
        squares = [m * m for m in self.moduli]
        rems = residues_mod(self.position(t), squares)
        return all((r + ti) % sq == m for r, ti, sq, m in zip(rems, self.offsets, squares, self.moduli))

    def to_json(self) -> dict:
        return {
            "kind": "shift",
            "u0": str(self.u0),
            "stride": str(self.stride),
            "moduli": [str(m) for m in self.moduli],
            "offsets": [str(t) for t in self.offsets],
        }

    @classmethod
    def from_json(cls, d: dict) -> "ShiftCertificate":
        return cls(int(d["u0"]), int(d["stride"]), tuple(map(int, d["moduli"])), tuple(map(int, d["offsets"])))

    def recheck(self) -> str | None:
        if len(self.moduli) != len(self.offsets) or not self.moduli:
            return "moduli/offsets length mismatch"
        if not is_pairwise_coprime(self.moduli):
            return "moduli not pairwise coprime"
        if self.stride != math.prod(m * m for m in self.moduli):
            return "stride is not the product of squared moduli"
        for t in (0, 1, 2):
            if not self.holds_at(t):
                return f"congruence fails at t={t}"
        return None


def crt_shift(moduli: Sequence[int], offsets: Sequence[int]) -> ShiftCertificate:
    moduli, offsets = tuple(int(m) for m in moduli), tuple(int(t) for t in offsets)
    if len(moduli) != len(offsets) or not moduli:
        raise PreconditionViolated("need equally many (>= 1) moduli and offsets")
    if any(m < 2 for m in moduli) or any(t < 0 for t in offsets):
        raise PreconditionViolated("moduli must be >= 2 and offsets >= 0")
    if not is_pairwise_coprime(moduli):
        raise NonCoprimeModuli(f"moduli not pairwise coprime: {moduli}")
    sol = crt_solve([(m - t, m * m) for m, t in zip(moduli, offsets)])
    cert = ShiftCertificate(sol.base or sol.modulus, sol.modulus, moduli, offsets)
    if cert.recheck() is not None:  # pragma: no cover - arithmetic self-check
        raise AssertionError(cert.recheck())
    return cert


# ---------------------------------------------------------------------------
# gap or progression


@dataclass(frozen=True)
class GapCertificate:
    """u*[z_t, z_t + h - 1] misses the window for every probed t."""

    u: int
    B: tuple[int, ...]
    H: tuple[int, ...]
    k: int
    shift: ShiftCertificate
    probed: tuple[int, ...]

    @property
    def z0(self) -> int:
        return self.shift.u0

    @property
    def stride(self) -> int:
        return self.shift.stride

    @property
    def length(self) -> int:
        return len(self.B)

    def interval(self, t: int) -> tuple[int, int]:
        z = self.shift.position(t)
        return self.u * z, self.u * (z + self.length - 1)

    def probe(self, window: Window, t: int) -> GPWitness | None:
        """Branch 1 at shift t if some u*(z_t + j) is a member; raises if it does not fit."""
        z = self.shift.position(t)
        if not window.fits(self.u * (z + self.length - 1)):
            raise WindowTooSmall(f"shift t={t} runs past N={window.upper}", {"t": t, "N": window.upper})
        v = self.u * z
        for j in range(self.length):
            if v in window:
                w = GPWitness(self.u * self.B[j], self.H[j], self.k, self.shift.quotient(t, j), "gap-or-gp")
                if not check_witness(window, w):  # pragma: no cover - arithmetic self-check
                    raise AssertionError(f"constructed witness {w} fails")
                return w
            v += self.u
        return None

    def to_json(self) -> dict:
        return {
            "kind": "gap",
            "u": str(self.u),
            "B": [str(b) for b in self.B],
            "H": [str(n) for n in self.H],
            "k": str(self.k),
            "shift": self.shift.to_json(),
            "probed": list(self.probed),
        }


def _prepare_gap(window: Window, B: Iterable[int], u: int, H: Iterable[int], k: int):
    B, H = tuple(sorted(int(b) for b in B)), tuple(sorted(int(n) for n in H))
    if not B or len(B) != len(H):
        raise PreconditionViolated(f"|H| = {len(H)} must equal |B| = {len(B)} >= 1")
    if u < 1 or k < 1:
        raise PreconditionViolated("u and k must be >= 1")
    if min(H) < 2:
        raise PreconditionViolated("elements of H must be >= 2")
    if not is_pairwise_coprime(B):
        raise PreconditionViolated(f"B is not pairwise prime: {B}")
    if not is_pairwise_coprime(H):
        raise PreconditionViolated("H is not pairwise prime")
    if math.gcd(math.prod(B), math.prod(H)) != 1:
        raise PreconditionViolated("H and B share a prime")
    missing = [b for b in B if u * b not in window]
    if missing:
        raise PreconditionViolated(f"u*B not inside the window (e.g. {u * missing[0]})")
    return B, H


def gap_or_gp(
    window: Window,
    B: Iterable[int],
    u: int,
    H: Iterable[int],
    k: int,
    t_max: int = DEFAULT_T_MAX,
) -> GPWitness | GapCertificate:
    """Either a progression {u*b, u*b*n^k*r} or a verified family of empty blocks.

    B and H are paired in ascending order; with m_i = b_i * n_i^k the block
    positions z_t solve z + (i-1) = m_i (mod m_i^2).  Blocks are probed for
    t = 0..t_max (least t, then least j, wins) as long as they fit.
    """
    B, H = _prepare_gap(window, B, u, H, k)
    shift = crt_shift([b * n**k for b, n in zip(B, H)], range(len(B)))
    cert = GapCertificate(u, B, H, k, shift, ())
    probed = []
    for t in range(t_max + 1):
        try:
            w = cert.probe(window, t)
        except WindowTooSmall:
            break
        if w is not None:
            return w
        probed.append(t)
    if not probed:
        lo, hi = cert.interval(0)
        raise WindowTooSmall(
            f"first block [{lo}, {hi}] exceeds N={window.upper}",
            {"first_block_end": str(hi), "N": window.upper},
        )
    return GapCertificate(u, B, H, k, shift, tuple(probed))


def gp_from_pairwise_prime(
    window: Window,
    B: Iterable[int],
    k: int,
    H0: Stream = iter_primes,
    t_max: int = DEFAULT_T_MAX,
) -> GPWitness:
    """A pairwise-prime B inside an l-syndetic window with |B| >= l forces a progression."""
    B = tuple(sorted(int(b) for b in B))
    if not is_pairwise_coprime(B):
        raise PreconditionViolated(f"B is not pairwise prime: {B}")
    if window.l is None or len(B) < window.l:
        raise PreconditionViolated(f"|B| = {len(B)} is below the window's l = {window.l}")
    H = select_coprime(_stream(H0), len(B), math.prod(B))
    result = gap_or_gp(window, B, 1, H, k, t_max)
    if isinstance(result, GPWitness):
        return result
    # blocks of >= l consecutive integers with no member: only possible past the last member
    raise WindowTooSmall(
        "every probed block lies beyond the observable part of the window",
        {"probed_t": list(result.probed), "N": window.upper},
    )


# ---------------------------------------------------------------------------
# order-one Triveni triplets


def _candidates(window: Window, r: int, exclude_upto: int) -> Iterator[int]:
    if window.upper is None:
        raise PreconditionViolated("greedy extraction needs a bounded window")
    if isinstance(window, SyndeticWindow):
        mem = window.members
        mem = mem[(mem % r == 0) & (mem > exclude_upto)]
        yield from (int(v) // r for v in mem)
    else:
        for x in range(exclude_upto // r + 1, window.upper // r + 1):
            if r * x in window:
                yield x


def greedy_maximal_pairwise_prime(window: Window, r: int, exclude_upto: int | None = None) -> tuple[int, ...]:
    """Ascending greedy B with r*B inside the window minus [1, exclude_upto].

    ``exclude_upto`` defaults to the window's l.  The result is maximal
    among sets drawn from the window: no further x can be appended.
    """
    if r < 1:
        raise PreconditionViolated("r must be >= 1")
    exclude = (window.l or 0) if exclude_upto is None else exclude_upto
    if window.upper is None:
        raise PreconditionViolated("greedy extraction needs a bounded window")
    spf = smallest_prime_factor_table(max(window.upper // r, 1))
    used: set[int] = set()
    out = []
    for x in _candidates(window, r, exclude):
        primes, y = set(), x
        while y > 1:
            p = int(spf[y])
            primes.add(p)
            while y % p == 0:
                y //= p
        if used.isdisjoint(primes):
            out.append(x)
            used |= primes
    return tuple(out)


def order_one_triveni(window: Window, h: int, l: int | None = None) -> tuple[int, tuple[int, ...]]:
    """(d, B_d) with d in [2, l], |B_d| = h, d*B_d inside the window.

    Raises NotFoundInWindow with the per-d achieved sizes; ``d1_reaches_h``
    marks the case the caller should hand to :func:`gp_from_pairwise_prime`.
    """
    if h < 1:
        raise PreconditionViolated("h must be >= 1")
    l = window.l if l is None else l
    sizes = {}
    for d in range(1, (l or 0) + 1):
        B = greedy_maximal_pairwise_prime(window, d, exclude_upto=0)
        sizes[d] = len(B)
        if d >= 2 and len(B) >= h:
            return d, B[:h]
    raise NotFoundInWindow(
        f"no d in [2, {l}] reaches a pairwise-prime set of size {h}",
        {"sizes": sizes, "d1_reaches_h": sizes.get(1, 0) >= h},
    )


def sparse_complement_multiples(window: SyndeticWindow, x_max: int | None = None) -> list[int]:
    """x <= x_max with fewer than two multiples of x missing from [1, N].

    A finite surrogate for the hypothesis "|xN \\ A| >= 2 for every x";
    only x whose multiples reach far enough to show two gaps are judged.
    """
    N = window.upper
    x_max = N // 2 if x_max is None else min(x_max, N // 2)
    bits = window.bits
    return [x for x in range(1, x_max + 1) if int((~bits[x::x]).sum()) < 2]


# ---------------------------------------------------------------------------
# gcd-controlled families


@dataclass(frozen=True)
class GcdControlledFamily:
    l: int
    anchors: tuple[int, ...]
    bound: int
    products: tuple[int, ...] = field(repr=False)

    @property
    def h(self) -> int:
        return len(self.anchors)

    @property
    def intervals(self) -> list[tuple[int, int]]:
        return [(x, x + 2 * self.l) for x in self.anchors]

    @property
    def members(self) -> tuple[int, ...]:
        return tuple(v for x in self.anchors for v in range(x, x + 2 * self.l + 1))

    def prime_power_moduli(self, step: int) -> tuple[int, ...]:
        """Y at a step: exact prime powers of the product of S_step (factors each member)."""
        members = [v for x in self.anchors[:step] for v in range(x, x + 2 * self.l + 1)]
        exps: dict[int, int] = {}
        for v in members:
            for p, e in factorize(v).factors:
                exps[p] = exps.get(p, 0) + e
        return tuple(sorted(p**e for p, e in exps.items()))

    def to_json(self) -> dict:
        return {
            "kind": "family",
            "l": str(self.l),
            "anchors": [str(x) for x in self.anchors],
            "bound": str(self.bound),
        }


def gcd_failures(lattice: TlLattice, members: Sequence[int], limit: int = 1) -> list[tuple[int, int, int]]:
    """Pairs whose gcd falls outside T(l), up to ``limit`` of them."""
    bad = []
    for a, b in itertools.combinations(members, 2):
        g = math.gcd(a, abs(b - a)) if a != b else a
        if g not in lattice:
            bad.append((a, b, g))
            if len(bad) >= limit:
                break
    return bad


def recheck_family(l: int, anchors: Sequence[int], bound: int) -> str | None:
    lattice = build_lattice(l)
    if not anchors or anchors[0] != 1:
        return "first anchor must be 1"
    if any(b <= a + 2 * l for a, b in zip(anchors, anchors[1:])):
        return "anchors must leave the intervals disjoint and increasing"
    members = [v for x in anchors for v in range(x, x + 2 * l + 1)]
    if max(members) > bound:
        return f"member {max(members)} exceeds bound {bound}"
    bad = gcd_failures(lattice, members)
    if bad:
        return f"gcd{bad[0][:2]} = {bad[0][2]} not in T({l})"
    return None


def gcd_controlled_family(l: int, h: int, max_h: int = MAX_FAMILY_H, max_digits: int = MAX_FAMILY_DIGITS) -> GcdControlledFamily:
    """x_1 = 1, c(1) = 2l+1; x_{h+1} = 1 + prod(Y), c(h+1) = max(2l + x_{h+1}, c(h)).

    Y is the set of exact prime powers of m = prod S_h, so prod(Y) = m and
    the step never needs to factor m.
    """
    if l < 1 or h < 1:
        raise PreconditionViolated("l and h must be >= 1")
    if h > max_h:
        raise GrowthGuardExceeded(f"h={h} exceeds the family guard {max_h}", {"h": h, "max_h": max_h})
    anchors, products = [1], []
    bound = 2 * l + 1
    m = math.prod(range(1, 2 * l + 2))
    for _ in range(h - 1):
        products.append(m)
        x = 1 + m
        if x.bit_length() * 0.30103 > max_digits:
            raise GrowthGuardExceeded(f"anchor exceeds {max_digits} digits", {"h": h, "l": l})
        anchors.append(x)
        bound = max(2 * l + x, bound)
        m *= math.prod(range(x, x + 2 * l + 1))
    family = GcdControlledFamily(l, tuple(anchors), bound, tuple(products))
    reason = recheck_family(l, family.anchors, family.bound)
    if reason is not None:  # pragma: no cover - arithmetic self-check
        raise AssertionError(reason)
    return family


@dataclass(frozen=True)
class EmbeddedFamily:
    l: int
    h: int
    n: int
    L: int
    a0: int
    capacity: int
    base: GcdControlledFamily

    @property
    def anchors(self) -> tuple[int, ...]:
        return tuple(self.a0 + x for x in self.base.anchors)

    @property
    def members(self) -> tuple[int, ...]:
        return tuple(self.a0 + v for v in self.base.members)

    def to_json(self) -> dict:
        return {
            "kind": "embed",
            "l": str(self.l),
            "h": str(self.h),
            "n": str(self.n),
            "L": str(self.L),
            "a0": str(self.a0),
            "capacity": str(self.capacity),
            "anchors": [str(x) for x in self.anchors],
        }


def embedding_modulus(l: int, c: int, max_digits: int = MAX_EMBED_DIGITS) -> int:
    """L = prod over primes q <= c of q^(r(q,l)+1)."""
    # theta(c) ~ c, so L has roughly c / ln 10 digits
    if c * 0.4343 > max_digits * 1.1:
        raise GrowthGuardExceeded(f"L would have about {int(c * 0.4343)} digits", {"c": c, "max_digits": max_digits})
    bound = 2 * l + 1
    L = 1
    for q in primes_upto(c):
        e, power = 0, q
        while power <= bound:
            e += 1
            power *= q
        L *= q ** (e + 1)
    return L


def recheck_embedding(l: int, n: int, capacity: int, anchors: Sequence[int]) -> str | None:
    lattice = build_lattice(l)
    members = [v for x in anchors for v in range(x, x + 2 * l + 1)]
    if not members:
        return "empty family"
    if min(members) < n or max(members) > n + capacity:
        return f"members leave [{n}, {n + capacity}]"
    if any(b <= a + 2 * l for a, b in zip(anchors, anchors[1:])):
        return "intervals overlap or are not increasing"
    bad = gcd_failures(lattice, members)
    if bad:
        return f"gcd{bad[0][:2]} = {bad[0][2]} not in T({l})"
    return None


def embed_family(l: int, h: int, n: int, max_h: int = MAX_FAMILY_H, max_digits: int = MAX_EMBED_DIGITS) -> EmbeddedFamily:
    """Translate the gcd-controlled family by the multiple a0 of L in [n+1, n+L]."""
    if n < 1:
        raise PreconditionViolated("n must be >= 1")
    base = gcd_controlled_family(l, h, max_h=max_h)
    L = embedding_modulus(l, base.bound, max_digits)
    a0 = -(-(n + 1) // L) * L
    emb = EmbeddedFamily(l, h, n, L, a0, L + base.bound, base)
    reason = recheck_embedding(l, n, emb.capacity, emb.anchors)
    if reason is not None:  # pragma: no cover - arithmetic self-check
        raise AssertionError(reason)
    return emb


# ---------------------------------------------------------------------------
# offset alignment


@dataclass(frozen=True)
class AlignmentSolution:
    l: int
    triples: tuple[tuple[int, int, int], ...]
    z: int
    remainders: tuple[int, ...]
    multipliers: tuple[int, ...]

    def to_json(self) -> dict:
        return {
            "kind": "align",
            "l": str(self.l),
            "triples": [[str(a), str(x), str(u)] for a, x, u in self.triples],
            "z": str(self.z),
            "remainders": [str(r) for r in self.remainders],
            "multipliers": [str(t) for t in self.multipliers],
        }

    @classmethod
    def from_json(cls, d: dict) -> "AlignmentSolution":
        return cls(
            int(d["l"]),
            tuple(tuple(int(v) for v in t) for t in d["triples"]),
            int(d["z"]),
            tuple(int(r) for r in d["remainders"]),
            tuple(int(t) for t in d["multipliers"]),
        )

    def recheck(self) -> str | None:
        if len(self.triples) != len(self.remainders) or len(self.triples) != len(self.multipliers):
            return "length mismatch"
        C = c_bound(self.l)
        if self.z < 1:
            return "z must be positive"
        for (a, x, u), r, t in zip(self.triples, self.remainders, self.multipliers):
            if not 0 <= r <= C:
                return f"remainder {r} outside [0, {C}]"
            if t < 1:
                return f"multiplier {t} not positive"
            if self.z + r != a + t * x * u:
                return f"z + {r} != {a} + {t}*{x}*{u}"
        return None


def align_offsets(l: int, triples: Sequence[tuple[int, int, int]]) -> AlignmentSolution:
    """z, r_i in [0, C(l)], t_i >= 1 with z + r_i = a_i + t_i x_i u_i."""
    lattice = build_lattice(l)
    triples = tuple((int(a), int(x), int(u)) for a, x, u in triples)
    if not triples:
        raise PreconditionViolated("need at least one triple")
    for a, x, u in triples:
        if a < 0 or x < 1:
            raise PreconditionViolated("a_i must be >= 0 and x_i >= 1")
        if u not in lattice:
            raise ElementNotInLattice(f"u={u} is not in T({l})")
    xs = [x for _, x, _ in triples]
    if not is_pairwise_coprime(xs):
        raise NonCoprimeX(f"x_i not pairwise coprime: {xs}")
    u = lcm(*(ui for _, _, ui in triples))
    split = [divmod(a, u) for a, _, _ in triples]
    system = [(b, x) for (b, _), x in zip(split, xs) if x >= 2]
    sol = crt_solve(system)
    need = max(b + x for (b, _), x in zip(split, xs))
    b = sol.base if sol.base >= need else sol.base + -(-(need - sol.base) // sol.modulus) * sol.modulus
    multipliers = tuple((b - bi) // x * u // ui for (bi, _), (_, x, ui) in zip(split, triples))
    out = AlignmentSolution(l, triples, b * u, tuple(r for _, r in split), multipliers)
    if out.recheck() is not None:  # pragma: no cover - arithmetic self-check
        raise AssertionError(out.recheck())
    return out


# ---------------------------------------------------------------------------
# Triveni triplets


@dataclass(frozen=True)
class TriveniTriplet:
    F: frozenset
    h: int
    l: int
    witnesses: Mapping[int, tuple[int, ...]]

    @property
    def order(self) -> int:
        return len(self.F)

    def truncated(self, h: int) -> "TriveniTriplet":
        return TriveniTriplet(self.F, h, self.l, {u: tuple(B[:h]) for u, B in self.witnesses.items()})

    def to_json(self) -> dict:
        return {
            "kind": "triveni",
            "F": [str(u) for u in sorted(self.F)],
            "h": str(self.h),
            "l": str(self.l),
            "witnesses": {str(u): [str(b) for b in self.witnesses[u]] for u in sorted(self.witnesses)},
        }

    @classmethod
    def from_json(cls, d: dict) -> "TriveniTriplet":
        return cls(
            frozenset(int(u) for u in d["F"]),
            int(d["h"]),
            int(d["l"]),
            {int(u): tuple(int(b) for b in B) for u, B in d["witnesses"].items()},
        )


def triveni_failure(window: Window, triplet: TriveniTriplet) -> str | None:
    """First violated condition, or None when the triplet is valid for the window."""
    lattice = build_lattice(triplet.l)
    if set(triplet.witnesses) != set(triplet.F):
        return "witness keys differ from F"
    for u in sorted(triplet.F):
        if u == 1 or u not in lattice:
            return f"{u} is not in T({triplet.l}) minus 1"
        B = triplet.witnesses[u]
        if len(B) != triplet.h or len(set(B)) != len(B):
            return f"|B_{u}| = {len(set(B))} != h = {triplet.h}"
        if not is_pairwise_coprime(B):
            return f"B_{u} not pairwise prime"
        for b in B:
            if not window.fits(u * b) or u * b not in window:
                return f"{u}*{b} not in the window"
    for u, v in itertools.combinations(sorted(triplet.F), 2):
        if math.gcd(math.prod(triplet.witnesses[u]), math.prod(triplet.witnesses[v])) != 1:
            return f"B_{u} and B_{v} share a prime"
    return None


def verify_triveni(window: Window, triplet: TriveniTriplet) -> bool:
    return triveni_failure(window, triplet) is None


@dataclass(frozen=True)
class Extension:
    """w in T(l) minus Mul(F) with a pairwise-prime C of size h and w*C in the window."""

    w: int
    C: tuple[int, ...]
    diagnostics: dict = field(default_factory=dict, compare=False)


def _search_family(lattice: TlLattice, lo: int, hi: int, count: int) -> list[int] | None:
    """Greedy ascending: ``count`` disjoint intervals [s, s+2l] in [lo, hi], all gcds in T(l)."""
    width = 2 * lattice.l + 1
    residues: dict[int, int] = {}

    def gcd_ok(a: int, b: int) -> bool:
        d = b - a
        if d not in residues:
            residues[d] = lo % d
        return math.gcd((residues[d] + a) % d, d) in lattice

    starts: list[int] = []
    chosen: list[int] = []
    p, span = 0, hi - lo
    while p + width - 1 <= span and len(starts) < count:
        block = range(p, p + width)
        if all(gcd_ok(b, a) for a in block for b in chosen):
            starts.append(p)
            chosen.extend(block)
            p += width
        else:
            p += 1
    if len(starts) < count:
        return None
    return [lo + s for s in starts]


def lambda_for(h: int, l: int) -> int:
    """Witness-size budget for growth at (h, l), computed literally.  Explodes quickly."""
    D = build_lattice(l).D
    return lambda_budget(embed_family(l, D * h, 1).capacity, l)


def extend_triveni(
    window: Window,
    triplet: TriveniTriplet,
    k: int,
    H0: Stream,
    h: int,
    t_max: int = DEFAULT_T_MAX,
    strict_budget: bool = False,
) -> Extension | GPWitness:
    """Find (w, C_w) outside Mul(F), or surface the progression that blocks the search.

    Pipeline: per-u gap certificates, alignment of their shifts, a
    gcd-controlled family of D(l)*h intervals inside the common gap,
    least-member selection, and a pigeonhole on the largest admissible
    divisor.  With ``strict_budget`` the witness sets must have the full
    size m(D(l)h, l) + 2C(l); otherwise the family is searched for directly
    inside the gap and the step is inconclusive when it does not fit.
    """
    reason = triveni_failure(window, triplet)
    if reason is not None:
        raise PreconditionViolated(f"input triplet invalid: {reason}")
    if not triplet.F:
        raise PreconditionViolated("extend needs a non-empty F")
    l, s = triplet.l, triplet.h
    lattice = build_lattice(l)
    C, D = lattice.C, lattice.D
    count = D * h
    if strict_budget and s < lambda_for(h, l):
        raise PreconditionViolated(f"witness sets of size {s} are below the required budget")
    F = sorted(triplet.F)
    allowed = lattice.complement_of_mul(F)
    diag: dict = {"l": l, "witness_size": s, "intervals": count}

    running = math.prod(b for u in F for b in triplet.witnesses[u])
    stream = _stream(H0)
    certs: dict[int, GapCertificate] = {}
    for u in F:
        H_u = select_coprime(stream, s, running)
        running *= math.prod(H_u)
        res = gap_or_gp(window, triplet.witnesses[u], u, H_u, k, t_max)
        if isinstance(res, GPWitness):
            return res
        certs[u] = res

    align = align_offsets(l, [(u * certs[u].z0, certs[u].stride, u) for u in F])
    for u, t_u in zip(F, align.multipliers):
        w = certs[u].probe(window, t_u)
        if w is not None:
            return w

    lo, hi = align.z + C, align.z + s - C
    diag["gap"] = {"z_bits": align.z.bit_length(), "length": hi - lo + 1}
    starts = None
    try:
        emb = embed_family(l, count, lo)
        if emb.capacity <= hi - lo:
            starts = list(emb.anchors)
            diag["family"] = "embedded"
    except GrowthGuardExceeded:
        pass
    if starts is None:
        starts = _search_family(lattice, lo, hi, count) if hi >= lo else None
        diag["family"] = "searched"
    if starts is None:
        raise Inconclusive(
            f"gap of length {hi - lo + 1} cannot host {count} gcd-controlled intervals; enlarge the witness sets",
            diag,
        )
    family_members = [v for a in starts for v in range(a, a + 2 * l + 1)]
    bad = gcd_failures(lattice, family_members)
    if bad:  # pragma: no cover - construction self-check
        raise AssertionError(f"family gcd check failed: {bad}")

    picks = []
    for a in starts:
        hit = next((v for v in range(a, a + 2 * l + 1) if v in window), None)
        if hit is None:
            raise Inconclusive(f"interval at offset {a - align.z} has no member", diag)
        picks.append(hit)
    for x, y in itertools.combinations(picks, 2):
        g = math.gcd(x, y - x)
        if g not in allowed:
            raise Inconclusive(f"selected gcd {g} lies in Mul(F)", diag)

    classes: dict[int, list[int]] = {}
    for v in picks:
        classes.setdefault(lattice.max_divisor_in(v, allowed), []).append(v)
    diag["classes"] = {str(w): len(vs) for w, vs in sorted(classes.items())}
    full = [w for w, vs in classes.items() if len(vs) >= h]
    # pigeonhole: D(l)*h picks over at most D(l) classes
    w = max(full, key=lambda v: (v != 1, len(classes[v]), v))
    C_w = tuple(v // w for v in classes[w][:h])
    if not is_pairwise_coprime(C_w) or any(w * c not in window for c in C_w):  # pragma: no cover
        raise AssertionError("extension self-check failed")
    return Extension(w, C_w, diag)


def _prime_support_bound(xs: Iterable[int], factor_limit: int = 10**30) -> int:
    """|primes dividing some x|, or an upper bound when a cofactor is too large to split."""
    primes: set[int] = set()
    extra = 0
    small = primes_upto(1000)
    for x in xs:
        if x <= factor_limit:
            primes.update(p for p, _ in factorize(x).factors)
            continue
        for p in small:
            if x % p == 0:
                primes.add(p)
                while x % p == 0:
                    x //= p
        if x > 1:
            # every remaining prime exceeds 1000
            extra += int(math.log(x) / math.log(1000)) + 1
    return len(primes) + extra


def grow_triveni_order(
    window: Window,
    triplet: TriveniTriplet,
    k: int,
    H0: Stream = iter_primes,
    k0: int | None = None,
    t_max: int = DEFAULT_T_MAX,
) -> TriveniTriplet | GPWitness:
    """F' = F + {v} with witness sets of size k0 (default 2l+2), or a progression."""
    l = triplet.l
    lattice = build_lattice(l)
    k0 = 2 * l + 2 if k0 is None else k0
    if k0 <= 2 * l + 1:
        raise PreconditionViolated(f"k0 must lie outside [1, {2 * l + 1}]")
    if not [v for v in lattice.complement_of_mul(triplet.F) if v != 1]:
        raise TriveniOrderExhausted(
            f"order {len(triplet.F)} with T({l}) \\ Mul(F) = {{1}}: a strictly larger F cannot exist",
            {"order": len(triplet.F), "D": lattice.D},
        )
    if triplet.h < k0:
        raise PreconditionViolated(f"witness sets of size {triplet.h} are below k0 = {k0}")
    base = triplet.truncated(k0)
    W = _prime_support_bound(b for B in base.witnesses.values() for b in B)
    ext = extend_triveni(window, triplet, k, H0, W + k0, t_max)
    if isinstance(ext, GPWitness):
        return ext
    if ext.w == 1:
        return gp_from_pairwise_prime(window, ext.C, k, H0, t_max)
    old = math.prod(b for B in base.witnesses.values() for b in B)
    B_v = tuple(c for c in ext.C if math.gcd(c, old) == 1)[:k0]
    if len(B_v) < k0:  # pragma: no cover - W bounds the number of discarded elements
        raise AssertionError("too few elements of C_v avoid the existing primes")
    grown = TriveniTriplet(base.F | {ext.w}, k0, l, {**base.witnesses, ext.w: B_v})
    reason = triveni_failure(window, grown)
    if reason is not None:  # pragma: no cover - construction self-check
        raise AssertionError(reason)
    return grown
