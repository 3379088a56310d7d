"""Two-term geometric progressions {x, x*ratio} in windows.

Finders (square ratios in 2-syndetic windows, ratios n^k*r with
r = 1 mod n) plus an exhaustive multiple-enumeration oracle that the
finders are checked against.  Every finder returns witnesses that have
already passed :func:`check_witness`.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import NotTwoSyndetic, OutOfWindow, PreconditionViolated, WindowTooSmall
from .synsets import SyndeticWindow, Window

DEFAULT_BUDGET = 128


@dataclass(frozen=True)
class GPWitness:
    """{x, x * n**k * r}; square witnesses use k=2, r=1 and n = the square root."""

    x: int
    n: int
    k: int
    r: int
    branch: str = field(default="", compare=False)

    @classmethod
    def square(cls, x: int, root: int, branch: str = "") -> "GPWitness":
        return cls(x, root, 2, 1, branch)

    @property
    def ratio(self) -> int:
        return self.n**self.k * self.r

    @property
    def y(self) -> int:
        return self.x * self.ratio

    @property
    def is_square_ratio(self) -> bool:
        return math.isqrt(self.ratio) ** 2 == self.ratio

    def sort_key(self):
        return (self.x, self.ratio, self.n, self.k, self.r, self.branch)

    def to_json(self, verified: bool) -> dict:
        return {
            "x": str(self.x),
            "n": str(self.n),
            "k": str(self.k),
            "r": str(self.r),
            "ratio": str(self.ratio),
            "branch": self.branch,
            "verified": verified,
        }

    @classmethod
    def from_json(cls, d: dict) -> "GPWitness":
        return cls(int(d["x"]), int(d["n"]), int(d["k"]), int(d["r"]), d.get("branch", ""))


def witness_failure(window: Window, w: GPWitness) -> str | None:
    """Reason the witness fails, or None.  Raises OutOfWindow if x*ratio > N."""
    if not window.fits(w.y):
        raise OutOfWindow(f"{w.y} lies beyond N={window.upper}")
    if w.x < 1 or w.k < 1 or w.r < 1 or w.n < 1:
        return "non-positive component"
    if w.ratio < 2:
        return "ratio < 2"
    if w.n >= 2 and w.r % w.n != 1 % w.n:
        return f"r={w.r} is not 1 mod n={w.n}"
    if w.x not in window:
        return f"x={w.x} not a member"
    if w.y not in window:
        return f"x*ratio={w.y} not a member"
    return None


def check_witness(window: Window, w: GPWitness) -> bool:
    return witness_failure(window, w) is None


def canonical(witnesses: Iterable[GPWitness], budget: int | None = None) -> list[GPWitness]:
    """Sort by (x, ratio, ...), drop repeats of the same progression, cap at budget."""
    out, seen = [], set()
    for w in sorted(witnesses, key=GPWitness.sort_key):
        key = (w.x, w.n, w.k, w.r)
        if key in seen:
            continue
        seen.add(key)
        out.append(w)
        if budget is not None and len(out) >= budget:
            break
    return out


def _partition(items: Sequence, parts: int) -> list[Sequence]:
    parts = max(1, min(parts, len(items)))
    size = math.ceil(len(items) / parts) if items else 0
    return [items[i : i + size] for i in range(0, len(items), size)] if items else []


def _run_partitioned(fn: Callable, items: Sequence, threads: int) -> list:
    chunks = _partition(items, threads)
    if threads <= 1 or len(chunks) <= 1:
        return [fn(c) for c in chunks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, chunks))


def _require_two_syndetic(window: SyndeticWindow) -> None:
    if window.measured_gap is None or window.measured_gap > 2:
        raise NotTwoSyndetic(f"window gap {window.measured_gap} exceeds 2", {"gap": window.measured_gap})


@dataclass
class SearchResult:
    witnesses: list[GPWitness]
    odd_squares: list[int] = field(default_factory=list)
    diagnostics: list[dict] = field(default_factory=list)
    probed: int = 0


# ---------------------------------------------------------------------------
# square ratios, first method: odd m and the m^2 / m^2+1 dichotomy


class _Trace:
    def __init__(self, S: SyndeticWindow):
        self.S = S
        self.probed = 0
        self.witnesses: list[GPWitness] = []
        self.notes: list[dict] = []
        self.odd_squares: list[int] = []

    def member(self, x: int) -> bool | None:
        """Membership, or None when x lies beyond the window."""
        if not self.S.fits(x):
            return None
        self.probed += 1
        return x in self.S

    def emit(self, x: int, root: int, branch: str) -> bool:
        got = self.member(x * root * root)
        if got and x in self.S:
            self.witnesses.append(GPWitness.square(x, root, branch))
            return True
        return False


def _odd_square_chain(tr: _Trace, m: int) -> None:
    """Follow the chain from an odd m with m^2 in S."""
    S, N = tr.S, tr.S.upper
    m2 = m * m
    n = 2
    while m2 * n * n <= N:
        if m2 * n * n in S:
            tr.emit(m2, n, "odd-square-multiple")
            return
        n += 1
    # no m^2 n^2 in the window: the infinitary assumption is window-limited from here
    tr.notes.append({"m": m, "note": "odd-square-multiples absent up to N", "window_limited": True})
    tr.odd_squares.append(m)
    z = m  # odd with z^2 = 0 mod m
    z2 = z * z
    for i in (-1, 1):
        u = z2 + i
        if tr.member(u * u - 2) and tr.emit(u * u - 2, u, "shifted-square"):
            return
    for i in (-1, 1):
        if tr.member(z2 + 2 * i) and tr.emit(z2 + 2 * i, z, "neighbor-square"):
            return
    a = (z2 - 1) // 4
    for x in (a, a + 1):
        if x >= 2 and tr.member(x) and tr.emit(x, 2, "quarter"):
            return
    tr.notes.append({"m": m, "note": "chain exhausted without a witness inside the window"})


def _method1_one(tr: _Trace, m: int) -> None:
    m2 = m * m
    above = tr.member(m2 + 1)
    if above is None:
        return
    if above:
        if tr.emit(m2 + 1, 2 * m, "square-plus-one"):
            return
        big = 2 * m2 + 1
        if tr.member(big * big):
            _odd_square_chain(tr, big)
        else:
            tr.notes.append({"m": m, "note": "(2m^2+1)^2 not observable in window"})
        return
    if tr.member(m2):
        _odd_square_chain(tr, m)
    else:
        tr.notes.append({"m": m, "note": "neither m^2 nor m^2+1 in window"})


def find_square_method1(window: SyndeticWindow, budget: int = DEFAULT_BUDGET, threads: int = 1) -> SearchResult:
    """Square-ratio progressions via odd m, m^2+1 and the identity (2m^2+1)^2-1 = 4m^2(m^2+1)."""
    _require_two_syndetic(window)
    ms = list(range(3, math.isqrt(window.upper - 1) + 1, 2))

    def work(chunk):
        tr = _Trace(window)
        for m in chunk:
            _method1_one(tr, m)
        return tr

    traces = _run_partitioned(work, ms, threads)
    witnesses = canonical((w for t in traces for w in t.witnesses), budget)
    probed = sum(t.probed for t in traces)
    if not witnesses and probed == 0:
        raise WindowTooSmall("no method-1 target fits in the window", {"N": window.upper, "largest_m": ms[-1] if ms else None})
    return SearchResult(
        witnesses,
        odd_squares=sorted({m for t in traces for m in t.odd_squares}),
        diagnostics=[n for t in traces for n in t.notes],
        probed=probed,
    )


# ---------------------------------------------------------------------------
# square ratios, second method: a(4a+3)^2 + 1 = (a+1)(4a+1)^2


def find_square_method2(window: SyndeticWindow, budget: int = DEFAULT_BUDGET, threads: int = 1) -> SearchResult:
    _require_two_syndetic(window)
    N = window.upper
    a_max = 0
    # largest a with (a+1)(4a+1)^2 <= N
    while (a_max + 2) * (4 * a_max + 5) ** 2 <= N:
        a_max += 1

    def work(chunk):
        found, notes, pairs = [], [], 0
        for a in chunk:
            if a in window and a + 1 in window:
                pairs += 1
                low = a * (4 * a + 3) ** 2
                if low in window:
                    found.append(GPWitness.square(a, 4 * a + 3, "consecutive-pair"))
                elif low + 1 in window:
                    found.append(GPWitness.square(a + 1, 4 * a + 1, "consecutive-pair"))
                else:
                    notes.append({"a": a, "note": "neither a(4a+3)^2 nor its successor in window"})
        return found, notes, pairs

    parts = _run_partitioned(work, list(range(1, a_max + 1)), threads)
    witnesses = [w for f, _, _ in parts for w in f]
    notes = [n for _, ns, _ in parts for n in ns]
    pairs = sum(p for _, _, p in parts)
    probed = pairs
    if not witnesses:
        ap_found, ap_probed, note = _residual_progression(window, budget)
        witnesses += ap_found
        probed += ap_probed
        notes.append(note)
    witnesses = canonical(witnesses, budget)
    if not witnesses and probed == 0:
        raise WindowTooSmall("no method-2 target fits in the window", {"N": N, "a_max": a_max})
    return SearchResult(witnesses, diagnostics=notes, probed=probed)


def _residual_progression(window: SyndeticWindow, budget: int):
    """Tail of the window with no consecutive members: an AP of difference 2, ratio 9."""
    members = window.members
    diffs = np.diff(members)
    ones = np.flatnonzero(diffs == 1)
    start = int(ones[-1]) + 1 if ones.size else 0
    tail = members[start:]
    note = {"note": "residual progression", "start": int(tail[0]) if tail.size else None, "difference": 2}
    found, probed = [], 0
    d = 2
    ratio = (1 + d) ** 2
    for x in tail:
        x = int(x)
        if x * ratio > window.upper:
            break
        probed += 1
        if x * ratio in window:
            found.append(GPWitness.square(x, 1 + d, "residual-progression"))
            if len(found) >= budget:
                break
    return found, probed, note


# ---------------------------------------------------------------------------
# ratios n^k * r with r = 1 mod n


def find_ratio_nkr(
    window: SyndeticWindow,
    k: int,
    H: Iterable[int],
    budget: int = DEFAULT_BUDGET,
    threads: int = 1,
) -> list[GPWitness]:
    """Scan x ascending, then n in H, then r = 1, 1+n, 1+2n, ... while x n^k r <= N."""
    if k < 1:
        raise PreconditionViolated("k must be >= 1")
    H = sorted(set(int(n) for n in H))
    if not H or H[0] < 2:
        raise PreconditionViolated("H must be non-empty with elements >= 2")
    N = window.upper
    bits = window.bits
    bases = [n**k for n in H]
    xs = [int(x) for x in window.members if x * bases[0] <= N]

    def work(chunk):
        out = []
        for x in chunk:
            row = []
            for n, nk in zip(H, bases):
                step = x * nk
                if step > N:
                    break
                # y = x n^k (1 + j n)
                ys = np.arange(step, N + 1, step * n, dtype=np.int64)
                for j in np.flatnonzero(bits[ys]):
                    row.append(GPWitness(x, n, k, 1 + int(j) * n, "nkr-scan"))
            out.extend(sorted(row, key=GPWitness.sort_key))
            if len(out) >= budget:
                break
        return out[:budget]

    parts = _run_partitioned(work, xs, threads)
    return canonical((w for p in parts for w in p), budget)


# ---------------------------------------------------------------------------
# oracle


@dataclass(frozen=True)
class RatioClass:
    kind: str  # "any" | "square" | "nkr"
    k: int = 0
    H: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in ("any", "square", "nkr"):
            raise PreconditionViolated(f"unknown ratio class {self.kind!r}")
        if self.kind == "nkr" and (self.k < 1 or not self.H or min(self.H) < 2):
            raise PreconditionViolated("nkr class needs k >= 1 and H with elements >= 2")

    def admits(self, q: int) -> bool:
        if q < 2:
            return False
        if self.kind == "any":
            return True
        if self.kind == "square":
            return math.isqrt(q) ** 2 == q
        for n in self.H:
            nk = n**self.k
            if q % nk == 0 and (q // nk) % n == 1 % n:
                return True
        return False

    def ratios(self, N: int) -> list[int]:
        """All admissible ratios <= N, ascending (not used for kind 'any')."""
        if self.kind == "square":
            return [q * q for q in range(2, math.isqrt(N) + 1)]
        out = set()
        for n in self.H:
            nk = n**self.k
            r = 1
            while nk * r <= N:
                out.add(nk * r)
                r += n
        return sorted(q for q in out if q >= 2)


ANY = RatioClass("any")
SQUARE = RatioClass("square")


class OraclePairs:
    """All (x, y) with x < y in the window and y/x an admissible integer ratio."""

    def __init__(self, N: int, xs: np.ndarray, ys: np.ndarray):
        self.N = N
        self.xs = xs
        self.ys = ys
        self._keys = None

    def __len__(self) -> int:
        return int(self.xs.size)

    def _sorted_keys(self) -> np.ndarray:
        if self._keys is None:
            self._keys = np.sort(self.xs.astype(np.int64) * (self.N + 1) + self.ys.astype(np.int64))
        return self._keys

    def __contains__(self, pair) -> bool:
        x, y = pair
        if not (1 <= x <= self.N and 1 <= y <= self.N):
            return False
        keys = self._sorted_keys()
        key = x * (self.N + 1) + y
        i = int(np.searchsorted(keys, key))
        return i < keys.size and int(keys[i]) == key

    def pairs(self) -> list[tuple[int, int]]:
        order = np.lexsort((self.ys, self.xs))
        return [(int(a), int(b)) for a, b in zip(self.xs[order], self.ys[order])]


def oracle_enumerate(window: SyndeticWindow, ratio_class: RatioClass = ANY) -> OraclePairs:
    """Exhaustive enumeration of multiples, O(N log N) for the 'any' class."""
    N = window.upper
    bits = window.bits
    S = window.members
    dtype = np.int32 if N < 2**31 else np.int64
    xs_parts, ys_parts = [], []

    if ratio_class.kind == "any":
        cut = math.isqrt(N)
        # small x: walk the multiples of x directly
        for x in S[S <= cut]:
            x = int(x)
            hits = np.flatnonzero(bits[2 * x :: x])
            if hits.size:
                ys_parts.append((2 * x + hits.astype(np.int64) * x).astype(dtype))
                xs_parts.append(np.full(hits.size, x, dtype=dtype))
        # large x: the quotient q = y/x is below N/cut, walk q instead
        big = S[S > cut].astype(np.int64)
        for q in range(2, N // (cut + 1) + 1):
            cand = big[: np.searchsorted(big, N // q, side="right")]
            if cand.size == 0:
                break
            keep = cand[bits[cand * q]]
            if keep.size:
                xs_parts.append(keep.astype(dtype))
                ys_parts.append((keep * q).astype(dtype))
    else:
        S64 = S.astype(np.int64)
        for q in ratio_class.ratios(N):
            cand = S64[: np.searchsorted(S64, N // q, side="right")]
            if cand.size == 0:
                break
            keep = cand[bits[cand * q]]
            if keep.size:
                xs_parts.append(keep.astype(dtype))
                ys_parts.append((keep * q).astype(dtype))

    if xs_parts:
        xs, ys = np.concatenate(xs_parts), np.concatenate(ys_parts)
    else:
        xs = ys = np.zeros(0, dtype=dtype)
    return OraclePairs(N, xs, ys)
