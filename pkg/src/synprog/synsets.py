"""Finite windows A ∩ [1, N] of (claimed) syndetic sets.

Two kinds of window share one membership protocol (``x in window``,
``window.upper``, ``window.l``):

* :class:`SyndeticWindow` is a bitmap over [1, N], built by
  :func:`materialize` or loaded from a set file;
* :class:`RuleWindow` evaluates a rule pointwise, so it can answer for
  integers with thousands of digits (the constructions need this).

Rules are written in a tiny DSL, e.g. ``union(ap(0,3), list(1,2))`` or
``random-syndetic(l=2, density=0.1, seed=42)``.
"""

from __future__ import annotations

import math
import os
import re
import tempfile
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Union

import numpy as np

from .arith import is_probable_prime, primes_upto
from .errors import (
    EmptyWindow,
    NotSyndeticInWindow,
    PreconditionViolated,
    RuleSyntaxError,
    SetFileError,
)

DEFAULT_MAX_GAP = 16
HEADER_RE = re.compile(r"# synset v1 N=([1-9][0-9]*) l=([1-9][0-9]*)")

# ---------------------------------------------------------------------------
# rule DSL

Arg = Union[int, float, "SetRule"]

# name -> (min positional, max positional or None, allowed keywords, nested rules?)
_PRIMITIVES = {
    "ap": (2, 2, (), False),
    "interval": (2, 2, (), False),
    "list": (0, None, (), False),
    "union": (1, None, (), True),
    "intersect": (1, None, (), True),
    "complement": (1, 1, (), True),
    "random-syndetic": (0, 0, ("l", "density", "seed"), False),
    "squares": (0, 0, (), False),
    "odds": (0, 0, (), False),
    "evens": (0, 0, (), False),
    "primes": (0, 0, (), False),
    "full": (0, 0, (), False),
}
_BARE = {"squares", "odds", "evens", "primes", "full"}


@dataclass(frozen=True)
class SetRule:
    name: str
    args: tuple = ()
    kwargs: tuple = ()  # sorted (key, value) pairs

    def kw(self, key, default=None):
        return dict(self.kwargs).get(key, default)

    def render(self) -> str:
        if not self.args and not self.kwargs and self.name in _BARE:
            return self.name
        parts = [a.render() if isinstance(a, SetRule) else repr(a) for a in self.args]
        parts += [f"{k}={v!r}" for k, v in self.kwargs]
        return f"{self.name}({','.join(parts)})"

    def __str__(self) -> str:
        return self.render()

    @property
    def pointwise(self) -> bool:
        """False when membership needs the whole prefix (random rules)."""
        if self.name == "random-syndetic":
            return False
        return all(a.pointwise for a in self.args if isinstance(a, SetRule))

    def contains(self, x: int) -> bool:
        if x < 1:
            return False
        name, a = self.name, self.args
        if name == "ap":
            return x >= a[0] and (x - a[0]) % a[1] == 0
        if name == "interval":
            return a[0] <= x <= a[1]
        if name == "list":
            members, top = self._listed
            return x <= top and x in members
        if name == "union":
            return any(r.contains(x) for r in a)
        if name == "intersect":
            return all(r.contains(x) for r in a)
        if name == "complement":
            return not a[0].contains(x)
        if name == "squares":
            return math.isqrt(x) ** 2 == x
        # bit tests stay O(1) on the huge integers the constructions produce
        if name == "odds":
            return x & 1 == 1
        if name == "evens":
            return x & 1 == 0
        if name == "primes":
            return is_probable_prime(x)
        if name == "full":
            return True
        raise PreconditionViolated(f"{name} has no pointwise membership; materialize it instead")

    @cached_property
    def _listed(self) -> tuple[frozenset, int]:
        return frozenset(self.args), max(self.args, default=0)

    def mask(self, upper: int) -> np.ndarray:
        """Boolean array of length upper+1; index 0 is always False."""
        out = np.zeros(upper + 1, dtype=bool)
        name, a = self.name, self.args
        if name == "ap":
            start, d = a
            first = start if start >= 1 else start + d * math.ceil((1 - start) / d)
            out[first::d] = True
        elif name == "interval":
            out[max(a[0], 1) : a[1] + 1] = True
        elif name == "list":
            vals = [v for v in a if 1 <= v <= upper]
            out[vals] = True
        elif name == "union":
            for r in a:
                out |= r.mask(upper)
        elif name == "intersect":
            out[1:] = True
            for r in a:
                out &= r.mask(upper)
        elif name == "complement":
            out = ~a[0].mask(upper)
        elif name == "squares":
            roots = np.arange(1, math.isqrt(upper) + 1)
            out[roots * roots] = True
        elif name == "odds":
            out[1::2] = True
        elif name == "evens":
            out[2::2] = True
        elif name == "primes":
            out[primes_upto(upper)] = True
        elif name == "full":
            out[1:] = True
        elif name == "random-syndetic":
            out = _random_syndetic_mask(upper, self.kw("l"), self.kw("density", 0.0), self.kw("seed"))
        out[0] = False
        return out


def _random_syndetic_mask(upper: int, l: int, density: float, seed: int) -> np.ndarray:
    # successive picks are 1..l apart, so every run of l consecutive integers is hit
    rng = np.random.default_rng(seed)
    steps = rng.integers(1, l + 1, size=upper)
    picks = np.cumsum(steps)
    out = np.zeros(upper + 1, dtype=bool)
    out[picks[picks <= upper]] = True
    if density > 0:
        out |= rng.random(upper + 1) < density
    out[0] = False
    return out


_IDENT = re.compile(r"[a-z][a-z0-9_-]*")
_NUMBER = re.compile(r"[0-9]+(\.[0-9]+)?")


class _Parser:
    def __init__(self, text: str, default_seed):
        self.text = text
        self.pos = 0
        self.default_seed = default_seed

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch):
        if self.peek() != ch:
            found = repr(self.peek()) if self.peek() else "end of input"
            raise RuleSyntaxError(f"expected {ch!r}, found {found}", self.pos)
        self.pos += 1

    def ident(self):
        self.skip_ws()
        m = _IDENT.match(self.text, self.pos)
        if not m:
            raise RuleSyntaxError("expected identifier", self.pos)
        self.pos = m.end()
        return m.group(0), m.start()

    def number(self):
        self.skip_ws()
        m = _NUMBER.match(self.text, self.pos)
        if not m:
            raise RuleSyntaxError("expected number", self.pos)
        self.pos = m.end()
        return float(m.group(0)) if m.group(1) else int(m.group(0))

    def rule(self) -> SetRule:
        name, at = self.ident()
        if name not in _PRIMITIVES:
            raise RuleSyntaxError(f"unknown primitive {name!r}", at)
        lo, hi, keywords, nested = _PRIMITIVES[name]
        args, kwargs = [], {}
        if self.peek() == "(":
            self.pos += 1
            if self.peek() != ")":
                while True:
                    args_at = self.pos
                    if self.peek().isdigit():
                        args.append(self.number())
                    elif self.peek().isalpha():
                        save = self.pos
                        key, key_at = self.ident()
                        if self.peek() == "=":
                            self.pos += 1
                            if key not in keywords:
                                raise RuleSyntaxError(f"{name} takes no keyword {key!r}", key_at)
                            kwargs[key] = self.number()
                        else:
                            self.pos = save
                            args.append(self.rule())
                    else:
                        found = repr(self.peek()) if self.peek() else "end of input"
                        raise RuleSyntaxError(f"expected argument, found {found}", args_at)
                    if self.peek() == ",":
                        self.pos += 1
                        continue
                    break
            self.expect(")")
        elif name not in _BARE:
            raise RuleSyntaxError(f"{name} needs an argument list", self.pos)
        if len(args) < lo or (hi is not None and len(args) > hi):
            raise RuleSyntaxError(f"{name} takes {lo}..{hi if hi is not None else 'n'} arguments", at)
        for a in args:
            if nested != isinstance(a, SetRule) or isinstance(a, float):
                raise RuleSyntaxError(f"bad argument {a!r} for {name}", at)
        if name == "ap" and args[1] < 1:
            raise RuleSyntaxError("ap difference must be >= 1", at)
        if name == "random-syndetic":
            if "seed" not in kwargs and self.default_seed is not None:
                kwargs["seed"] = self.default_seed
            if "l" not in kwargs or "seed" not in kwargs:
                raise RuleSyntaxError("random-syndetic requires l= and seed=", at)
            if not isinstance(kwargs["l"], int) or kwargs["l"] < 1 or not isinstance(kwargs["seed"], int):
                raise RuleSyntaxError("random-syndetic needs integer l >= 1 and integer seed", at)
            if not 0 <= kwargs.get("density", 0) <= 1:
                raise RuleSyntaxError("density must lie in [0, 1]", at)
        elif kwargs:
            raise RuleSyntaxError(f"{name} takes no keywords", at)
        return SetRule(name, tuple(args), tuple(sorted(kwargs.items())))


def parse_rule(text: str, default_seed: int | None = None) -> SetRule:
    p = _Parser(text, default_seed)
    rule = p.rule()
    p.skip_ws()
    if p.pos != len(text):
        raise RuleSyntaxError("trailing input", p.pos)
    return rule


# ---------------------------------------------------------------------------
# windows


class Window:
    """Membership protocol shared by bitmap and rule-backed windows."""

    upper: int | None
    l: int | None
    provenance: str

    def fits(self, x: int) -> bool:
        return self.upper is None or x <= self.upper

    def __contains__(self, x: int) -> bool:  # pragma: no cover - abstract
        raise NotImplementedError

    def describe(self) -> dict:
        return {"provenance": self.provenance, "N": self.upper, "l": self.l}


class SyndeticWindow(Window):
    """Bitmap window over [1, upper]; immutable after construction."""

    def __init__(self, upper: int, bits: np.ndarray, l: int | None = None, provenance: str = ""):
        if upper < 1:
            raise PreconditionViolated("window upper bound must be >= 1")
        bits = np.asarray(bits, dtype=bool)
        if bits.shape != (upper + 1,):
            raise PreconditionViolated("bitmap must have length upper+1")
        bits = bits.copy()
        bits[0] = False
        bits.flags.writeable = False
        self.upper = upper
        self.bits = bits
        self.provenance = provenance
        self._members = None
        self.measured_gap = _measured_gap(self.members)
        self.l = l if l is not None else self.measured_gap

    @classmethod
    def from_members(cls, upper, members, l=None, provenance=""):
        bits = np.zeros(upper + 1, dtype=bool)
        members = [int(m) for m in members]
        if any(m < 1 or m > upper for m in members):
            raise PreconditionViolated("members must lie in [1, upper]")
        bits[members] = True
        return cls(upper, bits, l=l, provenance=provenance)

    @property
    def members(self) -> np.ndarray:
        if self._members is None:
            self._members = np.flatnonzero(self.bits)
            self._members.flags.writeable = False
        return self._members

    def __contains__(self, x: int) -> bool:
        return 1 <= x <= self.upper and bool(self.bits[x])

    def __len__(self) -> int:
        return int(self.members.size)

    @property
    def is_claim_consistent(self) -> bool:
        return self.measured_gap is not None and self.measured_gap <= self.l

    def __repr__(self):
        return f"SyndeticWindow(N={self.upper}, l={self.l}, |A|={len(self)}, provenance={self.provenance!r})"


class RuleWindow(Window):
    """Pointwise window; ``upper=None`` means unbounded."""

    def __init__(self, rule: SetRule | str, l: int, upper: int | None = None, provenance: str | None = None):
        if isinstance(rule, str):
            rule = parse_rule(rule)
        if not rule.pointwise:
            raise PreconditionViolated("rule has no pointwise membership")
        self.rule = rule
        self.l = l
        self.upper = upper
        self.provenance = provenance if provenance is not None else rule.render()

    def __contains__(self, x: int) -> bool:
        return self.fits(x) and self.rule.contains(x)

    def __repr__(self):
        return f"RuleWindow({self.provenance!r}, l={self.l}, upper={self.upper})"


def _measured_gap(members: np.ndarray) -> int | None:
    if members.size == 0:
        return None
    gap = int(members[0])
    if members.size > 1:
        gap = max(gap, int(np.diff(members).max()))
    return gap


def syndetic_gap(window: SyndeticWindow) -> int:
    """Least l making the window l-syndetic up to its last member (tail excluded)."""
    if window.measured_gap is None:
        raise EmptyWindow("window has no members")
    return window.measured_gap


def materialize(rule: SetRule | str, upper: int, max_gap: int | None = DEFAULT_MAX_GAP) -> SyndeticWindow:
    """Evaluate a rule on [1, upper]; l becomes the measured gap."""
    if isinstance(rule, str):
        rule = parse_rule(rule)
    if upper < 1:
        raise PreconditionViolated("N must be >= 1")
    window = SyndeticWindow(upper, rule.mask(upper), provenance=rule.render())
    if window.measured_gap is None:
        raise EmptyWindow(f"{rule.render()} has no members in [1, {upper}]")
    if max_gap is not None and window.measured_gap > max_gap:
        raise NotSyndeticInWindow(
            f"{rule.render()} has gap {window.measured_gap} > {max_gap} on [1, {upper}]",
            {"gap": window.measured_gap, "max_gap": max_gap},
        )
    return window


# ---------------------------------------------------------------------------
# set files


def format_set_file(window: SyndeticWindow) -> str:
    lines = [f"# synset v1 N={window.upper} l={window.l}"]
    lines += [str(int(m)) for m in window.members]
    return "\n".join(lines) + "\n"


def atomic_write(path: str | os.PathLike, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent if str(path.parent) else ".", prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="ascii", newline="\n") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_set(window: SyndeticWindow, path: str | os.PathLike) -> None:
    atomic_write(path, format_set_file(window))


def load_set(path: str | os.PathLike) -> SyndeticWindow:
    try:
        text = Path(path).read_text(encoding="ascii")
    except (OSError, UnicodeDecodeError) as exc:
        raise SetFileError(f"cannot read {path}: {exc}") from exc
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise SetFileError(f"{path}: empty file")
    m = HEADER_RE.fullmatch(lines[0])
    if not m:
        raise SetFileError(f"{path}: bad header {lines[0]!r}", {"line": 1})
    upper, claimed = int(m.group(1)), int(m.group(2))
    values = []
    prev = 0
    for lineno, line in enumerate(lines[1:], start=2):
        if not re.fullmatch(r"[1-9][0-9]*", line):
            raise SetFileError(f"{path}:{lineno}: not a positive decimal integer: {line!r}", {"line": lineno})
        v = int(line)
        if v <= prev or v > upper:
            raise SetFileError(f"{path}:{lineno}: {v} out of order or beyond N={upper}", {"line": lineno})
        values.append(v)
        prev = v
    window = SyndeticWindow.from_members(upper, values, l=claimed, provenance=str(path))
    if window.measured_gap is not None and window.measured_gap > claimed:
        raise NotSyndeticInWindow(
            f"{path}: measured gap {window.measured_gap} exceeds claimed l={claimed}",
            {"gap": window.measured_gap, "claimed": claimed},
        )
    return window
