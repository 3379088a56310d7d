"""Command line: ``synprog gen|find|verify|construct``.

Exit codes: 0 success, 1 inconclusive, 2 input error, 3 guard or
feasibility failure, 4 verification failure.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
import time
from typing import Sequence

from . import constructions as cons
from .arith import primes_upto
from .errors import (
    GuardExceeded,
    Inconclusive,
    NotSyndeticInWindow,
    PreconditionViolated,
    SynprogError,
    TriveniOrderExhausted,
)
from .gpsearch import (
    DEFAULT_BUDGET,
    GPWitness,
    canonical,
    find_ratio_nkr,
    find_square_method1,
    find_square_method2,
)
from .report import allow_huge_integers, build_report, certificate_failure, render, verify_report
from .synsets import DEFAULT_MAX_GAP, atomic_write, load_set, materialize, parse_rule, save_set

EXIT_OK, EXIT_INCONCLUSIVE, EXIT_INPUT, EXIT_GUARD, EXIT_VERIFY = 0, 1, 2, 3, 4
MAX_NOTES = 32

# flags that change how a result is computed or delivered, not what it is
_UNECHOED = {"threads", "out", "func"}


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, Inconclusive):
        return EXIT_INCONCLUSIVE
    if isinstance(exc, (GuardExceeded, NotSyndeticInWindow, TriveniOrderExhausted)):
        return EXIT_GUARD
    # syntax, file and precondition errors
    return EXIT_INPUT


def parse_count(text: str) -> int:
    """Positive integers written as 100000, 10^5, 10**5 or 1e5."""
    s = text.strip().replace("_", "")
    m = re.fullmatch(r"(\d+)\s*(?:\^|\*\*)\s*(\d+)", s)
    if m:
        value = int(m.group(1)) ** int(m.group(2))
    elif re.fullmatch(r"\d+", s):
        value = int(s)
    elif re.fullmatch(r"\d+(?:\.\d+)?[eE]\d+", s):
        mant, exp = s.lower().split("e")
        whole, _, frac = mant.partition(".")
        value = int(whole + frac) * 10 ** int(exp)
        if len(frac) > int(exp) or value % 10 ** len(frac):
            raise argparse.ArgumentTypeError(f"{text!r} is not an integer")
        value //= 10 ** len(frac)
    else:
        raise argparse.ArgumentTypeError(f"cannot read {text!r} as a positive integer")
    if value < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return value


def parse_int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def parse_triples(text: str) -> list[tuple[int, int, int]]:
    out = []
    for chunk in text.replace(" ", "").split(","):
        parts = chunk.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError(f"triple {chunk!r} must read a:x:u")
        out.append(tuple(int(p) for p in parts))
    return out


def resolve_H(text: str, N: int, k: int) -> list[int]:
    """--h values: a comma list, or 'primes'/'composites' up to N^(1/k)."""
    top = math.isqrt(N) if k == 2 else int(round(N ** (1 / k)))
    while top**k > N:
        top -= 1
    while (top + 1) ** k <= N:
        top += 1
    if text in ("primes", "composites"):
        ps = primes_upto(max(top, 1))
        if text == "primes":
            return ps
        pset = set(ps)
        return [n for n in range(4, top + 1) if n not in pset]
    return parse_int_list(text)


def echo(args: argparse.Namespace) -> dict:
    return {key: value for key, value in sorted(vars(args).items()) if key not in _UNECHOED}


def emit(report: dict, out: str | None) -> None:
    text = render(report)
    if out:
        atomic_write(out, text)
    else:
        sys.stdout.write(text)


def _inconclusive_note(label: str, exc: SynprogError) -> dict:
    return {"source": label, "inconclusive": type(exc).__name__, "message": str(exc), **exc.diagnostics}


# ---------------------------------------------------------------------------
# commands


def cmd_gen(args) -> int:
    rule = parse_rule(args.rule, default_seed=args.seed)
    window = materialize(rule, args.n, max_gap=args.max_gap)
    save_set(window, args.out)
    print(f"wrote {args.out}: N={window.upper} l={window.l} members={len(window)}")
    return EXIT_OK


def cmd_find(args) -> int:
    started = time.perf_counter()
    window = load_set(args.set)
    witnesses: list[GPWitness] = []
    diagnostics: list[dict] = []
    if args.mode == "square":
        for label, finder in (("method1", find_square_method1), ("method2", find_square_method2)):
            try:
                res = finder(window, budget=args.budget, threads=args.threads)
            except Inconclusive as exc:
                diagnostics.append(_inconclusive_note(label, exc))
                continue
            witnesses.extend(res.witnesses)
            note = {"source": label, "probed": res.probed, "witnesses": len(res.witnesses)}
            if label == "method1":
                note["odd_squares"] = len(res.odd_squares)
            note["notes"] = res.diagnostics[:MAX_NOTES]
            note["notes_total"] = len(res.diagnostics)
            diagnostics.append(note)
        witnesses = canonical(witnesses, args.budget)
    else:
        H = resolve_H(args.h, window.upper, args.k)
        witnesses = find_ratio_nkr(window, args.k, H, budget=args.budget, threads=args.threads)
        diagnostics.append({"source": "nkr", "k": args.k, "H_size": len(H), "witnesses": len(witnesses)})
    if not witnesses:
        diagnostics.append({"source": "find", "inconclusive": "no witness in window", "N": window.upper})
    report = build_report(echo(args), window, witnesses, (), diagnostics, (time.perf_counter() - started) * 1e3)
    emit(report, args.out)
    verified = sum(1 for w in report["witnesses"] if w["verified"])
    return EXIT_OK if verified else EXIT_INCONCLUSIVE


def cmd_verify(args) -> int:
    allow_huge_integers()
    try:
        with open(args.report, encoding="utf-8") as fh:
            report = json.load(fh)
    except json.JSONDecodeError as exc:
        print(f"error: {args.report} is not JSON: {exc}", file=sys.stderr)
        return EXIT_INPUT
    window = load_set(args.set) if args.set else None
    problems = verify_report(report, window)
    for p in problems:
        print(f"FAIL {p}")
    if problems:
        return EXIT_VERIFY
    print(f"ok: {len(report.get('witnesses', []))} witnesses, {len(report.get('certificates', []))} certificates")
    return EXIT_OK


def _with_recheck(cert: dict, window=None) -> dict:
    reason = certificate_failure(cert, window)
    return {**cert, "recheck": "pass" if reason is None else reason}


def cmd_construct(args) -> int:
    started = time.perf_counter()
    window, witnesses, certs, diag = None, [], [], []
    code = EXIT_OK
    kind = args.kind
    l = 1 if args.l is None else args.l
    if kind == "shift":
        if not args.moduli or args.offsets is None:
            raise PreconditionViolated("shift needs --moduli and --offsets")
        certs.append(cons.crt_shift(args.moduli, args.offsets).to_json())
    elif kind == "family":
        fam = cons.gcd_controlled_family(l, args.h)
        certs.append({**fam.to_json(), "members": [str(v) for v in fam.members]})
    elif kind == "embed":
        emb = cons.embed_family(l, args.h, args.n)
        certs.append({**emb.to_json(), "members": [str(v) for v in emb.members]})
    elif kind == "align":
        if not args.triples:
            raise PreconditionViolated("align needs --triples a:x:u,...")
        certs.append(cons.align_offsets(l, args.triples).to_json())
    elif kind == "triveni":
        if not args.set:
            raise PreconditionViolated("triveni needs --set")
        window = load_set(args.set)
        l = window.l if args.l is None else args.l
        d, B = cons.order_one_triveni(window, args.h, l)
        triplet = cons.TriveniTriplet(frozenset({d}), args.h, l, {d: B})
        certs.append(triplet.to_json())
        if args.grow:
            try:
                grown = cons.grow_triveni_order(window, triplet, args.k)
            except Inconclusive as exc:
                diag.append(_inconclusive_note("grow", exc))
                code = EXIT_INCONCLUSIVE
            else:
                if isinstance(grown, GPWitness):
                    witnesses.append(grown)
                else:
                    certs.append(grown.to_json())
    certs = [_with_recheck(c, window) for c in certs]
    if any(c["recheck"] != "pass" for c in certs):
        code = EXIT_VERIFY
    report = build_report(echo(args), window, witnesses, certs, diag, (time.perf_counter() - started) * 1e3)
    emit(report, args.out)
    return code


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="synprog", description="Geometric progressions in syndetic windows.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="materialize a rule into a set file")
    p.add_argument("rule")
    p.add_argument("--n", type=parse_count, required=True, help="window upper bound N")
    p.add_argument("--out", required=True)
    p.add_argument("--max-gap", type=int, default=DEFAULT_MAX_GAP, help="largest acceptable measured gap")
    p.add_argument("--seed", type=int, default=None, help="seed for random rules without one")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("find", help="search a set file for progressions")
    p.add_argument("set")
    p.add_argument("--mode", choices=("square", "nkr"), default="square")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--h", default="primes", help="admissible n: comma list, 'primes' or 'composites'")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_find)

    p = sub.add_parser("verify", help="re-check a report")
    p.add_argument("report")
    p.add_argument("set", nargs="?", default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("construct", help="run a construction and self-check it")
    p.add_argument("kind", choices=("shift", "family", "embed", "align", "triveni"))
    p.add_argument("--l", type=int, default=None, help="lattice parameter (default 1; the window's l for triveni)")
    p.add_argument("--h", type=int, default=1)
    p.add_argument("--n", type=parse_count, default=1)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--moduli", type=parse_int_list, default=None)
    p.add_argument("--offsets", type=parse_int_list, default=None)
    p.add_argument("--triples", type=parse_triples, default=None)
    p.add_argument("--set", default=None)
    p.add_argument("--grow", action="store_true", help="attempt one order-growth step (triveni)")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_construct)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "threads", 1) < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except (SynprogError, OSError, ValueError) as exc:
        code = exit_code_for(exc)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
