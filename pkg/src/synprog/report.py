"""JSON reports and their independent re-verification."""

from __future__ import annotations

import json
import sys
from typing import Any

from .constructions import (
    AlignmentSolution,
    ShiftCertificate,
    TriveniTriplet,
    recheck_embedding,
    recheck_family,
    triveni_failure,
)
from .errors import OutOfWindow, SynprogError
from .gpsearch import GPWitness, witness_failure
from .synsets import Window

SCHEMA = "synprog-report/1"


def allow_huge_integers() -> None:
    # construction outputs routinely exceed the default 4300-digit str() limit
    if hasattr(sys, "set_int_max_str_digits"):
        sys.set_int_max_str_digits(0)


def window_summary(window: Window | None) -> dict | None:
    if window is None:
        return None
    return {"provenance": window.provenance, "N": window.upper, "l": window.l}


def witness_entry(window: Window | None, w: GPWitness) -> dict:
    reason = None
    if window is not None:
        try:
            reason = witness_failure(window, w)
        except OutOfWindow as exc:
            reason = str(exc)
    entry = w.to_json(verified=window is not None and reason is None)
    if reason is not None:
        entry["failure"] = reason
    return entry


def build_report(
    command: dict,
    window: Window | None,
    witnesses=(),
    certificates=(),
    diagnostics=(),
    elapsed_ms: float = 0.0,
) -> dict:
    return {
        "schema": SCHEMA,
        "command": command,
        "window": window_summary(window),
        "witnesses": [witness_entry(window, w) for w in witnesses],
        "certificates": list(certificates),
        "diagnostics": list(diagnostics),
        "elapsed_ms": round(elapsed_ms, 3),
    }


def render(report: dict) -> str:
    allow_huge_integers()
    return json.dumps(report, indent=2, default=_jsonable) + "\n"


def _jsonable(value: Any):
    if isinstance(value, (set, frozenset, tuple)):
        return sorted(value) if isinstance(value, (set, frozenset)) else list(value)
    if hasattr(value, "item"):  # numpy scalars
        return value.item()
    raise TypeError(f"cannot serialize {type(value).__name__}")


def certificate_failure(cert: dict, window: Window | None) -> str | None:
    """Re-derive a certificate's correctness from its own fields (and the window when needed)."""
    kind = cert.get("kind")
    try:
        if kind == "shift":
            return ShiftCertificate.from_json(cert).recheck()
        if kind == "gap":
            return _gap_failure(cert, window)
        if kind == "family":
            return recheck_family(int(cert["l"]), [int(x) for x in cert["anchors"]], int(cert["bound"]))
        if kind == "embed":
            return recheck_embedding(
                int(cert["l"]), int(cert["n"]), int(cert["capacity"]), [int(x) for x in cert["anchors"]]
            )
        if kind == "align":
            return AlignmentSolution.from_json(cert).recheck()
        if kind == "triveni":
            if window is None:
                return "a set file is needed to check a triveni certificate"
            return triveni_failure(window, TriveniTriplet.from_json(cert))
    except (KeyError, TypeError, ValueError, SynprogError) as exc:
        return f"malformed certificate: {exc}"
    return f"unknown certificate kind {kind!r}"


def _gap_failure(cert: dict, window: Window | None) -> str | None:
    shift = ShiftCertificate.from_json(cert["shift"])
    reason = shift.recheck()
    if reason is not None:
        return reason
    if window is None:
        return "a set file is needed to check a gap certificate"
    u, h = int(cert["u"]), len(cert["B"])
    for t in cert["probed"]:
        z = shift.position(int(t))
        for j in range(h):
            if u * (z + j) in window:
                return f"probed block at t={t} contains {u * (z + j)}"
    return None


def verify_report(report: dict, window: Window | None) -> list[str]:
    """Every failing item, described; an empty list means the report checks out."""
    problems = []
    if report.get("schema") != SCHEMA:
        problems.append(f"schema is {report.get('schema')!r}, expected {SCHEMA!r}")
    stated = report.get("window")
    if stated and window is not None and stated.get("N") is not None and stated["N"] > (window.upper or 0):
        problems.append(f"report window N={stated['N']} exceeds the set file's N={window.upper}")
    for i, entry in enumerate(report.get("witnesses", [])):
        try:
            w = GPWitness.from_json(entry)
        except (KeyError, TypeError, ValueError) as exc:
            problems.append(f"witness #{i}: malformed ({exc})")
            continue
        if window is None:
            problems.append(f"witness #{i}: a set file is needed")
            continue
        try:
            reason = witness_failure(window, w)
        except OutOfWindow as exc:
            reason = str(exc)
        if reason is None and str(w.ratio) != str(entry.get("ratio", w.ratio)):
            reason = f"stated ratio {entry['ratio']} != n^k*r = {w.ratio}"
        if reason is not None:
            problems.append(f"witness #{i} (x={w.x}, n={w.n}, k={w.k}, r={w.r}): {reason}")
    for i, cert in enumerate(report.get("certificates", [])):
        reason = certificate_failure(cert, window)
        if reason is not None:
            problems.append(f"certificate #{i} ({cert.get('kind')}): {reason}")
    return problems
