"""Text formats: zeroset v1, points v1 and the counterexample header block.

Zeroset v1::

    # minmodlab zeroset v1
    # key: value
    log_radius<TAB>log_multiplicity<TAB>[exact_multiplicity]<TAB>[angle]

Reals are written with 17 significant digits so parse(write(z)) == z.
"""

from __future__ import annotations

import math
from typing import Iterable

import numpy as np

from .counterexamples import CounterexampleSpec, EpsRule, RuleKind, Term
from .errors import MinModError, ParseError
from .logspace import LogReal
from .zeros import ZeroEntry, ZeroSet

ZEROSET_MAGIC = "# minmodlab zeroset v1"
POINTS_MAGIC = "# minmodlab points v1"


def fmt(x: float) -> str:
    return "%.17g" % x


def _parse_real(tok: str, line: int, what: str) -> float:
    try:
        val = float(tok)
    except ValueError:
        raise ParseError(line, f"{what} {tok!r} is not a decimal real") from None
    if not math.isfinite(val):
        raise ParseError(line, f"{what} must be finite")
    return val


def _lines(text: str, magic: str):
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0].rstrip("\r") != magic:
        raise ParseError(1, f"expected header {magic!r}")
    headers = {}
    body = []
    for no, raw in enumerate(lines[1:], start=2):
        ln = raw.rstrip("\r")
        if not ln.strip():
            continue
        if ln.startswith("#"):
            key, sep, val = ln[1:].partition(":")
            if sep:
                headers[key.strip()] = val.strip()
            continue
        body.append((no, ln))
    return headers, body


def parse_zeroset_with_headers(text: str) -> tuple[ZeroSet, dict]:
    headers, body = _lines(text, ZEROSET_MAGIC)
    entries = []
    prev = None
    for no, ln in body:
        fields = ln.split("\t")
        if not 2 <= len(fields) <= 4:
            raise ParseError(no, f"expected 2 to 4 tab-separated fields, got {len(fields)}")
        fields += [""] * (4 - len(fields))
        log_r = _parse_real(fields[0], no, "log_radius")
        log_k = _parse_real(fields[1], no, "log_multiplicity")
        exact = None
        if fields[2].strip():
            try:
                exact = int(fields[2])
            except ValueError:
                raise ParseError(no, f"exact_multiplicity {fields[2]!r} is not an integer") from None
        angle = _parse_real(fields[3], no, "angle") if fields[3].strip() else math.pi
        if prev is not None:
            if log_r == prev:
                raise ParseError(no, "repeated log_radius", code="DUPLICATE_RADIUS")
            if log_r < prev:
                raise ParseError(no, "log_radius not increasing", code="UNSORTED")
        prev = log_r
        try:
            entries.append(ZeroEntry(log_r, log_k, exact, angle))
        except MinModError as exc:
            raise ParseError(no, str(exc)) from None
    return ZeroSet(entries, headers.get("truncation", "")), headers


def parse_zeroset(text: str) -> ZeroSet:
    return parse_zeroset_with_headers(text)[0]


def write_zeroset(zeros: ZeroSet, headers: dict | None = None) -> str:
    out = [ZEROSET_MAGIC]
    hdr = dict(headers or {})
    if zeros.truncation_note:
        hdr.setdefault("truncation", zeros.truncation_note)
    for key, val in hdr.items():
        out.append(f"# {key}: {val}")
    for e in zeros.entries:
        exact = "" if e.exact_multiplicity is None else str(e.exact_multiplicity)
        out.append("\t".join([fmt(e.log_radius), fmt(e.log_multiplicity), exact, fmt(e.angle)]))
    return "\n".join(out) + "\n"


def parse_points(text: str) -> np.ndarray:
    _, body = _lines(text, POINTS_MAGIC)
    pts = []
    for no, ln in body:
        fields = ln.split("\t")
        if len(fields) != 2:
            raise ParseError(no, "expected re<TAB>im")
        pts.append(complex(_parse_real(fields[0], no, "re"), _parse_real(fields[1], no, "im")))
    return np.array(pts, dtype=complex)


def write_points(points: Iterable[complex]) -> str:
    out = [POINTS_MAGIC]
    out += [f"{fmt(p.real)}\t{fmt(p.imag)}" for p in (complex(z) for z in points)]
    return "\n".join(out) + "\n"


# -- counterexample block ------------------------------------------------------------


def _rule_from_label(label: str) -> EpsRule:
    if label == RuleKind.INV_SQRT.value:
        return EpsRule.inv_sqrt()
    if label.startswith("INV_LINEAR(") and label.endswith(")"):
        return EpsRule.inv_linear(float(label[len("INV_LINEAR("):-1]))
    if label.startswith("CUSTOM(") and label.endswith(")"):
        return EpsRule.custom([float(v) for v in label[len("CUSTOM("):-1].split(",") if v])
    raise ParseError(0, f"unknown rule {label!r}")


def write_counterexample(spec: CounterexampleSpec) -> str:
    certs = ";".join(",".join(f"{k}={int(v)}" for k, v in c.items()) for c in spec.certificates)
    headers = {
        "counterexample": "v1",
        "rule": spec.rule.label(),
        "log_r1": fmt(spec.r1.log_value),
        "requested_terms": str(spec.requested),
        "truncated": str(int(spec.truncated)),
        "eps": ",".join(fmt(t.eps) for t in spec.terms),
        "certificates": certs,
    }
    return write_zeroset(spec.to_zeroset(), headers)


def parse_counterexample(text: str) -> CounterexampleSpec:
    zeros, hdr = parse_zeroset_with_headers(text)
    if hdr.get("counterexample") != "v1":
        raise ParseError(1, "missing '# counterexample: v1' header")
    try:
        eps = [float(v) for v in hdr["eps"].split(",")]
        certs = []
        for block in filter(None, hdr.get("certificates", "").split(";")):
            certs.append({k: bool(int(v)) for k, v in (kv.split("=") for kv in block.split(","))})
        rule = _rule_from_label(hdr["rule"])
        r1 = LogReal(float(hdr["log_r1"]))
        requested = int(hdr["requested_terms"])
        truncated = bool(int(hdr["truncated"]))
    except (KeyError, ValueError) as exc:
        raise ParseError(1, f"bad counterexample header: {exc}") from None
    if len(eps) != len(zeros):
        raise ParseError(1, "eps list length differs from entry count")
    terms = tuple(Term(e.log_radius, e.log_multiplicity, ep, e.exact_multiplicity) for e, ep in zip(zeros, eps))
    return CounterexampleSpec(r1, rule, terms, tuple(certs), requested, truncated)
