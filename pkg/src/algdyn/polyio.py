"""Polynomial text formats.

The JSON form is canonical::

    {"d": 2, "terms": [{"exp": [0, 0], "coef": 4}, {"exp": [1, 0], "coef": -1}]}

The compact expression syntax (``4 - u1 - u1^-1 - u2 - u2^-1``) is a
convenience layer that always round-trips through the JSON form. In one
variable ``u`` is accepted as an alias of ``u1``.
"""
from __future__ import annotations

import json
import os
import re
from fractions import Fraction

from .errors import ParseError
from .group_ring import GroupRingElement, LaurentPolynomial, from_terms

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+)|(?P<var>u(?P<idx>\d*))|(?P<op>[-+*^()])|(?P<bad>\S))"
)


def to_json_obj(f: LaurentPolynomial) -> dict:
    terms = []
    for m, c in f.items():
        c = Fraction(c)
        coef = int(c) if c.denominator == 1 else str(c)
        terms.append({"exp": list(m), "coef": coef})
    return {"d": f.dim, "terms": terms}


def from_json_obj(obj: dict) -> GroupRingElement:
    try:
        d = int(obj["d"])
        pairs = [(t["exp"], int(t["coef"])) for t in obj["terms"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed polynomial JSON: {exc}") from exc
    try:
        return from_terms(d, pairs)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def dumps(f: LaurentPolynomial) -> str:
    return json.dumps(to_json_obj(f), sort_keys=True)


def loads(text: str) -> GroupRingElement:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    return from_json_obj(obj)


def _tokens(text):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            break
        if m.group("bad"):
            raise ParseError(f"unexpected character {m.group('bad')!r} at {m.start('bad')}")
        if m.group("num"):
            out.append(("num", int(m.group("num"))))
        elif m.group("var"):
            idx = m.group("idx")
            out.append(("var", int(idx) if idx else 1))
        else:
            out.append(("op", m.group("op")))
        pos = m.end()
    if text[pos:].strip():
        raise ParseError(f"trailing input {text[pos:]!r}")
    return out


def _parse_int(toks, i):
    sign = 1
    if i < len(toks) and toks[i] == ("op", "("):
        val, i = _parse_int(toks, i + 1)
        if i >= len(toks) or toks[i] != ("op", ")"):
            raise ParseError("unbalanced parenthesis in exponent")
        return val, i + 1
    while i < len(toks) and toks[i][0] == "op" and toks[i][1] in "+-":
        if toks[i][1] == "-":
            sign = -sign
        i += 1
    if i >= len(toks) or toks[i][0] != "num":
        raise ParseError("expected an integer")
    return sign * toks[i][1], i + 1


def parse_expression(text: str, dim: int | None = None) -> GroupRingElement:
    """Parse ``[+-] [c] [*] u<i>[^e] ...`` sums of monomials."""
    toks = _tokens(text)
    if not toks:
        raise ParseError("empty expression")
    raw = []  # (sign*coef, {var: power})
    i = 0
    while i < len(toks):
        sign = 1
        seen_sign = False
        while i < len(toks) and toks[i][0] == "op" and toks[i][1] in "+-":
            if toks[i][1] == "-":
                sign = -sign
            seen_sign = True
            i += 1
        if raw and not seen_sign:
            raise ParseError("missing '+' or '-' between terms")
        coef = 1
        powers = {}
        got = False
        while i < len(toks):
            kind, val = toks[i]
            if kind == "num":
                coef *= val
                i += 1
            elif kind == "var":
                i += 1
                p = 1
                if i < len(toks) and toks[i] == ("op", "^"):
                    p, i = _parse_int(toks, i + 1)
                powers[val] = powers.get(val, 0) + p
            else:
                raise ParseError(f"unexpected {val!r}")
            got = True
            if i < len(toks) and toks[i] == ("op", "*"):
                i += 1
                continue
            if i < len(toks) and toks[i][0] in ("num", "var"):
                continue
            break
        if not got:
            raise ParseError("dangling sign")
        raw.append((sign * coef, powers))
    if any(k < 1 for _, p in raw for k in p):
        raise ParseError("variables are numbered from u1")
    max_idx = max((k for _, p in raw for k in p), default=1)
    d = dim if dim is not None else max_idx
    if max_idx > d:
        raise ParseError(f"variable u{max_idx} exceeds dimension {d}")
    terms = {}
    for c, powers in raw:
        exp = tuple(powers.get(k + 1, 0) for k in range(d))
        terms[exp] = terms.get(exp, 0) + c
    return GroupRingElement(d, terms)


def format_expression(f: LaurentPolynomial) -> str:
    if f.is_zero():
        return "0"

    def mono(m):
        parts = []
        for k, e in enumerate(m, start=1):
            if e == 0:
                continue
            name = "u" if f.dim == 1 else f"u{k}"
            parts.append(name if e == 1 else f"{name}^{e}")
        return "*".join(parts)

    order = sorted(f.terms.items(), key=lambda kv: (sum(abs(e) for e in kv[0]), kv[0]))
    out = []
    for idx, (m, c) in enumerate(order):
        c = Fraction(c)
        sign = "-" if c < 0 else "+"
        a = abs(c)
        body = mono(m)
        if body and a == 1:
            txt = body
        elif body:
            txt = f"{a}*{body}"
        else:
            txt = str(a)
        if idx == 0:
            out.append(("-" if sign == "-" else "") + txt)
        else:
            out.append(f" {sign} {txt}")
    return "".join(out)


def read_poly(source: str, dim: int | None = None) -> GroupRingElement:
    """Load a polynomial from a JSON file path, a JSON string, or an expression."""
    if os.path.exists(source):
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
        stripped = text.strip()
        if stripped.startswith("{"):
            return loads(stripped)
        return parse_expression(stripped, dim)
    if source.strip().startswith("{"):
        return loads(source)
    return parse_expression(source, dim)
