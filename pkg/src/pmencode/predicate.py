"""Event filters: a conjunction of attribute tests, and a small text syntax for them.

Grammar::

    predicate := term { "and" term }
    term      := name op literal
               | name "!=" "null" | name "==" "null"
               | name "in" "[" literal "," literal "]"
    op        := "==" | "!=" | "<" | "<=" | ">" | ">="

Literals are quoted text (``'x'`` or ``"x"``), decimal numbers, or ISO dates
(``2020-01-31`` or ``2020-01-31T08:00:00Z``).  An unquoted word that is none
of these is taken as text, so ``activity == a`` works.

A date without a time of day stands for the whole day, so
``timestamp in [2020-01-01, 2020-12-31]`` keeps events from the first
millisecond of January 1 up to the last millisecond of December 31 (UTC).

A comparison against an attribute the event does not carry is false for
every operator except ``== null``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Any

from .errors import PredicateError
from .ingest import parse_iso8601
from .log import ABSENT, Case, Event, EventLog, Timestamp, value_kind

OPERATORS = ("eq", "neq", "lt", "leq", "gt", "geq", "present", "absent", "in-range")
ORDERED = {"lt", "leq", "gt", "geq", "in-range"}
_SYMBOLS = {"==": "eq", "!=": "neq", "<": "lt", "<=": "leq", ">": "gt", ">=": "geq"}
_DAY_MS = 86_400_000


@dataclass(frozen=True)
class Literal:
    """A constant in a predicate.

    ``kind`` is ``text``, ``number`` or ``date``.  Dates carry the half-open
    interval ``[value, end)`` they cover: one millisecond for a full
    date-time, a whole day for a bare date.
    """

    value: Any
    kind: str
    text: str = ""
    end: Any = None
    position: int | None = None

    @classmethod
    def of(cls, value: Any) -> Literal:
        if isinstance(value, Literal):
            return value
        if isinstance(value, Timestamp):
            return cls(value, "date", str(value), value + 1)
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return cls(value, "number", repr(value))
        if isinstance(value, str):
            return cls(value, "text", value)
        raise PredicateError(f"unsupported literal {value!r}")


@dataclass(frozen=True)
class Term:
    attribute: str
    op: str
    literals: tuple[Literal, ...] = ()

    def __post_init__(self) -> None:
        if self.op not in OPERATORS:
            raise PredicateError(f"unknown operator {self.op!r}")
        want = {"present": 0, "absent": 0, "in-range": 2}.get(self.op, 1)
        lits = tuple(Literal.of(x) for x in self.literals)
        if len(lits) != want:
            raise PredicateError(f"operator {self.op!r} takes {want} literal(s), got {len(lits)}")
        object.__setattr__(self, "literals", lits)
        if self.op in ORDERED:
            for lit in lits:
                if lit.kind == "text":
                    raise PredicateError(
                        f"type error: {self.op!r} on {self.attribute!r} needs a number or date, got {lit.text!r}",
                        lit.position,
                    )

    def __call__(self, event: Event) -> bool:
        v = event.attributes.get(self.attribute, ABSENT)
        if self.op == "present":
            return v is not ABSENT
        if self.op == "absent":
            return v is ABSENT
        if v is ABSENT:
            return False
        if self.op in ("eq", "neq"):
            return _equals(v, self.literals[0]) == (self.op == "eq")
        if not all(_comparable(v, lit) for lit in self.literals):
            return False
        x = int(v) if isinstance(v, Timestamp) else v
        if self.op == "in-range":
            lo, hi = self.literals
            return _at_least(x, lo) and _at_most(x, hi)
        lit = self.literals[0]
        if self.op == "lt":
            return not _at_least(x, lit)
        if self.op == "leq":
            return _at_most(x, lit)
        if self.op == "gt":
            return not _at_most(x, lit)
        return _at_least(x, lit)

    def __str__(self) -> str:
        if self.op == "present":
            return f"{self.attribute} != null"
        if self.op == "absent":
            return f"{self.attribute} == null"
        if self.op == "in-range":
            return f"{self.attribute} in [{self.literals[0].text}, {self.literals[1].text}]"
        sym = {v: k for k, v in _SYMBOLS.items()}[self.op]
        return f"{self.attribute} {sym} {self.literals[0].text}"


def _at_least(x: Any, lit: Literal) -> bool:
    return x >= (int(lit.value) if lit.kind == "date" else lit.value)


def _at_most(x: Any, lit: Literal) -> bool:
    # a date covers [value, end)
    if lit.kind == "date":
        return x < int(lit.end)
    return x <= lit.value


def _comparable(v: Any, lit: Literal) -> bool:
    kind = value_kind(v)
    if lit.kind == "date":
        return kind == "timestamp"
    if lit.kind == "number":
        return kind in ("integer", "real")
    return False


def _equals(v: Any, lit: Literal) -> bool:
    kind = value_kind(v)
    if lit.kind == "date":
        return kind == "timestamp" and int(lit.value) <= int(v) < int(lit.end)
    if lit.kind == "number":
        if kind in ("integer", "real"):
            return v == lit.value
        return kind == "text" and v == lit.text
    return kind == "text" and v == lit.value


@dataclass(frozen=True)
class FilterPredicate:
    """Conjunction of :class:`Term` objects; no terms means keep everything."""

    terms: tuple[Term, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "terms", tuple(self.terms))

    def __call__(self, event: Event) -> bool:
        return all(t(event) for t in self.terms)

    def __str__(self) -> str:
        return " and ".join(map(str, self.terms))

    def __and__(self, other: FilterPredicate) -> FilterPredicate:
        return FilterPredicate(self.terms + other.terms)

    @classmethod
    def where(cls, attribute: str, op: str, *literals: Any) -> FilterPredicate:
        return cls((Term(attribute, op, literals),))

    def check_types(self, log: EventLog) -> None:
        """Reject ordering tests on attributes whose observed values are not numbers or timestamps."""
        ordered = {t.attribute for t in self.terms if t.op in ORDERED}
        if not ordered:
            return
        seen: dict[str, set[str]] = {a: set() for a in ordered}
        for e in log.events:
            for a in ordered:
                v = e.attributes.get(a, ABSENT)
                if v is not ABSENT:
                    seen[a].add(value_kind(v))
        for t in self.terms:
            if t.op not in ORDERED:
                continue
            kinds = seen[t.attribute]
            for lit in t.literals:
                ok = {"timestamp"} if lit.kind == "date" else {"integer", "real"}
                bad = kinds - ok
                if bad:
                    raise PredicateError(
                        f"type error in term '{t}': attribute {t.attribute!r} holds {sorted(bad)} values",
                        lit.position,
                    )


NULL_FILTER = FilterPredicate()


def apply_filter(log: EventLog, predicate: FilterPredicate) -> EventLog:
    """Keep the events satisfying every term; cases left empty are dropped."""
    if not predicate.terms:
        return log
    predicate.check_types(log)
    cases = []
    for case in log:
        kept = tuple(e for e in case.events if predicate(e))
        if kept:
            cases.append(case if len(kept) == len(case.events) else Case(case.case_id, kept))
    return EventLog(cases)


# -- parsing -----------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<string>'(?:[^'\\]|\\.)*'|"(?:[^"\\]|\\.)*")
  | (?P<date>\d{4}-\d{2}-\d{2}(?:[T ]\d{2}:\d{2}(?::\d{2}(?:\.\d+)?)?(?:Z|[+-]\d{2}:?\d{2})?)?)(?![\w.])
  | (?P<number>[+-]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)(?![\w.])
  | (?P<op>==|!=|<=|>=|<|>)
  | (?P<punct>[\[\],])
  | (?P<word>[^\s\[\],=!<>'"]+)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    i = 0
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if not m:
            raise PredicateError(f"syntax error: unexpected character {text[i]!r}", i)
        kind = m.lastgroup
        if kind != "ws":
            toks.append(_Tok(kind, m.group(), i))
        i = m.end()
    return toks


def _literal(tok: _Tok) -> Literal:
    if tok.kind == "string":
        body = re.sub(r"\\(.)", r"\1", tok.text[1:-1])
        return Literal(body, "text", body, position=tok.pos)
    if tok.kind == "date":
        ts = parse_iso8601(tok.text)
        span = _DAY_MS if len(tok.text) == 10 else 1
        return Literal(ts, "date", tok.text, Timestamp(ts + span), tok.pos)
    if tok.kind == "number":
        num = float(tok.text)
        if re.fullmatch(r"[+-]?\d+", tok.text):
            num = int(tok.text)
        return Literal(num, "number", tok.text, position=tok.pos)
    if tok.kind == "word":
        return Literal(tok.text, "text", tok.text, position=tok.pos)
    raise PredicateError(f"syntax error: expected a literal, found {tok.text!r}", tok.pos)


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self) -> _Tok | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, what: str) -> _Tok:
        tok = self.peek()
        if tok is None:
            raise PredicateError(f"syntax error: expected {what}, found end of input", len(self.text))
        self.i += 1
        return tok

    def expect(self, text: str) -> None:
        tok = self.take(repr(text))
        if tok.text != text:
            raise PredicateError(f"syntax error: expected {text!r}, found {tok.text!r}", tok.pos)

    def predicate(self) -> FilterPredicate:
        terms = [self.term()]
        while self.peek() is not None:
            tok = self.take("'and'")
            if tok.kind != "word" or tok.text.lower() != "and":
                raise PredicateError(f"syntax error: expected 'and', found {tok.text!r}", tok.pos)
            terms.append(self.term())
        return FilterPredicate(tuple(terms))

    def term(self) -> Term:
        name = self.take("an attribute name")
        if name.kind != "word":
            raise PredicateError(f"syntax error: expected an attribute name, found {name.text!r}", name.pos)
        op = self.take("an operator")
        if op.kind == "word" and op.text.lower() == "in":
            self.expect("[")
            lo = _literal(self.take("a literal"))
            self.expect(",")
            hi = _literal(self.take("a literal"))
            self.expect("]")
            return Term(name.text, "in-range", (lo, hi))
        if op.kind != "op":
            raise PredicateError(f"unknown operator {op.text!r}", op.pos)
        lit_tok = self.take("a literal")
        if lit_tok.kind == "word" and lit_tok.text == "null":
            if op.text == "!=":
                return Term(name.text, "present")
            if op.text == "==":
                return Term(name.text, "absent")
            raise PredicateError(f"type error: {op.text!r} cannot compare with null", lit_tok.pos)
        return Term(name.text, _SYMBOLS[op.text], (_literal(lit_tok),))


def parse_predicate(text: str) -> FilterPredicate:
    """Parse the filter syntax described in the module docstring.

    Raises :class:`~pmencode.errors.PredicateError` carrying the character
    offset of the problem.
    """
    if not text.strip():
        return NULL_FILTER
    return _Parser(text).predicate()

