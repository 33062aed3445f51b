"""Encoding an event log into a feature matrix.

An encoding is four stages applied in order:

1. **filter** keeps the events satisfying a :class:`FilterPredicate`;
2. **dimensioning** decides the columns (a :class:`DimensionIndex`);
3. **grouping** collects, per case, the event values that fall in each column;
4. **valuation** reduces every such collection to one real number.

:func:`group_by_case` and :func:`valuate` expose stages 3 and 4 separately.
:func:`apply_encoding` runs all four in one pass without materializing the
grouped table, and must agree with the staged route exactly.

Each matrix row is one case of the filtered log, ordered by case id.  Cases
the filter empties get no row at all.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import ConfigError, ValuationError
from .flow import ConcurrencyRelation, canonicalize
from .log import ABSENT, ACTIVITY, Case, Event, EventLog, Timestamp
from .matrix import START, STATS, DimensionIndex, DimensionLabel, FeatureMatrix
from .predicate import NULL_FILTER, FilterPredicate, apply_filter, parse_predicate

Contribution = tuple[DimensionLabel, Any, Event]


# -- dimensioning rules ------------------------------------------------------


class DimensionRule:
    """Decides the columns of a matrix and which column each event value feeds."""

    kind = ""

    def build(self, log: EventLog, *, other: bool = False) -> DimensionIndex:
        raise NotImplementedError

    def contributions(self, events: Sequence[Event], dims: DimensionIndex) -> Iterator[Contribution]:
        """Yield ``(label, value, source_event)`` for one case's events."""
        raise NotImplementedError


def _activities(events: Sequence[Event]) -> list[Event]:
    return [e for e in events if e.activity is not ABSENT]


@dataclass(frozen=True)
class CategoricalRule(DimensionRule):
    """One column per observed value of each listed attribute.

    ``merges`` maps an attribute to ``{value: merged_value}``; merged values
    share a single column.
    """

    attributes: tuple[str, ...] = (ACTIVITY,)
    merges: Mapping[str, Mapping[Any, Any]] = field(default_factory=dict)
    kind = "categorical"

    def _label(self, attr: str, value: Any) -> DimensionLabel:
        merged = self.merges.get(attr, {}).get(value, value)
        return DimensionLabel.categorical(attr, merged)

    def build(self, log: EventLog, *, other: bool = False) -> DimensionIndex:
        labels = set()
        for e in log.events:
            for a in self.attributes:
                v = e[a]
                if v is not ABSENT:
                    labels.add(self._label(a, v))
        return DimensionIndex(tuple(labels), self, {}, other)

    def contributions(self, events, dims):
        for e in events:
            for a in self.attributes:
                v = e[a]
                if v is not ABSENT:
                    yield self._label(a, v), v, e


def _activity_sequence(events: Sequence[Event], relation: ConcurrencyRelation | None) -> list[tuple[str, Event]]:
    labeled = _activities(events)
    if relation is None or not relation.pairs:
        return [(e.activity, e) for e in labeled]
    # reorder events to follow the canonical trace; equal labels keep their order
    canon = canonicalize([e.activity for e in labeled], relation)
    pools: dict[str, list[Event]] = {}
    for e in labeled:
        pools.setdefault(e.activity, []).append(e)
    return [(a, pools[a].pop(0)) for a in canon]


@dataclass(frozen=True)
class KGramRule(DimensionRule):
    """One column per observed k-gram.

    Each event yields the gram of the ``k`` activities ending at it, with
    ``k - 1`` copies of :data:`START` prepended to the trace.  With a
    concurrency relation the trace is canonicalized first.
    """

    k: int = 2
    relation: ConcurrencyRelation | None = None
    kind = "kgram"

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ConfigError("k must be ≥ 1")

    def _grams(self, events):
        seq = _activity_sequence(events, self.relation)
        padded = [START] * (self.k - 1) + [a for a, _ in seq]
        for i, (_, e) in enumerate(seq):
            yield DimensionLabel.gram(padded[i : i + self.k]), e

    def build(self, log, *, other=False):
        labels = {lab for case in log for lab, _ in self._grams(case.events)}
        return DimensionIndex(tuple(labels), self, {"k": self.k}, other)

    def contributions(self, events, dims):
        for lab, e in self._grams(events):
            yield lab, lab.key, e


def nearest_rank(values: Sequence[int], pct: float) -> int:
    """Nearest-rank percentile: the smallest value with at least ``pct``% of the data at or below it."""
    ordered = sorted(values)
    if not ordered:
        return 0
    rank = max(1, math.ceil(pct / 100 * len(ordered)))
    return ordered[rank - 1]


@dataclass(frozen=True)
class PositionalRule(DimensionRule):
    """Columns ``activity@position`` for every activity and positions ``1..max_positions``.

    Longer traces are truncated.  Without an explicit ``max_positions`` the
    95th-percentile trace length (nearest rank) of the log being dimensioned
    is used.
    """

    max_positions: int | None = None
    relation: ConcurrencyRelation | None = None
    kind = "positional"

    def __post_init__(self) -> None:
        if self.max_positions is not None and self.max_positions < 1:
            raise ConfigError("max_positions must be ≥ 1")

    def build(self, log, *, other=False):
        m = self.max_positions
        if m is None:
            m = max(1, nearest_rank([len(c.labeled_trace) for c in log], 95))
        labels = [DimensionLabel.positional(a, p) for a in log.activity_alphabet for p in range(1, m + 1)]
        return DimensionIndex(tuple(labels), self, {"max_positions": m}, other)

    def contributions(self, events, dims):
        m = dims.params["max_positions"]
        for pos, (a, e) in enumerate(_activity_sequence(events, self.relation), start=1):
            if pos > m:
                break
            yield DimensionLabel.positional(a, pos), a, e


@dataclass(frozen=True)
class NumericStatsRule(DimensionRule):
    """Columns ``attribute.stat`` for every listed attribute and statistic.

    The columns exist whether or not any event carries the attribute.
    """

    attributes: tuple[str, ...] = ()
    stats: tuple[str, ...] = ("avg", "max", "min", "sum")
    kind = "statistic"

    def __post_init__(self) -> None:
        if not self.attributes:
            raise ConfigError("numstats needs at least one attribute")
        bad = [s for s in self.stats if s not in STATS]
        if bad or not self.stats:
            raise ConfigError(f"unknown statistic(s) {bad}; choose from {STATS}")

    def build(self, log, *, other=False):
        labels = [DimensionLabel.statistic(a, s) for a in self.attributes for s in self.stats]
        return DimensionIndex(tuple(labels), self, {}, other)

    def contributions(self, events, dims):
        for e in events:
            for a in self.attributes:
                v = e[a]
                if v is not ABSENT:
                    for s in self.stats:
                        yield DimensionLabel.statistic(a, s), v, e


# -- valuation ---------------------------------------------------------------

VALUATIONS = ("presence", "count", "avg", "max", "min", "sum", "positional-indicator", "statistic")
_NUMERIC = {"avg", "max", "min", "sum"}


@dataclass(frozen=True)
class Valuation:
    """How a cell's collected values become one number.

    ``statistic`` applies, per column, the statistic named in the column's
    label (``cost.avg`` -> average).  Empty cells become ``empty_cell_value``.
    """

    kind: str = "count"
    empty_cell_value: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in VALUATIONS:
            raise ConfigError(f"unknown valuation {self.kind!r}; choose from {VALUATIONS}")

    def check(self, dims: DimensionIndex) -> None:
        kinds = {lab.kind for lab in dims}
        if self.kind in _NUMERIC | {"statistic"}:
            bad = kinds - {"statistic", "other"}
        elif self.kind == "positional-indicator":
            bad = kinds - {"positional", "other"}
        else:
            bad = set()
        if bad:
            raise ConfigError(f"valuation {self.kind!r} does not apply to {sorted(bad)} dimensions")

    def stat_for(self, label: DimensionLabel) -> str:
        """The reduction used for one column."""
        if self.kind == "statistic":
            return label.key[1] if label.kind == "statistic" else "count"
        if self.kind == "positional-indicator":
            return "presence"
        return self.kind


def _as_number(v: Any, label: DimensionLabel) -> float:
    if isinstance(v, (int, float)) and not isinstance(v, str):
        return float(int(v)) if isinstance(v, Timestamp) else float(v)
    raise ValuationError(f"column {label}: cannot take a numeric statistic of {v!r}")


def _reduce(stat: str, values: Sequence[Any], label: DimensionLabel, empty: float) -> float:
    if not values:
        return empty
    if stat == "count":
        return float(len(values))
    if stat == "presence":
        return 1.0
    nums = [_as_number(v, label) for v in values]
    if stat == "max":
        return max(nums)
    if stat == "min":
        return min(nums)
    total = 0.0
    for x in nums:
        total += x
    return total if stat == "sum" else total / len(nums)


# -- the encoding spec -------------------------------------------------------


@dataclass(frozen=True)
class EncodingSpec:
    name: str
    filter: FilterPredicate
    dimensioning: DimensionRule
    valuation: Valuation

    grouping = "case"

    def describe(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "filter": str(self.filter),
            "dimensioning": repr(self.dimensioning),
            "grouping": self.grouping,
            "valuation": self.valuation.kind,
            "empty_cell_value": self.valuation.empty_cell_value,
        }


@dataclass
class GroupedTable:
    """Per case, per column, the values routed there (in event order).

    ``sources`` records which events fed each row.
    """

    dims: DimensionIndex
    rows: dict[str, dict[DimensionLabel, list[Any]]]
    sources: dict[str, list[Event]] = field(default_factory=dict)

    def cell(self, case_id: str, label: DimensionLabel) -> list[Any]:
        return self.rows[case_id].get(label, [])


def build_dimensions(log: EventLog, spec: EncodingSpec, *, other: bool = False) -> DimensionIndex:
    return spec.dimensioning.build(log, other=other)


def _sorted_cases(log: EventLog) -> list[Case]:
    return sorted(log, key=lambda c: c.case_id)


def group_by_case(log: EventLog, dims: DimensionIndex) -> GroupedTable:
    rule = dims.rule
    rows: dict[str, dict[DimensionLabel, list[Any]]] = {}
    sources: dict[str, list[Event]] = {}
    for case in _sorted_cases(log):
        cells: dict[DimensionLabel, list[Any]] = {}
        fed: list[Event] = []
        for label, value, event in rule.contributions(case.events, dims):
            j = dims.position(label)
            if j is None:
                continue
            cells.setdefault(dims[j], []).append(value)
            fed.append(event)
        rows[case.case_id] = cells
        sources[case.case_id] = fed
    return GroupedTable(dims, rows, sources)


def valuate(table: GroupedTable, v: Valuation) -> FeatureMatrix:
    dims = table.dims
    v.check(dims)
    stats = [v.stat_for(lab) for lab in dims]
    ids = list(table.rows)
    values = np.empty((len(ids), len(dims)), dtype=np.float64)
    for i, cid in enumerate(ids):
        row = table.rows[cid]
        for j, lab in enumerate(dims):
            values[i, j] = _reduce(stats[j], row.get(lab, ()), lab, v.empty_cell_value)
    return FeatureMatrix(tuple(ids), dims, values)


def encode_staged(log: EventLog, spec: EncodingSpec, dims: DimensionIndex | None = None, *, other: bool = False) -> FeatureMatrix:
    """The four stages one after another, each materializing its output."""
    filtered = apply_filter(log, spec.filter)
    if dims is None:
        dims = build_dimensions(filtered, spec, other=other)
    return valuate(group_by_case(filtered, dims), spec.valuation)


def apply_encoding(
    log: EventLog,
    spec: EncodingSpec,
    dims: DimensionIndex | None = None,
    *,
    other: bool = False,
) -> FeatureMatrix:
    """Encode ``log`` with ``spec``.

    Pass ``dims`` (e.g. from a training log) to reuse a frozen column set;
    ``other=True`` then collects values without a column in an ``OTHER``
    column instead of dropping them.
    """
    spec.filter.check_types(log)
    kept: list[Case] = []
    for case in _sorted_cases(log):
        events = tuple(e for e in case.events if spec.filter(e)) if spec.filter.terms else case.events
        if events:
            kept.append(case if len(events) == len(case.events) else Case(case.case_id, events))
    if dims is None:
        dims = spec.dimensioning.build(EventLog(kept), other=other)
    elif other and not dims.other:
        dims = dims.with_other()
    v = spec.valuation
    v.check(dims)
    stats = [v.stat_for(lab) for lab in dims]
    n, d = len(kept), len(dims)
    count = np.zeros((n, d), dtype=np.int64)
    acc = np.zeros((n, d), dtype=np.float64)
    rule = dims.rule
    for i, case in enumerate(kept):
        for label, value, _ in rule.contributions(case.events, dims):
            j = dims.position(label)
            if j is None:
                continue
            count[i, j] += 1
            stat = stats[j]
            if stat in ("count", "presence"):
                continue
            x = _as_number(value, dims[j])
            if count[i, j] == 1:
                acc[i, j] = x
            elif stat == "max":
                acc[i, j] = max(acc[i, j], x)
            elif stat == "min":
                acc[i, j] = min(acc[i, j], x)
            else:
                acc[i, j] += x
    out = np.full((n, d), float(v.empty_cell_value))
    for j, stat in enumerate(stats):
        filled = count[:, j] > 0
        if stat == "count":
            out[filled, j] = count[filled, j]
        elif stat == "presence":
            out[filled, j] = 1.0
        elif stat == "avg":
            out[filled, j] = acc[filled, j] / count[filled, j]
        else:
            out[filled, j] = acc[filled, j]
    return FeatureMatrix(tuple(c.case_id for c in kept), dims, out)


# -- built-in encoders -------------------------------------------------------

ACTIVITY_PRESENT = FilterPredicate.where(ACTIVITY, "present")


def one_hot(attributes: Iterable[str] = (ACTIVITY,)) -> EncodingSpec:
    """Presence (0/1) of every observed value of the given attributes."""
    return EncodingSpec("one-hot", NULL_FILTER, CategoricalRule(tuple(attributes)), Valuation("presence"))


def activity_profile() -> EncodingSpec:
    """Per-case count of each activity."""
    return EncodingSpec("activity-profile", ACTIVITY_PRESENT, CategoricalRule((ACTIVITY,)), Valuation("count"))


def kgram(k: int = 2, relation: ConcurrencyRelation | None = None) -> EncodingSpec:
    return EncodingSpec(f"kgram:k={k}", ACTIVITY_PRESENT, KGramRule(k, relation), Valuation("count"))


def positional(max_positions: int | None = None, relation: ConcurrencyRelation | None = None) -> EncodingSpec:
    name = "positional" if max_positions is None else f"positional:max={max_positions}"
    return EncodingSpec(name, ACTIVITY_PRESENT, PositionalRule(max_positions, relation), Valuation("positional-indicator"))


def numstats(attributes: Iterable[str], stats: Iterable[str] = ("avg", "max", "min", "sum")) -> EncodingSpec:
    attributes, stats = tuple(attributes), tuple(stats)
    name = f"numstats:attrs={';'.join(attributes)};stats={','.join(stats)}"
    return EncodingSpec(name, NULL_FILTER, NumericStatsRule(attributes, stats), Valuation("statistic"))


def builtin_specs() -> dict[str, Callable[..., EncodingSpec]]:
    """Factories for the built-in encoders, keyed by name."""
    return {
        "one-hot": one_hot,
        "activity-profile": activity_profile,
        "kgram": kgram,
        "positional": positional,
        "numstats": numstats,
    }


def _int_param(params: Mapping[str, list[str]], key: str, name: str) -> int | None:
    if key not in params:
        return None
    raw = ";".join(params[key])
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{name}: {key} must be an integer, got {raw!r}") from None


def parse_encoder(text: str, relation: ConcurrencyRelation | None = None) -> EncodingSpec:
    """Build a spec from ``name[:key=value;...]``.

    Examples: ``one-hot``, ``activity-profile``, ``kgram:k=3``,
    ``positional:max=10``, ``numstats:attrs=cost;amount;stats=avg,sum``.
    A parameter value may itself contain ``;`` (as in ``attrs`` above): a
    piece without ``=`` extends the previous parameter.
    """
    name, _, rest = text.strip().partition(":")
    params: dict[str, list[str]] = {}
    last = None
    for piece in filter(None, (p.strip() for p in rest.split(";"))):
        if "=" in piece:
            key, _, val = piece.partition("=")
            last = key.strip()
            params[last] = [val.strip()] if val.strip() else []
        elif last is None:
            raise ConfigError(f"encoder {name!r}: parameter {piece!r} lacks a key")
        else:
            params[last].append(piece)
    allowed = {
        "one-hot": {"attrs"},
        "activity-profile": set(),
        "kgram": {"k"},
        "positional": {"max"},
        "numstats": {"attrs", "stats"},
    }
    if name not in allowed:
        raise ConfigError(f"unknown encoder {name!r}; choose from {sorted(allowed)}")
    unknown = set(params) - allowed[name]
    if unknown:
        raise ConfigError(f"encoder {name!r}: unknown parameter(s) {sorted(unknown)}")
    if name == "one-hot":
        return one_hot(params.get("attrs") or (ACTIVITY,))
    if name == "activity-profile":
        return activity_profile()
    if name == "kgram":
        k = _int_param(params, "k", name)
        if k is None:
            raise ConfigError("kgram needs k, e.g. kgram:k=2")
        if k < 1:
            raise ConfigError("k must be ≥ 1")
        return kgram(k, relation)
    if name == "positional":
        m = _int_param(params, "max", name)
        if m is not None and m < 1:
            raise ConfigError("max must be ≥ 1")
        return positional(m, relation)
    attrs = params.get("attrs", [])
    stats = [s.strip() for s in ",".join(params.get("stats", [])).split(",") if s.strip()] or ["avg", "max", "min", "sum"]
    return numstats(attrs, stats)


def encode_text(log: EventLog, encoder: str, predicate: str = "") -> FeatureMatrix:
    """Shorthand: parse ``encoder`` and an extra filter, then encode."""
    spec = parse_encoder(encoder)
    extra = parse_predicate(predicate)
    if extra.terms:
        spec = EncodingSpec(spec.name, spec.filter & extra, spec.dimensioning, spec.valuation)
    return apply_encoding(log, spec)
