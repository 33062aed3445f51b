"""Control-flow relations between activities.

The directly-follows counts ``|a>b|`` feed the Heuristic Miner dependency
measure::

    dep(a, b) = (|a>b| - |b>a|) / (|a>b| + |b>a| + 1)      a != b
    dep(a, a) = |a>a| / (|a>a| + 1)

Two activities seen in both orders whose dependency is close to zero are
treated as concurrent.  :func:`canonicalize` then rewrites traces so that
orderings differing only by swaps of concurrent neighbours coincide.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError, DataError
from .log import EventLog
from .matrix import DimensionLabel


@dataclass(frozen=True, eq=False)
class DirectlyFollows:
    alphabet: tuple[str, ...]
    counts: np.ndarray

    def __post_init__(self) -> None:
        counts = np.asarray(self.counts, dtype=np.int64).reshape(len(self.alphabet), len(self.alphabet))
        counts.setflags(write=False)
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "_index", {a: i for i, a in enumerate(self.alphabet)})

    def __getitem__(self, pair: tuple[str, str]) -> int:
        a, b = pair
        ia, ib = self._index.get(a), self._index.get(b)
        if ia is None or ib is None:
            return 0
        return int(self.counts[ia, ib])

    def nonzero(self) -> dict[tuple[str, str], int]:
        """Nonzero entries keyed by ``(a, b)``, in alphabet order."""
        return {
            (self.alphabet[i], self.alphabet[j]): int(self.counts[i, j])
            for i, j in zip(*np.nonzero(self.counts))
        }

    def to_csv(self) -> str:
        return _square_csv(self.alphabet, self.counts, str)

    def to_dot(self, name: str = "dfg") -> str:
        """Graphviz text with one edge per nonzero count."""
        lines = [f"digraph {name} {{"]
        for a in self.alphabet:
            lines.append(f"  {_dot_id(a)};")
        for (a, b), n in self.nonzero().items():
            lines.append(f'  {_dot_id(a)} -> {_dot_id(b)} [label="{n}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def _dot_id(s: str) -> str:
    return '"' + str(s).replace("\\", "\\\\").replace('"', '\\"') + '"'


def _square_csv(alphabet: Sequence[str], m: np.ndarray, fmt) -> str:
    buf = io.StringIO(newline="")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([""] + list(alphabet))
    for a, row in zip(alphabet, m):
        w.writerow([a] + [fmt(x) for x in row])
    return buf.getvalue()


def directly_follows_from_traces(traces: Iterable[Sequence[str]], alphabet: Sequence[str] | None = None) -> DirectlyFollows:
    traces = [tuple(t) for t in traces]
    if alphabet is None:
        alphabet = sorted({a for t in traces for a in t})
    index = {a: i for i, a in enumerate(alphabet)}
    counts = np.zeros((len(alphabet), len(alphabet)), dtype=np.int64)
    for t in traces:
        for a, b in zip(t, t[1:]):
            counts[index[a], index[b]] += 1
    return DirectlyFollows(tuple(alphabet), counts)


def directly_follows(log: EventLog) -> DirectlyFollows:
    """Count ``|a>b|``: how often ``a`` is immediately followed by ``b`` inside a case.

    Events without an activity are skipped, so their neighbours become adjacent.
    """
    return directly_follows_from_traces((c.labeled_trace for c in log), sorted(log.activity_alphabet))


@dataclass(frozen=True, eq=False)
class DependencyMatrix:
    alphabet: tuple[str, ...]
    values: np.ndarray

    def __getitem__(self, pair: tuple[str, str]) -> float:
        a, b = pair
        return float(self.values[self.alphabet.index(a), self.alphabet.index(b)])

    def to_csv(self) -> str:
        return _square_csv(self.alphabet, self.values, lambda x: repr(float(x)))


def dependency_matrix(df: DirectlyFollows) -> DependencyMatrix:
    c = df.counts.astype(np.float64)
    ct = c.T
    values = (c - ct) / (c + ct + 1.0)
    diag = np.diag(c)
    np.fill_diagonal(values, diag / (diag + 1.0))
    values.setflags(write=False)
    return DependencyMatrix(df.alphabet, values)


@dataclass(frozen=True)
class ConcurrencyRelation:
    """Unordered activity pairs declared concurrent."""

    pairs: frozenset[frozenset[str]] = frozenset()

    def __post_init__(self) -> None:
        pairs = frozenset(frozenset(p) for p in self.pairs)
        if any(len(p) != 2 for p in pairs):
            raise ValueError("concurrency pairs must hold two distinct activities")
        object.__setattr__(self, "pairs", pairs)

    @classmethod
    def of(cls, *pairs: tuple[str, str]) -> ConcurrencyRelation:
        return cls(frozenset(frozenset(p) for p in pairs))

    def __contains__(self, pair: object) -> bool:
        try:
            return frozenset(pair) in self.pairs  # type: ignore[arg-type]
        except TypeError:
            return False

    def __len__(self) -> int:
        return len(self.pairs)

    def concurrent(self, a: str, b: str) -> bool:
        return a != b and frozenset((a, b)) in self.pairs

    def partners(self, a: str) -> set[str]:
        return {x for p in self.pairs if a in p for x in p if x != a}

    def sorted_pairs(self) -> list[tuple[str, str]]:
        return sorted(tuple(sorted(p)) for p in self.pairs)

    def to_text(self) -> str:
        return "".join(f"{a}\t{b}\n" for a, b in self.sorted_pairs())


def concurrency_pairs(df: DirectlyFollows, threshold: float = 0.3) -> ConcurrencyRelation:
    """Pairs seen in both orders with ``|dep(a, b)| < threshold``."""
    if not 0.0 <= threshold < 1.0:
        raise ConfigError(f"threshold must lie in [0, 1), got {threshold}")
    dep = dependency_matrix(df).values
    c = df.counts
    pairs = set()
    n = len(df.alphabet)
    for i in range(n):
        for j in range(i + 1, n):
            if c[i, j] > 0 and c[j, i] > 0 and abs(dep[i, j]) < threshold:
                pairs.add(frozenset((df.alphabet[i], df.alphabet[j])))
    return ConcurrencyRelation(frozenset(pairs))


def canonicalize(trace: Sequence[str], rel: ConcurrencyRelation) -> tuple[str, ...]:
    """Lexicographically smallest trace reachable by swapping concurrent neighbours.

    The result has no adjacent concurrent pair out of order, so it is a fixed
    point of bubble-sorting with concurrent swaps only.  Plain bubble sort is
    not enough when the relation is not transitive: with {a,b} and {b,c}
    concurrent, ``c a b`` and ``b c a`` are equivalent and both already sorted
    locally.  Picking the smallest movable activity first gives one
    representative per equivalence class.
    """
    rest = list(trace)
    if not rel.pairs:
        return tuple(rest)
    out = []
    while rest:
        best = 0
        for i in range(1, len(rest)):
            # rest[i] can move to the front only past activities concurrent with it
            movable = all(rel.concurrent(rest[j], rest[i]) for j in range(i))
            if movable and str(rest[i]) < str(rest[best]):
                best = i
        out.append(rest.pop(best))
    return tuple(out)


@dataclass(frozen=True)
class FlowFeatures:
    """Per-activity parallelism degree and optionality.

    :meth:`columns` turns them into case-level columns: a case gets an
    activity's values when the activity occurs in it, ``default`` otherwise.
    """

    parallelism: dict[str, float]
    optionality: dict[str, float]
    occurs_in: dict[str, frozenset[str]]

    def labels(self) -> list[DimensionLabel]:
        out = []
        for a in sorted(self.parallelism):
            out.append(DimensionLabel.flow(a, "optionality"))
            out.append(DimensionLabel.flow(a, "parallelism"))
        return out

    def columns(self) -> dict[DimensionLabel, dict[str, float]]:
        cols = {}
        for a in sorted(self.parallelism):
            cases = self.occurs_in[a]
            cols[DimensionLabel.flow(a, "parallelism")] = {c: self.parallelism[a] for c in cases}
            cols[DimensionLabel.flow(a, "optionality")] = {c: self.optionality[a] for c in cases}
        return cols


def parallelism_features(log: EventLog, rel: ConcurrencyRelation) -> FlowFeatures:
    """parallelism(a) = concurrent partners / (|A| - 1); optionality(a) = share of cases lacking a."""
    alphabet = log.activity_alphabet
    if len(alphabet) < 2:
        raise DataError("parallelism needs at least two activities")
    total = len(log)
    occurs: dict[str, set[str]] = {a: set() for a in alphabet}
    for case in log:
        for a in set(case.labeled_trace):
            occurs[a].add(case.case_id)
    par = {a: len(rel.partners(a) & set(alphabet)) / (len(alphabet) - 1) for a in alphabet}
    opt = {a: 1.0 - len(occurs[a]) / total for a in alphabet}
    return FlowFeatures(par, opt, {a: frozenset(s) for a, s in occurs.items()})
