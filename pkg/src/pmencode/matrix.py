"""Dimension labels, dimension indexes and the feature matrix they label."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator, Mapping, Sequence

import numpy as np

START = "▷"
"""Padding symbol placed before a trace when forming k-grams."""

KINDS = ("categorical", "kgram", "positional", "statistic", "flow", "other")
STATS = ("avg", "max", "min", "sum", "count")


def _value_key(v: Any) -> tuple:
    if isinstance(v, (int, float)):
        return (0, float(v), "")
    return (1, 0.0, str(v))


@dataclass(frozen=True)
class DimensionLabel:
    """One column of a feature matrix.

    ``key`` depends on ``kind``:

    - categorical: ``(attribute, value)``
    - kgram: tuple of activities, possibly starting with :data:`START`
    - positional: ``(activity, position)`` with 1-based position
    - statistic: ``(attribute, stat)``
    - flow: ``(activity, measure)``
    - other: ``()``
    """

    kind: str
    key: tuple

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown dimension kind {self.kind!r}")

    @classmethod
    def categorical(cls, attribute: str, value: Any) -> DimensionLabel:
        return cls("categorical", (attribute, value))

    @classmethod
    def gram(cls, activities: Sequence[str]) -> DimensionLabel:
        return cls("kgram", tuple(activities))

    @classmethod
    def positional(cls, activity: str, position: int) -> DimensionLabel:
        return cls("positional", (activity, int(position)))

    @classmethod
    def statistic(cls, attribute: str, stat: str) -> DimensionLabel:
        if stat not in STATS:
            raise ValueError(f"unknown statistic {stat!r}")
        return cls("statistic", (attribute, stat))

    @classmethod
    def flow(cls, activity: str, measure: str) -> DimensionLabel:
        return cls("flow", (activity, measure))

    @property
    def value(self) -> Any:
        """The categorical value, gram, or activity this column stands for."""
        if self.kind == "categorical":
            return self.key[1]
        if self.kind == "kgram":
            return self.key
        return self.key[0] if self.key else None

    def sort_key(self) -> tuple:
        k = self.key
        if self.kind == "categorical":
            inner: tuple = (str(k[0]), _value_key(k[1]))
        elif self.kind == "kgram":
            inner = tuple("" if a == START else str(a) for a in k)
        elif self.kind == "positional":
            inner = (str(k[0]), k[1])
        elif self.kind in ("statistic", "flow"):
            inner = (str(k[0]), str(k[1]))
        else:
            inner = ()
        return (KINDS.index(self.kind), inner)

    def __str__(self) -> str:
        k = self.key
        if self.kind == "categorical":
            return f"{k[0]}={k[1]}"
        if self.kind == "kgram":
            return ">".join("^" if a == START else str(a) for a in k)
        if self.kind == "positional":
            return f"{k[0]}@{k[1]}"
        if self.kind in ("statistic", "flow"):
            return f"{k[0]}.{k[1]}"
        return "OTHER"


OTHER = DimensionLabel("other", ())


@dataclass(frozen=True)
class DimensionIndex:
    """Ordered, duplicate-free set of dimension labels.

    ``rule`` is the dimensioning rule that produced the index; grouping uses it
    to route event values into columns.  ``params`` holds values the rule fixed
    while building (e.g. the positional cut-off).  When ``other`` is set,
    values with no matching column land in a trailing :data:`OTHER` column.
    """

    labels: tuple[DimensionLabel, ...]
    rule: Any = None
    params: Mapping[str, Any] = field(default_factory=dict)
    other: bool = False
    _pos: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        labels = tuple(sorted(set(self.labels), key=DimensionLabel.sort_key))
        if len(labels) != len(self.labels):
            raise ValueError("dimension labels must be unique")
        if self.other and OTHER not in labels:
            labels = labels + (OTHER,)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "_pos", {lab: i for i, lab in enumerate(labels)})

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self) -> Iterator[DimensionLabel]:
        return iter(self.labels)

    def __getitem__(self, i: int) -> DimensionLabel:
        return self.labels[i]

    def __contains__(self, label: object) -> bool:
        return label in self._pos

    def position(self, label: DimensionLabel) -> int | None:
        """Column of ``label``; falls back to OTHER when enabled, else ``None``."""
        j = self._pos.get(label)
        if j is None and self.other:
            return self._pos[OTHER]
        return j

    def names(self) -> list[str]:
        return [str(lab) for lab in self.labels]

    def with_other(self, enabled: bool = True) -> DimensionIndex:
        labels = tuple(lab for lab in self.labels if lab != OTHER)
        return DimensionIndex(labels, self.rule, self.params, enabled)


def format_number(x: float) -> str:
    """Shortest text that reads back to the same double; integral values drop the ``.0``."""
    x = float(x)
    if math.isfinite(x) and x.is_integer() and abs(x) < 2**53:
        return str(int(x))
    return repr(x)


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    row_labels: tuple[str, ...]
    col_labels: DimensionIndex
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            values = values.reshape(len(self.row_labels), len(self.col_labels))
        object.__setattr__(self, "row_labels", tuple(self.row_labels))
        object.__setattr__(self, "values", values)
        if values.shape != (len(self.row_labels), len(self.col_labels)):
            raise ValueError(
                f"values have shape {values.shape}, labels imply {(len(self.row_labels), len(self.col_labels))}"
            )
        if len(set(self.row_labels)) != len(self.row_labels):
            raise ValueError("row labels must be unique")
        values.setflags(write=False)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def row(self, case_id: str) -> np.ndarray:
        return self.values[self.row_labels.index(case_id)]

    def column(self, label: DimensionLabel | str) -> np.ndarray:
        names = self.col_labels.names()
        j = names.index(label) if isinstance(label, str) else self.col_labels.labels.index(label)
        return self.values[:, j]

    def as_dict(self) -> dict[str, dict[str, float]]:
        names = self.col_labels.names()
        return {r: dict(zip(names, map(float, row))) for r, row in zip(self.row_labels, self.values)}

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FeatureMatrix):
            return NotImplemented
        return (
            self.row_labels == other.row_labels
            and self.col_labels.labels == other.col_labels.labels
            and np.array_equal(self.values, other.values)
        )

    def join(self, columns: Mapping[DimensionLabel, Mapping[str, float]], default: float = 0.0) -> FeatureMatrix:
        """Append columns given as ``label -> {case_id: value}``; missing rows get ``default``."""
        extra = sorted(columns, key=DimensionLabel.sort_key)
        clash = [lab for lab in extra if lab in self.col_labels]
        if clash:
            raise ValueError(f"columns already present: {[str(c) for c in clash]}")
        block = np.array(
            [[float(columns[lab].get(r, default)) for lab in extra] for r in self.row_labels], dtype=np.float64
        ).reshape(self.n, len(extra))
        dims = DimensionIndex(self.col_labels.labels + tuple(extra), self.col_labels.rule, self.col_labels.params)
        order = [list(self.col_labels.labels + tuple(extra)).index(lab) for lab in dims.labels]
        values = np.hstack([self.values, block])[:, order]
        return FeatureMatrix(self.row_labels, dims, values)

    def to_csv(self) -> str:
        buf = io.StringIO(newline="")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["case_id"] + self.col_labels.names())
        for r, row in zip(self.row_labels, self.values):
            w.writerow([r] + [format_number(x) for x in row])
        return buf.getvalue()

    def write_csv(self, path: str) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.to_csv())


def read_matrix_csv(text: str) -> tuple[list[str], list[str], np.ndarray]:
    """Read back :meth:`FeatureMatrix.to_csv` output as (rows, column names, values)."""
    reader = csv.reader(io.StringIO(text, newline=""))
    header = next(reader)
    if not header or header[0] != "case_id":
        raise ValueError("first column must be case_id")
    rows, vals = [], []
    for rec in reader:
        rows.append(rec[0])
        vals.append([float(x) for x in rec[1:]])
    return rows, header[1:], np.array(vals, dtype=np.float64).reshape(len(rows), len(header) - 1)


def labels_from(items: Iterable[DimensionLabel]) -> tuple[DimensionLabel, ...]:
    return tuple(sorted(set(items), key=DimensionLabel.sort_key))
