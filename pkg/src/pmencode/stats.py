"""Variant statistics, distribution diagnostics and variant balancing."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Any, Iterable, Sequence, Union

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import zeta

from .errors import ConfigError, DataError, DegenerateError, InsufficientDataError
from .flow import directly_follows
from .log import Case, Event, EventLog, VariantTable, extract_variants

CHI2_2DF_5PCT = 5.991


def round_half_up(x: Fraction | float, digits: int = 1) -> float:
    """Round half up, e.g. 37.55 -> 37.6.

    Floats are taken at their shortest decimal form, so ``37.55`` means
    37.55 and not the binary value just below it.
    """
    q = (Fraction(repr(x)) if isinstance(x, float) else Fraction(x)) * 10**digits
    return float(math.floor(q + Fraction(1, 2))) / 10**digits


# -- coverage ----------------------------------------------------------------


@dataclass(frozen=True)
class CoverageRow:
    cases_covered: int
    variant_count: int
    coverage_pct: float


@dataclass(frozen=True)
class CoverageTable:
    rows: tuple[CoverageRow, ...]

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def __getitem__(self, i: int) -> CoverageRow:
        return self.rows[i]

    def to_jsonl(self) -> str:
        return "".join(json.dumps(asdict(r)) + "\n" for r in self.rows)

    def to_text(self) -> str:
        return format_columns(
            ["cases", "variants", "coverage"],
            [[r.cases_covered, r.variant_count, f"{r.coverage_pct:.1f}%"] for r in self.rows],
        )


def _counts_of(vt: VariantTable | Sequence[int]) -> list[int]:
    counts = vt.counts if isinstance(vt, VariantTable) else [int(c) for c in vt]
    return sorted(counts, reverse=True)


def coverage_table(
    vt: VariantTable | Sequence[int],
    thresholds: Sequence[float] | None = None,
    *,
    ranks: Sequence[int] | None = None,
) -> CoverageTable:
    """Cumulative case coverage of the most frequent variants.

    Without ``thresholds`` there is one row at the end of each run of equal
    variant counts.  With thresholds (percentages) each row is the fewest top
    variants covering at least that share of cases.  ``ranks`` asks for rows
    after exactly those numbers of top variants.  The last row always covers
    every variant.
    """
    counts = _counts_of(vt)
    if not counts:
        raise InsufficientDataError("coverage of an empty variant table")
    if thresholds is not None and ranks is not None:
        raise ConfigError("give thresholds or ranks, not both")
    total = sum(counts)
    cum = np.cumsum(counts).tolist()
    if ranks is not None:
        bad = [k for k in ranks if not 1 <= k <= len(counts)]
        if bad:
            raise ConfigError(f"ranks {bad} outside 1..{len(counts)}")
        ks = list(ranks) + [len(counts)]
    elif thresholds is None:
        ks = [k for k in range(1, len(counts) + 1) if k == len(counts) or counts[k] != counts[k - 1]]
    else:
        ks = []
        for t in thresholds:
            need = Fraction(str(t)) * total / 100
            k = next((i + 1 for i, c in enumerate(cum) if c >= need), len(counts))
            ks.append(k)
        ks.append(len(counts))
    rows = [CoverageRow(cum[k - 1], k, round_half_up(Fraction(cum[k - 1] * 100, total))) for k in sorted(set(ks))]
    return CoverageTable(tuple(rows))


# -- power-law fit -----------------------------------------------------------


@dataclass(frozen=True)
class ParetoFit:
    exponent: float
    xmin: int
    ks_distance: float
    n_tail: int = 0

    def to_jsonl(self) -> str:
        return json.dumps(asdict(self)) + "\n"


def _approx_alpha(tail: np.ndarray, xmin: int) -> float:
    return 1.0 + len(tail) / float(np.sum(np.log(tail / (xmin - 0.5))))


def _exact_alpha(tail: np.ndarray, xmin: int) -> float:
    log_sum = float(np.sum(np.log(tail)))
    n = len(tail)

    def nll(alpha: float) -> float:
        return alpha * log_sum + n * math.log(zeta(alpha, xmin))

    guess = _approx_alpha(tail, xmin)
    res = minimize_scalar(nll, bounds=(1.0 + 1e-9, max(2 * guess, 10.0)), method="bounded", options={"xatol": 1e-10})
    return float(res.x)


def _ks_discrete(tail: np.ndarray, xmin: int, alpha: float) -> float:
    values, freq = np.unique(tail, return_counts=True)
    emp = np.cumsum(freq) / len(tail)
    norm = zeta(alpha, xmin)
    # both CDFs are steps on the integers; the empirical one is flat between
    # observed values, so the gap peaks at an observed value or just before the next
    fit_at = 1.0 - zeta(alpha, values + 1.0) / norm
    gaps = np.abs(emp - fit_at)
    before_next = values[1:] - 1
    fit_before = 1.0 - zeta(alpha, before_next + 1.0) / norm
    gaps_before = np.abs(emp[:-1] - fit_before)
    return float(max(gaps.max(), gaps_before.max() if len(gaps_before) else 0.0))


def pareto_fit(vt: VariantTable | Sequence[int], min_tail: int = 10, method: str = "exact") -> ParetoFit:
    """Fit a discrete power law ``p(x) ~ x**-alpha`` for ``x >= xmin`` to variant counts.

    Every observed value leaving at least ``min_tail`` counts in the tail is a
    candidate ``xmin``; the one whose fit has the smallest Kolmogorov-Smirnov
    distance wins.  ``method="exact"`` maximizes the discrete likelihood
    numerically, ``method="approx"`` uses the closed form
    ``1 + n / sum(ln(x / (xmin - 0.5)))``, which is biased low for small
    ``xmin``.
    """
    if method not in ("exact", "approx"):
        raise ConfigError(f"unknown fit method {method!r}")
    estimate = _exact_alpha if method == "exact" else _approx_alpha
    x = np.asarray(_counts_of(vt), dtype=np.float64)
    if len(x) and np.all(x == x[0]):
        raise DegenerateError("all counts are equal; no power law to fit")
    uniq = np.unique(x)
    if len(uniq) < 10:
        raise InsufficientDataError(f"need at least 10 distinct counts, got {len(uniq)}")
    if uniq[0] < 1:
        raise DataError("counts must be positive")
    best: ParetoFit | None = None
    for xmin in uniq:
        tail = x[x >= xmin]
        if len(tail) < min_tail or len(np.unique(tail)) < 2:
            break
        alpha = estimate(tail, int(xmin))
        d = _ks_discrete(tail, int(xmin), alpha)
        if best is None or d < best.ks_distance:
            best = ParetoFit(alpha, int(xmin), d, len(tail))
    assert best is not None
    return best


# -- normality ---------------------------------------------------------------


@dataclass(frozen=True)
class NormalityReport:
    sample_size: int
    skewness: float
    excess_kurtosis: float
    statistic: float
    normal_at_5pct: bool

    def to_jsonl(self) -> str:
        return json.dumps(asdict(self)) + "\n"


def normality_diagnostic(samples: Iterable[float]) -> NormalityReport:
    """Moment test of normality: ``n/6 * (g1**2 + g2**2/4)`` against chi-square(2).

    ``g1`` and ``g2`` are the plain moment estimators of skewness and excess
    kurtosis.  The sample passes when the statistic is below 5.991.
    """
    x = np.asarray(list(samples), dtype=np.float64)
    n = len(x)
    if n < 8:
        raise InsufficientDataError(f"normality diagnostic needs at least 8 samples, got {n}")
    if np.all(x == x[0]):
        raise DegenerateError("sample has zero variance")
    dev = x - x.mean()
    m2 = float(np.mean(dev**2))
    m3 = float(np.mean(dev**3))
    m4 = float(np.mean(dev**4))
    g1 = m3 / m2**1.5
    g2 = m4 / m2**2 - 3.0
    stat = n / 6.0 * (g1**2 + g2**2 / 4.0)
    return NormalityReport(n, g1, g2, stat, bool(stat < CHI2_2DF_5PCT))


def dependency_frequency_samples(log: EventLog, min_pairs: int = 8) -> list[float]:
    """Nonzero directly-follows counts over all ordered activity pairs, in alphabet order."""
    if len(log.activity_alphabet) < 2:
        raise DataError("dependency frequencies need at least two activities")
    counts = list(directly_follows(log).nonzero().values())
    if len(counts) < min_pairs:
        raise InsufficientDataError(f"only {len(counts)} nonzero directly-follows pairs; need at least {min_pairs}")
    return [float(c) for c in counts]


# -- balancing ---------------------------------------------------------------

BALANCE_KINDS = ("oversample-to-max", "undersample-to-min", "target-count")


@dataclass(frozen=True)
class BalanceStrategy:
    kind: str
    seed: int
    target: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in BALANCE_KINDS:
            raise ConfigError(f"unknown balancing strategy {self.kind!r}; choose from {BALANCE_KINDS}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, (int, np.integer)):
            raise ConfigError(f"seed must be an integer, got {self.seed!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must fit in an unsigned 64-bit integer")
        if self.kind == "target-count":
            if self.target is None or self.target < 1:
                raise ConfigError("target-count needs a target of at least 1")

    @classmethod
    def parse(cls, text: str, seed: int) -> BalanceStrategy:
        """``oversample-to-max``, ``undersample-to-min`` or ``target-count:t=<n>``."""
        name, _, rest = text.strip().partition(":")
        target = None
        if rest:
            key, _, val = rest.partition("=")
            if key.strip() != "t" or name != "target-count":
                raise ConfigError(f"unexpected strategy parameter {rest!r}")
            try:
                target = int(val)
            except ValueError:
                raise ConfigError(f"target must be an integer, got {val!r}") from None
        return cls(name, seed, target)


def _clone(case: Case, suffix: str) -> Case:
    new_id = case.case_id + suffix
    return Case(new_id, tuple(Event(e.event_id + suffix, new_id, e.attributes) for e in case.events))


def balance(log: EventLog, strategy: BalanceStrategy) -> EventLog:
    """Even out variant frequencies by duplicating or dropping whole cases.

    Duplicates get ids ``<case_id>#dup<N>`` (events ``<event_id>#dup<N>``)
    and follow the original cases.  Surviving originals keep their order.
    The seeded generator is local to the call.
    """
    vt = extract_variants(log)
    if len(vt) == 0:
        raise DataError("cannot balance an empty log")
    if vt.skipped_cases:
        raise DataError(f"{vt.skipped_cases} case(s) have events without an activity and belong to no variant")
    counts = vt.counts
    if strategy.kind == "oversample-to-max":
        target = max(counts)
    elif strategy.kind == "undersample-to-min":
        target = min(counts)
    else:
        target = int(strategy.target)  # type: ignore[arg-type]

    rng = np.random.default_rng(int(strategy.seed))
    dropped: set[str] = set()
    picks: list[str] = []
    for v in vt:
        if v.count > target:
            keep = set(rng.choice(v.count, size=target, replace=False).tolist())
            dropped.update(cid for i, cid in enumerate(v.case_ids) if i not in keep)
        elif v.count < target:
            picks.extend(v.case_ids[i] for i in rng.integers(0, v.count, size=target - v.count).tolist())

    taken = set(log.cases)
    dup_no: dict[str, int] = {}
    clones = []
    for cid in picks:
        n = dup_no.get(cid, 0)
        while True:
            n += 1
            if f"{cid}#dup{n}" not in taken:
                break
        dup_no[cid] = n
        taken.add(f"{cid}#dup{n}")
        clones.append(_clone(log[cid], f"#dup{n}"))
    kept = [c for c in log if c.case_id not in dropped]
    return EventLog(kept + clones)


# -- reporting ---------------------------------------------------------------


def variant_rows(vt: VariantTable) -> list[dict[str, Any]]:
    total = vt.total_cases
    return [
        {
            "rank": i,
            "count": v.count,
            "share_pct": round_half_up(Fraction(v.count * 100, total)) if total else 0.0,
            "length": len(v.trace),
            "trace": list(v.trace),
        }
        for i, v in enumerate(vt, start=1)
    ]


def format_columns(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    """Left-aligned text table with two-space gutters."""
    cells = [list(map(str, header))] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells]
    return "\n".join(lines) + "\n"


Report = Union[CoverageTable, ParetoFit, NormalityReport]
