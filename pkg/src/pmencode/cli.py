"""Command-line interface.

Commands: ``encode``, ``stats``, ``balance``, ``flow``, ``validate``.  Every
option can also come from a JSON file given with ``--config``; its keys are
the long option names (``time-format`` or ``time_format``), and flags on
the command line win.  Relative paths in a config file are taken relative
to the file.

Exit status: 0 on success, 1 when the input data is unusable, 2 when the
invocation or configuration is wrong.  Diagnostics go to stderr; results go
to the ``--out`` file (``-`` for stdout).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Any, Callable, Sequence

from . import encode as enc
from . import flow, stats
from .errors import ConfigError, DataError, PMEncodeError
from .ingest import CsvMapping, read_log, validate, write_csv
from .log import EventLog, extract_variants
from .predicate import FilterPredicate, apply_filter, parse_predicate

log = logging.getLogger("pmencode")

PATH_KEYS = {"input", "out"}
DEFAULTS: dict[str, Any] = {
    "format": None,
    "case_col": "case_id",
    "activity_col": "activity",
    "time_col": "timestamp",
    "time_format": None,
    "event_id_col": None,
    "attr": [],
    "filter": "",
    "encoder": "activity-profile",
    "canonical": False,
    "threshold": 0.3,
    "report": None,
    "thresholds": None,
    "style": "jsonl",
    "strategy": None,
    "seed": None,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse exits 2 by default too; keep the message short
        self.print_usage(sys.stderr)
        raise SystemExit(_fail(ConfigError(message)))


def _shared(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("input")
    g.add_argument("--config", help="JSON file with option values")
    g.add_argument("--input", help="event log (XES or CSV)")
    g.add_argument("--format", choices=["xes", "csv"], help="input format (default: from extension)")
    g.add_argument("--case-col", dest="case_col")
    g.add_argument("--activity-col", dest="activity_col")
    g.add_argument("--time-col", dest="time_col")
    g.add_argument("--time-format", dest="time_format", help="e.g. 'YYYY-MM-DD hh:mm:ss' (default ISO-8601)")
    g.add_argument("--event-id-col", dest="event_id_col")
    g.add_argument(
        "--attr",
        action="append",
        metavar="COL[=NAME]:TYPE",
        help="extra CSV column to read; TYPE is text, integer, real or timestamp (repeatable)",
    )
    g.add_argument("--filter", help='event predicate, e.g. "cost >= 100 and activity != null"')
    p.add_argument("--out", help="output path ('-' for stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pmencode", description="Encode process-mining event logs as feature matrices.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("encode", help="write a feature matrix CSV")
    _shared(p)
    p.add_argument(
        "--encoder",
        help="one-hot | activity-profile | kgram:k=<n> | positional:max=<n> | numstats:attrs=<a;b>;stats=<avg,sum,...>",
    )
    p.add_argument("--canonical", action="store_true", default=None, help="canonicalize concurrent activities first")
    p.add_argument("--threshold", type=float, help="concurrency threshold for --canonical (default 0.3)")

    p = sub.add_parser("stats", help="variant and distribution reports")
    _shared(p)
    p.add_argument("--report", choices=["coverage", "variants", "pareto", "normality"])
    p.add_argument("--thresholds", help="comma-separated coverage percentages")
    p.add_argument("--style", choices=["jsonl", "text"])

    p = sub.add_parser("balance", help="rebalance variants, write a CSV log")
    _shared(p)
    p.add_argument("--strategy", help="oversample-to-max | undersample-to-min | target-count:t=<n>")
    p.add_argument("--seed", type=int, help="random seed (required)")

    p = sub.add_parser("flow", help="directly-follows, dependency and concurrency relations")
    _shared(p)
    p.add_argument("--threshold", type=float, help="concurrency threshold in [0, 1) (default 0.3)")
    p.add_argument("--report", choices=["dot"], help="also write dfg.dot")

    p = sub.add_parser("validate", help="check a log and report problems as JSON")
    _shared(p)
    return parser


def _load_config(path: str) -> dict[str, Any]:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    base = Path(path).parent
    out = {}
    for key, value in data.items():
        k = key.replace("-", "_")
        if k not in DEFAULTS and k not in PATH_KEYS:
            raise ConfigError(f"{path}: unknown option {key!r}")
        if k in PATH_KEYS and isinstance(value, str) and value != "-" and not os.path.isabs(value):
            value = str(base / value)
        out[k] = value
    return out


def resolve(args: argparse.Namespace) -> dict[str, Any]:
    """Merge built-in defaults, the config file and command-line flags (in rising priority)."""
    opts = dict(DEFAULTS)
    opts.update({"input": None, "out": None})
    if getattr(args, "config", None):
        opts.update(_load_config(args.config))
    for key, value in vars(args).items():
        if key in ("config", "command", "verbose") or value is None:
            continue
        opts[key] = value
    opts["command"] = args.command
    return opts


def _mapping(opts: dict[str, Any]) -> CsvMapping:
    extra = []
    for spec in opts.get("attr") or []:
        col, sep, kind = str(spec).rpartition(":")
        if not sep or not col:
            raise ConfigError(f"--attr {spec!r}: expected COL[=NAME]:TYPE")
        col, _, name = col.partition("=")
        extra.append((col, name or col, kind))
    return CsvMapping(
        opts["case_col"], opts["activity_col"], opts["time_col"], opts["time_format"], tuple(extra), opts["event_id_col"]
    )


def _load(opts: dict[str, Any]) -> EventLog:
    path = opts.get("input")
    if not path:
        raise ConfigError("--input is required")
    fmt = opts.get("format")
    if fmt is None and not str(path).lower().endswith((".xes", ".csv")):
        raise ConfigError(f"cannot tell the format of {path!r}; pass --format xes|csv")
    mapping = _mapping(opts)
    if not os.path.exists(path):
        raise DataError(f"{path}: no such file")
    return read_log(path, fmt, mapping)


def _filter(opts: dict[str, Any]) -> FilterPredicate:
    return parse_predicate(opts.get("filter") or "")


def _write(opts: dict[str, Any], text: str, name: str | None = None) -> None:
    out = opts.get("out")
    if not out:
        raise ConfigError("--out is required")
    if name is not None:
        if out == "-":
            sys.stdout.write(text)
            return
        os.makedirs(out, exist_ok=True)
        out = os.path.join(out, name)
    if out == "-":
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _diag(msg: str) -> None:
    print(msg, file=sys.stderr)


def cmd_encode(opts: dict[str, Any]) -> int:
    relation = None
    extra = _filter(opts)
    data = _load(opts)
    if opts.get("canonical"):
        threshold = float(opts["threshold"])
        relation = flow.concurrency_pairs(flow.directly_follows(apply_filter(data, extra)), threshold)
    spec = enc.parse_encoder(str(opts["encoder"]), relation)
    if extra.terms:
        spec = enc.EncodingSpec(spec.name, spec.filter & extra, spec.dimensioning, spec.valuation)
    matrix = enc.apply_encoding(data, spec)
    _write(opts, matrix.to_csv())
    _diag(f"encoder={spec.name} n={matrix.n} d={matrix.d} dropped={len(data) - matrix.n}")
    return 0


def cmd_stats(opts: dict[str, Any]) -> int:
    report = opts.get("report")
    if report is None:
        raise ConfigError("--report is required (coverage, variants, pareto or normality)")
    if report not in ("coverage", "variants", "pareto", "normality"):
        raise ConfigError(f"unknown report {report!r}")
    style = opts.get("style") or "jsonl"
    if style not in ("jsonl", "text"):
        raise ConfigError(f"unknown style {style!r}")
    data = apply_filter(_load(opts), _filter(opts))
    vt = extract_variants(data)
    if report == "coverage":
        thresholds = None
        if opts.get("thresholds"):
            raw = opts["thresholds"]
            try:
                thresholds = [float(t) for t in (raw.split(",") if isinstance(raw, str) else raw)]
            except ValueError:
                raise ConfigError(f"bad --thresholds {raw!r}") from None
        table = stats.coverage_table(vt, thresholds)
        text = table.to_jsonl() if style == "jsonl" else table.to_text()
    elif report == "variants":
        rows = stats.variant_rows(vt)
        if style == "jsonl":
            text = "".join(json.dumps(r, ensure_ascii=False) + "\n" for r in rows)
        else:
            text = stats.format_columns(
                ["rank", "count", "share", "trace"],
                [[r["rank"], r["count"], f"{r['share_pct']:.1f}%", ",".join(map(str, r["trace"]))] for r in rows],
            )
    elif report == "pareto":
        fit = stats.pareto_fit(vt)
        text = fit.to_jsonl() if style == "jsonl" else stats.format_columns(
            ["exponent", "xmin", "ks_distance", "n_tail"], [[f"{fit.exponent:.4f}", fit.xmin, f"{fit.ks_distance:.4f}", fit.n_tail]]
        )
    else:
        rep = stats.normality_diagnostic(stats.dependency_frequency_samples(data))
        text = rep.to_jsonl() if style == "jsonl" else stats.format_columns(
            ["n", "skewness", "excess_kurtosis", "statistic", "normal_at_5pct"],
            [[rep.sample_size, f"{rep.skewness:.4f}", f"{rep.excess_kurtosis:.4f}", f"{rep.statistic:.4f}", rep.normal_at_5pct]],
        )
    _write(opts, text)
    _diag(f"report={report} variants={len(vt)} cases={vt.total_cases}")
    return 0


def cmd_balance(opts: dict[str, Any]) -> int:
    if opts.get("seed") is None:
        raise ConfigError("--seed is required for balance")
    if not opts.get("strategy"):
        raise ConfigError("--strategy is required (oversample-to-max, undersample-to-min, target-count:t=<n>)")
    seed = opts["seed"]
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError(f"seed must be an integer, got {seed!r}")
    strategy = stats.BalanceStrategy.parse(str(opts["strategy"]), seed)
    data = apply_filter(_load(opts), _filter(opts))
    balanced = stats.balance(data, strategy)
    _write(opts, write_csv(balanced))
    _diag(f"strategy={strategy.kind} cases_in={len(data)} cases_out={len(balanced)}")
    return 0


def cmd_flow(opts: dict[str, Any]) -> int:
    threshold = float(opts.get("threshold", 0.3))
    if not 0.0 <= threshold < 1.0:
        raise ConfigError(f"threshold must lie in [0, 1), got {threshold}")
    if opts.get("report") not in (None, "dot"):
        raise ConfigError(f"unknown flow report {opts['report']!r}")
    data = apply_filter(_load(opts), _filter(opts))
    df = flow.directly_follows(data)
    rel = flow.concurrency_pairs(df, threshold)
    _write(opts, df.to_csv(), "dfg.csv")
    _write(opts, flow.dependency_matrix(df).to_csv(), "dependency.csv")
    _write(opts, rel.to_text(), "concurrency.tsv")
    if opts.get("report") == "dot":
        _write(opts, df.to_dot(), "dfg.dot")
    _diag(f"activities={len(df.alphabet)} edges={len(df.nonzero())} concurrent_pairs={len(rel)}")
    return 0


def cmd_validate(opts: dict[str, Any]) -> int:
    data = apply_filter(_load(opts), _filter(opts))
    report = validate(data)
    text = json.dumps(report.as_dict()) + "\n"
    if opts.get("out"):
        _write(opts, text)
    else:
        sys.stdout.write(text)
    if not report.ok:
        _diag(f"invalid log: {report.duplicate_event_ids} duplicate event id(s), {report.missing_timestamp} missing timestamp(s)")
        return 1
    return 0


COMMANDS: dict[str, Callable[[dict[str, Any]], int]] = {
    "encode": cmd_encode,
    "stats": cmd_stats,
    "balance": cmd_balance,
    "flow": cmd_flow,
    "validate": cmd_validate,
}


def _fail(exc: Exception) -> int:
    code = 2 if isinstance(exc, ConfigError) else 1
    print(f"pmencode: error: {exc}", file=sys.stderr)
    return code


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="pmencode: %(message)s")
    try:
        opts = resolve(args)
        return COMMANDS[args.command](opts)
    except PMEncodeError as exc:
        return _fail(exc)
    except OSError as exc:
        return _fail(DataError(f"{exc.filename or ''}: {exc.strerror}"))


if __name__ == "__main__":
    sys.exit(main())
