"""Input files and the exit-status matrix shared by the CLI tests."""

from __future__ import annotations

import json
from pathlib import Path

from corpus import toy_log
from pmencode.ingest import write_csv

TOY_XES = """<?xml version="1.0" encoding="UTF-8"?>
<log xes.version="1.0">
{traces}
</log>
"""


def _toy_xes() -> str:
    parts = []
    for case in toy_log():
        events = "".join(
            f'<event><string key="concept:name" value="{e.activity}"/>'
            f'<date key="time:timestamp" value="{e.timestamp.isoformat()}"/></event>'
            for e in case
        )
        parts.append(f'<trace><string key="concept:name" value="{case.case_id}"/>{events}</trace>')
    return TOY_XES.format(traces="\n".join(parts))


def write_fixtures(root: Path) -> dict[str, Path]:
    root.mkdir(parents=True, exist_ok=True)
    files = {
        "toy.csv": write_csv(toy_log()),
        "toy.xes": _toy_xes(),
        "broken.xes": "<log><trace><event></trace></log>",
        "notime.xes": '<log><trace><event><string key="concept:name" value="a"/></event></trace></log>',
        "badtime.csv": "case_id,activity,timestamp\n1,a,2021-01-01T00:00:00Z\n1,b,not-a-time\n",
        "dupes.csv": "case_id,event_id,activity,timestamp\n1,e,a,2021-01-01T00:00:00Z\n1,e,b,2021-01-01T00:01:00Z\n",
        "toy.json": json.dumps({"input": "toy.csv", "encoder": "kgram:k=2", "filter": "activity != null"}),
        "typo.json": json.dumps({"input": "toy.csv", "encodr": "one-hot"}),
    }
    paths = {}
    for name, text in files.items():
        p = root / name
        p.write_text(text, encoding="utf-8")
        paths[name] = p
    return paths


# Five successful runs, then fifteen failures.
# (label, argv with {dir} standing for the fixture directory and {out} for a fresh output path, expected status)
EXIT_MATRIX = [
    ("encode toy csv", "encode --input {dir}/toy.csv --encoder activity-profile --out {out}", 0),
    ("stats coverage", "stats --input {dir}/toy.csv --report coverage --out {out}", 0),
    ("balance seeded", "balance --input {dir}/toy.csv --strategy oversample-to-max --seed 42 --out {out}", 0),
    ("flow xes with dot", "flow --input {dir}/toy.xes --report dot --out {out}", 0),
    ("validate clean", "validate --input {dir}/toy.csv --out {out}", 0),
    ("normality too few pairs", "stats --input {dir}/toy.csv --report normality --out {out}", 1),
    ("pareto too few counts", "stats --input {dir}/toy.csv --report pareto --out {out}", 1),
    ("missing input file", "encode --input {dir}/nope.csv --out {out}", 1),
    ("malformed xes", "encode --input {dir}/broken.xes --out {out}", 1),
    ("bad csv timestamp", "encode --input {dir}/badtime.csv --out {out}", 1),
    ("duplicate event ids", "validate --input {dir}/dupes.csv --event-id-col event_id --out {out}", 1),
    ("xes event without timestamp", "encode --input {dir}/notime.xes --out {out}", 1),
    ("k below one", "encode --input {dir}/toy.csv --encoder kgram:k=0 --out {out}", 2),
    ("balance without seed", "balance --input {dir}/toy.csv --strategy oversample-to-max --out {out}", 2),
    ("threshold out of range", "flow --input {dir}/toy.csv --threshold 1.5 --out {out}", 2),
    ("predicate syntax", "encode --input {dir}/toy.csv --filter 'cost >=' --out {out}", 2),
    ("ordering on text attribute", "encode --input {dir}/toy.csv --filter 'activity < 3' --out {out}", 2),
    ("unknown encoder", "encode --input {dir}/toy.csv --encoder word2vec --out {out}", 2),
    ("unknown config key", "encode --config {dir}/typo.json --out {out}", 2),
    ("unknown command", "frobnicate --input {dir}/toy.csv", 2),
]
