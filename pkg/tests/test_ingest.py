import logging
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpus import random_log
from pmencode.errors import ConfigError, ParseError, ValidationError
from pmencode.ingest import (
    CsvMapping,
    compile_time_format,
    infer_mapping,
    parse_csv,
    parse_iso8601,
    parse_timestamp,
    parse_xes,
    validate,
    write_csv,
)
from pmencode.log import ABSENT, Case, Event, EventLog, Timestamp

XES_FIVE = b"""<?xml version="1.0" encoding="UTF-8"?>
<log xes.version="1.0" xmlns="http://www.xes-standard.org/">
  <extension name="Concept" prefix="concept" uri="http://www.xes-standard.org/concept.xesext"/>
  <global scope="event"><string key="concept:name" value="__INVALID__"/></global>
  <classifier name="Activity" keys="concept:name"/>
  <trace>
    <string key="concept:name" value="T1"/>
    <event>
      <string key="concept:name" value="register"/>
      <string key="org:resource" value="Ann"/>
      <date key="time:timestamp" value="2020-03-01T10:00:00.000+01:00"/>
      <float key="cost" value="12.5"/>
    </event>
    <event>
      <string key="concept:name" value="check"/>
      <string key="org:resource" value="Bob"/>
      <date key="time:timestamp" value="2020-03-01T09:30:00Z"/>
      <int key="cost" value="7"/>
      <boolean key="urgent" value="true"/>
    </event>
    <event>
      <string key="concept:name" value="decide"/>
      <date key="time:timestamp" value="2020-03-02T00:00:00"/>
      <string key="lifecycle:transition" value="complete"/>
    </event>
  </trace>
  <trace>
    <string key="concept:name" value="T2"/>
    <event>
      <string key="concept:name" value="register"/>
      <date key="time:timestamp" value="2020-03-05T08:00:00.250Z"/>
    </event>
    <event>
      <date key="time:timestamp" value="2020-03-05T08:01:00Z"/>
      <list key="items"><string key="x" value="1"/></list>
    </event>
  </trace>
</log>
"""


def ms(iso):
    return int(parse_iso8601(iso))


def test_xes_one_trace_three_events():
    data = b"""<log><trace><string key="concept:name" value="c"/>
    <event><string key="concept:name" value="a"/><date key="time:timestamp" value="2021-01-01T00:00:00Z"/></event>
    <event><string key="concept:name" value="b"/><date key="time:timestamp" value="2021-01-01T00:00:01Z"/></event>
    <event><string key="concept:name" value="c"/><date key="time:timestamp" value="2021-01-01T00:00:02Z"/></event>
    </trace></log>"""
    log = parse_xes(data)
    assert len(log) == 1 and log.n_events == 3
    assert log["c"].trace == ("a", "b", "c")


def test_xes_field_by_field(caplog):
    with caplog.at_level(logging.WARNING, logger="pmencode.ingest"):
        log = parse_xes(XES_FIVE)
    assert list(log.cases) == ["T1", "T2"]
    t1 = log["T1"].events
    # register at 10:00+01:00 is 09:00Z, before check at 09:30Z
    assert [e.activity for e in t1] == ["register", "check", "decide"]
    reg, chk, dec = t1
    assert reg.event_id == "T1.1" and reg.case_id == "T1"
    assert reg["resource"] == "Ann"
    assert int(reg.timestamp) == ms("2020-03-01T09:00:00Z")
    assert reg["cost"] == 12.5 and isinstance(reg["cost"], float)
    assert chk["resource"] == "Bob" and chk["cost"] == 7 and isinstance(chk["cost"], int)
    assert chk["urgent"] is True
    assert int(chk.timestamp) == ms("2020-03-01T09:30:00Z")
    assert dec["resource"] is ABSENT
    assert dec["lifecycle:transition"] == "complete"
    assert int(dec.timestamp) == ms("2020-03-02T00:00:00Z")
    t2 = log["T2"].events
    assert int(t2[0].timestamp) % 1000 == 250
    assert t2[1].activity is ABSENT
    assert "items" not in t2[1].attributes
    assert "org:resource" not in reg.attributes and "concept:name" not in reg.attributes
    text = caplog.text
    assert "extension" in text and "global" in text and "classifier" in text and "list" in text
    assert validate(log).missing_activity == 1


def test_xes_reorders_out_of_time_events():
    log = parse_xes(XES_FIVE)
    assert log.reordered_events == 0
    data = XES_FIVE.replace(b"2020-03-01T10:00:00.000+01:00", b"2020-03-01T11:00:00.000+01:00")
    log2 = parse_xes(data)
    assert [e.activity for e in log2["T1"]] == ["check", "register", "decide"]
    assert validate(log2).monotonicity_violations > 0


def test_xes_empty_log():
    assert len(parse_xes(b"<log/>")) == 0
    assert len(parse_xes(b'<log xmlns="http://www.xes-standard.org/"></log>')) == 0


def test_xes_trace_without_events_is_an_empty_case():
    log = parse_xes(b'<log><trace><string key="concept:name" value="x"/></trace></log>')
    assert list(log.cases) == ["x"] and len(log["x"]) == 0


def test_xes_malformed_reports_position():
    with pytest.raises(ParseError) as info:
        parse_xes(b"<log>\n<trace>\n<event></trace></log>")
    assert info.value.line == 3
    assert info.value.column is not None


def test_xes_missing_timestamp_is_fatal_and_names_trace():
    data = b"""<log><trace><event><string key="concept:name" value="a"/><date key="time:timestamp" value="2021-01-01"/></event></trace>
    <trace><event><string key="concept:name" value="a"/></event></trace></log>"""
    with pytest.raises(ValidationError, match="trace 1"):
        parse_xes(data)


def test_xes_parse_is_deterministic():
    assert parse_xes(XES_FIVE) == parse_xes(XES_FIVE)


CSV3 = "case,act,time\n1,a,2021-01-01 10:00:00\n1,b,2021-01-01 10:05:00\n1,c,2021-01-01 10:10:00\n"
MAP3 = CsvMapping("case", "act", "time", "YYYY-MM-DD hh:mm:ss")


def test_csv_three_rows_one_case():
    log = parse_csv(CSV3.encode(), MAP3)
    assert len(log) == 1
    assert log["1"].trace == ("a", "b", "c")
    assert validate(log).monotonicity_violations == 0


def test_csv_shuffled_rows_are_sorted():
    header, *rows = CSV3.splitlines()
    rng = random.Random(3)
    shuffled = rows[:]
    while shuffled == rows:
        rng.shuffle(shuffled)
    log = parse_csv(("\n".join([header] + shuffled) + "\n").encode(), MAP3)
    ref = parse_csv(CSV3.encode(), MAP3)
    assert log["1"].trace == ref["1"].trace
    assert [int(e.timestamp) for e in log["1"]] == [int(e.timestamp) for e in ref["1"]]
    assert validate(log).monotonicity_violations > 0


def test_csv_equal_timestamps_keep_row_order():
    text = "case,act,time\nk,x,2021-01-01 10:00:00\nk,y,2021-01-01 10:00:00\nk,w,2021-01-01 09:00:00\n"
    log = parse_csv(text.encode(), MAP3)
    assert log["k"].trace == ("w", "x", "y")


def test_csv_bad_timestamp_names_row():
    text = "case,act,time\n1,a,2021-01-01 10:00:00\n1,b,yesterday\n"
    with pytest.raises(ParseError) as info:
        parse_csv(text.encode(), MAP3)
    assert info.value.line == 3


def test_csv_unknown_column_is_config_error():
    with pytest.raises(ConfigError):
        parse_csv(CSV3.encode(), CsvMapping("case", "activity", "time"))
    with pytest.raises(ConfigError):
        parse_csv(CSV3.encode(), CsvMapping("case", "act", "time", None, (("nope", "cost", "real"),)))


def test_csv_mapping_needs_distinct_columns():
    with pytest.raises(ConfigError):
        CsvMapping("a", "a", "t")


def test_csv_extra_columns_and_quoting():
    text = 'id,case,act,time,cost,who\ne1,1,"a, quoted",2021-01-01T10:00:00Z,3.5,"x ""y"""\ne2,1,b,2021-01-01T10:30:00+01:00,,z\n'
    m = CsvMapping("case", "act", "time", None, (("cost", "cost", "real"), ("who", "resource", "text")), "id")
    log = parse_csv(text.encode(), m)
    e1, e2 = log["1"].events
    assert e1.event_id == "e2" and e2.event_id == "e1"  # 10:30+01:00 is 09:30Z
    assert e2.activity == "a, quoted" and e2["resource"] == 'x "y"' and e2["cost"] == 3.5
    assert e1["cost"] is ABSENT


def test_csv_missing_activity_is_absent():
    text = "case,act,time\n1,,2021-01-01 10:00:00\n"
    log = parse_csv(text.encode(), MAP3)
    assert validate(log).missing_activity == 1


@pytest.mark.parametrize(
    "pattern,text,iso",
    [
        ("YYYY-MM-DD", "2020-02-29", "2020-02-29T00:00:00Z"),
        ("DD/MM/YYYY hh:mm", "31/12/1999 23:59", "1999-12-31T23:59:00Z"),
        ("YYYY-MM-DDThh:mm:ss.SSS±zz:zz", "2020-01-01T01:00:00.123+01:00", "2020-01-01T00:00:00.123Z"),
        ("YYYY-MM-DDThh:mm:ss±zz:zz", "2020-01-01T00:00:00-02:30", "2020-01-01T02:30:00Z"),
        ("YYYYMMDDhhmmss", "20200101123456", "2020-01-01T12:34:56Z"),
    ],
)
def test_time_format_tokens(pattern, text, iso):
    assert int(parse_timestamp(text, pattern)) == ms(iso)


def test_time_format_rejects_mismatch_and_bad_patterns():
    with pytest.raises(ValueError):
        parse_timestamp("2020-01-01 10:00", "YYYY-MM-DD")
    with pytest.raises(ConfigError):
        compile_time_format("MM/DD")
    with pytest.raises(ConfigError):
        compile_time_format("YYYY-YYYY")


def test_iso8601_epoch_values():
    assert int(parse_iso8601("1970-01-01T00:00:00Z")) == 0
    assert int(parse_iso8601("1970-01-02")) == 86_400_000
    assert int(parse_iso8601("1970-01-01T01:00:00+01:00")) == 0
    assert int(parse_iso8601("1970-01-01T00:00:01.5Z")) == 1500


def test_validate_examples():
    clean = parse_csv(CSV3.encode(), MAP3)
    r = validate(clean)
    assert (r.monotonicity_violations, r.duplicate_event_ids, r.missing_activity, r.missing_timestamp) == (0, 0, 0, 0)
    assert r.event_count == 3 and r.case_count == 1

    t = Timestamp(0)
    dup = EventLog([Case("c", (Event("e", "c", {"activity": "a", "timestamp": t}), Event("e", "c", {"activity": "b", "timestamp": t})))])
    assert validate(dup).duplicate_event_ids == 1
    assert not validate(dup).ok

    unsorted = EventLog([Case("c", (Event("1", "c", {"timestamp": Timestamp(5)}), Event("2", "c", {"timestamp": Timestamp(1)})))])
    r = validate(unsorted)
    assert r.monotonicity_violations == 1 and r.missing_activity == 2

    no_ts = EventLog([Case("c", (Event("1", "c", {"activity": "a"}),))])
    assert validate(no_ts).missing_timestamp == 1


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_csv_round_trip(seed):
    log = random_log(np.random.default_rng(seed), max_cases=15)
    text = write_csv(log)
    back = parse_csv(text.encode(), infer_mapping(log))

    def multiset(lg):
        return sorted((e.case_id, e.event_id, tuple(sorted((k, repr(v)) for k, v in e.attributes.items()))) for e in lg.events)

    assert multiset(back) == multiset(log)
    assert write_csv(back) == text
    assert parse_csv(text.encode(), infer_mapping(log)) == back
