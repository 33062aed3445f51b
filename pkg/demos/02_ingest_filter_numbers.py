"""Read a CSV log with extra columns, filter events, take numeric statistics."""

from pmencode import CsvMapping, apply_encoding, parse_csv, validate
from pmencode.encode import EncodingSpec, numstats
from pmencode.predicate import apply_filter, parse_predicate

text = """claim,step,when,amount,clerk
c1,open,01/03/2021 09:00,120.5,ann
c1,check,01/03/2021 09:30,,bob
c1,pay,02/03/2021 11:00,80,ann
c2,open,05/03/2021 08:15,40,bob
c2,pay,04/03/2021 17:45,40,bob
c3,open,06/03/2021 10:00,15,cat
"""
mapping = CsvMapping(
    case_column="claim",
    activity_column="step",
    timestamp_column="when",
    timestamp_format="DD/MM/YYYY hh:mm",
    extra_columns=(("amount", "cost", "real"), ("clerk", "resource", "text")),
)
log = parse_csv(text.encode(), mapping)

# c2 was written out of order; the parser sorts by time and the report notices
print(validate(log).as_dict())
print("c2:", log["c2"].trace)

# filters are conjunctions of attribute tests
pred = parse_predicate("cost >= 40 and resource != null")
small = apply_filter(log, pred)
print(f"\n'{pred}' keeps {small.n_events} of {log.n_events} events in {len(small)} cases")

# numeric statistics per case; empty cells become 0
spec = numstats(["cost"], ["count", "sum", "avg", "max"])
print()
print(apply_encoding(log, spec).to_csv())

# the same statistics restricted to bob's events; c1 still has a row, c3 drops out
only_bob = EncodingSpec(spec.name, parse_predicate("resource == bob"), spec.dimensioning, spec.valuation)
print(apply_encoding(log, only_bob).to_csv())
