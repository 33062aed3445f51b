"""Encode a small log four ways and look at the matrices."""

from pmencode import activity_profile, apply_encoding, kgram, make_log, one_hot, positional

# 3 x <a,b,c>, 11 x <a,b,a>, 20 x <a,c,b,a>
traces = [["a", "b", "c"]] * 3 + [["a", "b", "a"]] * 11 + [["a", "c", "b", "a"]] * 20
log = make_log(traces)
print(f"{len(log)} cases, {log.n_events} events, alphabet {log.activity_alphabet}")

# one row per case; print the first case of each variant
firsts = {}
for case in log:
    firsts.setdefault(case.trace, case.case_id)

for spec in (activity_profile(), one_hot(), kgram(2), positional(4)):
    m = apply_encoding(log, spec)
    print(f"\n{spec.name}: n={m.n} d={m.d}")
    print("  columns:", ", ".join(m.col_labels.names()))
    for trace, cid in firsts.items():
        print(f"  {''.join(trace):6s}", m.row(cid).astype(int).tolist())

# the matrix serializes to CSV with case_id first
print()
print(apply_encoding(log, activity_profile()).to_csv().splitlines()[:3])
