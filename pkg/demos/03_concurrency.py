"""Detect concurrent activities and let k-grams ignore their order."""

import numpy as np

from pmencode import apply_encoding, kgram, make_log
from pmencode.flow import canonicalize, concurrency_pairs, dependency_matrix, directly_follows, parallelism_features

# triage, then three tests in any order, then discharge; one in ten cases skips the x-ray
rng = np.random.default_rng(3)
traces = []
for i in range(200):
    tests = ["blood", "xray", "physical"]
    if i % 10 == 0:
        tests.remove("xray")
    rng.shuffle(tests)
    traces.append(["triage", *tests, "discharge"])
log = make_log(traces)

df = directly_follows(log)
print("directly-follows counts")
print(df.to_csv())

dep = dependency_matrix(df)
print(f"dep(triage, blood) = {dep['triage', 'blood']:.3f}   dep(blood, xray) = {dep['blood', 'xray']:.3f}")

rel = concurrency_pairs(df, threshold=0.3)
print("concurrent pairs:", rel.sorted_pairs())

# every shuffle of the tests maps to one canonical trace
print("canonical:", {canonicalize(t, rel) for t in log.traces().values() if len(t) == 5})

plain = apply_encoding(log, kgram(2))
canon = apply_encoding(log, kgram(2, rel))
print(f"\nkgram(2) columns: {plain.d} plain, {canon.d} canonical")
print("distinct rows:", len(np.unique(plain.values, axis=0)), "plain,", len(np.unique(canon.values, axis=0)), "canonical")

# case-level parallelism and optionality columns
feats = parallelism_features(log, rel)
for a in sorted(feats.parallelism):
    print(f"  {a:10s} parallelism={feats.parallelism[a]:.2f} optionality={feats.optionality[a]:.2f}")
wide = canon.join(feats.columns())
print("joined matrix:", wide.shape)
print(df.to_dot().splitlines()[0], "...")
