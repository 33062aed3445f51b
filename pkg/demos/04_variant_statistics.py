"""Variant coverage, a power-law fit and a normality check."""

import numpy as np

from pmencode import coverage_table, extract_variants, make_log, normality_diagnostic, pareto_fit
from pmencode.stats import dependency_frequency_samples

# a log whose variant frequencies fall off like a power law
rng = np.random.default_rng(11)
x = np.arange(1, 10_001, dtype=float)
p = x**-2.2
counts = np.sort(rng.choice(x.astype(int), size=400, p=p / p.sum()))[::-1]
alphabet = list("abcdefghij")
traces = []
for rank, n in enumerate(counts):
    # a distinct trace per variant: the rank written in base 10 over the alphabet
    trace = ["start"] + [alphabet[int(d)] for d in str(rank)] + ["end"]
    traces.extend([trace] * int(n))
log = make_log(traces)
vt = extract_variants(log)
print(f"{vt.total_cases} cases in {len(vt)} variants")

print()
print(coverage_table(vt, thresholds=[50, 80, 95]).to_text())

fit = pareto_fit(vt)
print(f"power law: alpha={fit.exponent:.3f} xmin={fit.xmin} ks={fit.ks_distance:.3f} tail={fit.n_tail}")

# directly-follows frequencies as a sample for the moment test
sample = dependency_frequency_samples(log)
rep = normality_diagnostic(sample)
print(f"\n{rep.sample_size} nonzero pairs: skew={rep.skewness:.2f} kurt={rep.excess_kurtosis:.2f} "
      f"stat={rep.statistic:.1f} normal={rep.normal_at_5pct}")
