"""Balance variant frequencies by cloning or dropping cases."""

from pmencode import BalanceStrategy, balance, extract_variants, make_log, write_csv

log = make_log([["a", "b", "c"]] * 3 + [["a", "b", "a"]] * 11 + [["a", "c", "b", "a"]] * 20)


def show(title, lg):
    print(f"{title:22s} {len(lg):3d} cases  " + "  ".join(f"{''.join(v.trace)}:{v.count}" for v in extract_variants(lg)))


show("original", log)
for text in ("oversample-to-max", "undersample-to-min", "target-count:t=10"):
    show(text, balance(log, BalanceStrategy.parse(text, seed=42)))

# clones carry a #dupN suffix and follow the originals
up = balance(log, BalanceStrategy("oversample-to-max", 42))
print("\nlast cases:", list(up.cases)[-3:])

# same seed, same bytes
again = balance(log, BalanceStrategy("oversample-to-max", 42))
print("reproducible:", write_csv(up) == write_csv(again))
