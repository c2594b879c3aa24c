#!/usr/bin/env python3
"""Standardize raw difficulty estimates and partition items into bins.

Both normalization methods map to [0, 1]: percentile-clipped min-max keeps
the shape of the raw scale away from the tails, quantile normalization
flattens it to midranks. Binning then splits the roster into graded
difficulty bands plus size-matched random draws.
"""

import numpy as np

from e2h.standardize import RawScore, make_bins, normalize, quantile_of

rng = np.random.default_rng(33)
# heavy-tailed raw scores, as rating-style outputs tend to be
raws = [RawScore(f"item{k:03d}", float(v), raw_sd=0.1)
        for k, v in enumerate(rng.standard_t(df=3, size=200))]

minmax = normalize(raws, method="minmax_clipped", p_lo=1, p_hi=99)
quant = normalize(raws, method="quantile")

by_id = {s.item_id: s for s in quant}
print("item        raw      minmax   quantile")
for s in sorted(minmax, key=lambda s: s.raw)[:3]:
    q = by_id[s.item_id]
    print(f"{s.item_id}  {s.raw:+8.3f}   {s.normalized:.4f}   {q.normalized:.4f}")
print("...")
for s in sorted(minmax, key=lambda s: s.raw)[-3:]:
    q = by_id[s.item_id]
    print(f"{s.item_id}  {s.raw:+8.3f}   {s.normalized:.4f}   {q.normalized:.4f}")

probe = minmax[17]
print(f"\nquantile_of({probe.item_id}) = {quantile_of(minmax, probe.item_id):.4f}")

bins = make_bins(minmax, a=7, b=1, seed=0)
print(f"\n{len(minmax)} items, 7 graded + 1 random bins of size {bins.bin_size}:")
for g in bins.graded:
    print(f"  graded {g.index}: center {g.center:.3f}, {len(g.item_ids)} items")
for r in bins.random:
    print(f"  random {r.index}: {len(r.item_ids)} items drawn over the full range")
