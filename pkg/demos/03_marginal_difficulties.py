#!/usr/bin/env python3
"""Difficulties from aggregated success rates alone.

When per-examinee records are gone and only per-item proportions survive,
the marginal route inverts the population-averaged success probability.
Here: four-option multiple choice, so the guessing floor is 1/4, and an
item at exactly that floor is unsolvable and gets excluded rather than
assigned a difficulty.
"""

from e2h.data import ItemDifficultySummary
from e2h.irt import NormalAbility, fit_from_item_difficulties, marginal_prob

summaries = [
    ItemDifficultySummary("warmup", p_correct=0.92, n_attempts=400),
    ItemDifficultySummary("medium", p_correct=0.61, n_attempts=400),
    ItemDifficultySummary("hard", p_correct=0.34, n_attempts=400),
    ItemDifficultySummary("floor", p_correct=0.25, n_attempts=400),
]

mf = fit_from_item_difficulties(summaries, n_choices=4)

print("item      p_correct    difficulty b      sd")
for est in mf.estimates:
    p = next(s.p_correct for s in summaries if s.item_id == est.item_id)
    print(f"{est.item_id:<8}  {p:9.2f}    {est.b:+12.4f}  {est.b_sd:6.3f}")
for item_id, reason in mf.excluded:
    print(f"{item_id:<8}  excluded: {reason}")

# The fit is a true inverse: pushing an estimate back through the forward
# model reproduces the observed proportion.
est = mf.estimates[1]
p_back = marginal_prob(est.b, c=0.25)
print(f"\nround trip for {est.item_id}: "
      f"marginal_prob({est.b:.4f}) = {p_back:.6f}")

# A stronger population makes every item look easier, so the same
# proportions map to higher difficulty estimates.
shifted = fit_from_item_difficulties(summaries[:3], n_choices=4,
                                     ability=NormalAbility(mean=1.0, sd=1.0))
print("\nsame data, ability mean moved from 0 to +1:")
for base, moved in zip(mf.estimates, shifted.estimates):
    print(f"  {base.item_id:<8} b {base.b:+.3f} -> {moved.b:+.3f}")
