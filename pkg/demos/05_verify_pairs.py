#!/usr/bin/env python3
"""Check difficulty scores against human harder/easier judgments.

Builds 300 judged pairs where the estimator is right 85% of the time, adds
one pair with an even vote split and one with nearly tied judge scores, and
walks through the report under each exclusion rule.
"""

import numpy as np

from e2h.verify import (
    ExclusionPolicy,
    PairJudgment,
    Vote,
    matching_report,
    spearman,
)


def pair(pid, s_hard, s_easy, votes=(), judge=None):
    return PairJudgment(pair_id=pid, item_hard=f"{pid}h", item_easy=f"{pid}e",
                        est_hard=(s_hard, 0.02), est_easy=(s_easy, 0.02),
                        votes=tuple(votes), judge_scores=judge)


rng = np.random.default_rng(7)
pairs = []
for k in range(300):
    hi, lo = sorted((rng.uniform(), rng.uniform()), reverse=True)
    if rng.uniform() < 0.15:
        hi, lo = lo, hi  # estimator gets this pair backwards
    pairs.append(pair(f"p{k}", hi, lo, judge=((8.0, 3.0), (7.0, 2.0))))

pairs.append(pair("split", 0.9, 0.1,
                  votes=[Vote("r1", "first"), Vote("r2", "second")],
                  judge=((6.0, 5.0),)))
pairs.append(pair("close-call", 0.8, 0.2, judge=((5.4, 5.0),)))

for rule in ("none", "irt_sd_rule", "score_gap_rule"):
    rep = matching_report(pairs, exclusion=ExclusionPolicy(rule=rule, gap=2.0))
    reasons = ", ".join(f"{r}={n}" for r, n in sorted(rep.exclusion_reasons.items())) \
        or "nothing excluded"
    print(f"{rule:>15}: accuracy {rep.matching_accuracy:.3f} "
          f"(sd {rep.matching_accuracy_sd:.3f}), "
          f"discrepancy {rep.avg_discrepancy:.4f}, "
          f"included {rep.n_included}, {reasons}")

# Rank agreement between two score vectors, ties handled by midranks.
est = [p.est_hard[0] for p in pairs[:300]]
judged = [p.est_hard[0] + rng.normal(0, 0.15) for p in pairs[:300]]
print(f"\nSpearman against a noisy re-scoring: {spearman(est, judged):.3f}")
