#!/usr/bin/env python3
"""One rating-period update, shown step by step, then a short timeline.

The subject starts at rating 1500 with deviation 200 and volatility 0.06,
then plays three games in one period: a win against 1400/30, a loss against
1550/100, and a loss against 1700/300.
"""

from e2h.glicko2 import (
    Glicko2Config,
    Glicko2Rating,
    PeriodOpponents,
    ancillary,
    rate_problems,
    to_internal,
    update_rating,
    update_volatility,
)
from e2h.data import GameRecord

config = Glicko2Config(tau=0.5)
subject = Glicko2Rating(r=1500.0, rd=200.0, sigma=0.06)
games = [(1400.0, 30.0, 1.0), (1550.0, 100.0, 0.0), (1700.0, 300.0, 0.0)]

print("start:", subject)

mu, phi = to_internal(subject.r, subject.rd)
print(f"internal scale: mu={mu:.4f} phi={phi:.4f}")

opponents = PeriodOpponents.from_display(games, config)
v, delta = ancillary(mu, opponents)
print(f"estimation variance v={v:.4f}, improvement delta={delta:.4f}")

sigma_new = update_volatility(subject.sigma, delta, phi, v, config)
print(f"volatility after solve: {sigma_new:.6f}")

updated = update_rating(subject, opponents, config)
print(f"after the period: r={updated.r:.2f} rd={updated.rd:.2f} "
      f"sigma={updated.sigma:.6f}")

# Same update through the batch API, plus two idle periods: the rating
# freezes while the deviation climbs back up.
records = [GameRecord("prob", r, rd, s, period=0) for r, rd, s in games]
timelines = rate_problems(records, config, n_periods=3,
                          initial={"prob": subject})
print("\ntimeline (deviation grows while idle):")
for period, state in enumerate(timelines["prob"]):
    print(f"  period {period}: r={state.r:8.2f} rd={state.rd:7.2f} "
          f"sigma={state.sigma:.6f}")
