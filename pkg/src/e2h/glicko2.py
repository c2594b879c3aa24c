"""Glicko-2 rating engine with problem-as-player difficulty rating.

Ratings carry three numbers: rating r, rating deviation rd (uncertainty),
and volatility sigma (expected fluctuation).  Updates happen once per
rating period: all games inside a period are folded into one batch update,
and a period with no games only inflates rd.

Difficulty rating treats each problem as a player.  An examinee failing a
problem counts as a win for the problem, so harder problems collect higher
ratings.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

from .data import GameRecord
from .errors import (
    EmptyPeriod,
    InvalidParameter,
    InvalidScore,
    MalformedRow,
    NonBinaryOutcome,
    NonMonotonePeriods,
    NonPositiveRd,
    SolverFailed,
)

# Display-to-internal scale divisor and the conventional starting values.
SCALE = 173.7178
DEFAULT_R = 1500.0
DEFAULT_RD = 350.0
DEFAULT_SIGMA = 0.06
DEFAULT_TAU = 0.5
DEFAULT_EPSILON = 1e-6

_MAX_BRACKET_STEPS = 100
_EXP_CLIP = 700.0


@dataclass(frozen=True)
class Glicko2Rating:
    """Display-scale rating state: rating, deviation, volatility."""

    r: float
    rd: float
    sigma: float

    def __post_init__(self):
        if self.rd <= 0:
            raise NonPositiveRd(self.rd)
        # sigma = 0 is a legal frozen-volatility state; idle updates keep it.
        if self.sigma < 0:
            raise InvalidParameter(f"sigma must be non-negative, got {self.sigma}")


@dataclass(frozen=True)
class Glicko2Config:
    """Engine constants: volatility constraint tau, defaults, solver epsilon."""

    tau: float = DEFAULT_TAU
    default_r: float = DEFAULT_R
    default_rd: float = DEFAULT_RD
    default_sigma: float = DEFAULT_SIGMA
    epsilon: float = DEFAULT_EPSILON
    scale: float = SCALE

    def __post_init__(self):
        if not 0 < self.tau <= 1.2:
            raise InvalidParameter(f"tau must be in (0, 1.2], got {self.tau}")
        if self.epsilon <= 0:
            raise InvalidParameter(f"epsilon must be positive, got {self.epsilon}")
        if self.default_rd <= 0 or self.default_sigma <= 0 or self.scale <= 0:
            raise InvalidParameter("default_rd, default_sigma and scale must be positive")

    def default_rating(self) -> Glicko2Rating:
        return Glicko2Rating(self.default_r, self.default_rd, self.default_sigma)


@dataclass(frozen=True)
class PeriodOpponents:
    """Internal-scale opponents met in one rating period: (mu_j, phi_j, s_j)."""

    opponents: tuple[tuple[float, float, float], ...]

    def __post_init__(self):
        for mu_j, phi_j, s_j in self.opponents:
            if phi_j < 0:
                raise InvalidParameter(f"opponent phi must be non-negative, got {phi_j}")
            if s_j not in (0.0, 0.5, 1.0):
                raise InvalidScore(s_j)

    def __len__(self) -> int:
        return len(self.opponents)

    @classmethod
    def from_display(cls, games: Iterable[tuple[float, float, float]],
                     config: Glicko2Config) -> "PeriodOpponents":
        """Build from display-scale (r_j, rd_j, s_j) triples."""
        return cls(tuple(
            (*to_internal(r_j, rd_j, config), float(s_j)) for r_j, rd_j, s_j in games
        ))


def to_internal(r: float, rd: float, config: Glicko2Config = Glicko2Config()) -> tuple[float, float]:
    """Convert a display-scale (r, rd) pair to the internal (mu, phi) scale."""
    if rd <= 0:
        raise NonPositiveRd(rd)
    return (r - config.default_r) / config.scale, rd / config.scale


def to_display(mu: float, phi: float, config: Glicko2Config = Glicko2Config()) -> tuple[float, float]:
    """Inverse of :func:`to_internal`."""
    return config.default_r + config.scale * mu, config.scale * phi


def g(phi: float) -> float:
    """Deviation damping factor 1/sqrt(1 + 3 phi^2 / pi^2); g(0) = 1."""
    return 1.0 / math.sqrt(1.0 + 3.0 * phi * phi / (math.pi * math.pi))


def expected_score(mu: float, mu_j: float, phi_j: float) -> float:
    """Win probability of mu against an opponent (mu_j, phi_j)."""
    z = -g(phi_j) * (mu - mu_j)
    return 1.0 / (1.0 + math.exp(min(max(z, -_EXP_CLIP), _EXP_CLIP)))


def ancillary(mu: float, opponents: PeriodOpponents) -> tuple[float, float]:
    """Estimated variance v and improvement sum Delta for one period."""
    if len(opponents) == 0:
        raise EmptyPeriod("an update requires at least one game in the period")
    inv_v = 0.0
    drift = 0.0
    for mu_j, phi_j, s_j in opponents.opponents:
        gj = g(phi_j)
        e = expected_score(mu, mu_j, phi_j)
        inv_v += gj * gj * e * (1.0 - e)
        drift += gj * (s_j - e)
    v = 1.0 / inv_v
    return v, v * drift


def _volatility_objective(x: float, delta2: float, phi2: float, v: float,
                          a: float, tau: float) -> float:
    ex = math.exp(min(x, _EXP_CLIP))
    denom = phi2 + v + ex
    return ex * (delta2 - phi2 - v - ex) / (2.0 * denom * denom) - (x - a) / (tau * tau)


def update_volatility(sigma: float, delta: float, phi: float, v: float,
                      config: Glicko2Config = Glicko2Config()) -> float:
    """Solve for the new volatility by Illinois-damped regula falsi.

    The root of f(x) is found on x = ln(sigma'^2); the bracket starts at
    ln(sigma^2) and is expanded downward in tau-sized steps when needed.
    """
    if sigma <= 0:
        raise InvalidParameter(
            f"volatility update needs sigma > 0, got {sigma}")
    a = math.log(sigma * sigma)
    delta2, phi2, tau = delta * delta, phi * phi, config.tau
    f = lambda x: _volatility_objective(x, delta2, phi2, v, a, tau)

    big_a = a
    if delta2 > phi2 + v:
        big_b = math.log(delta2 - phi2 - v)
    else:
        k = 1
        while f(a - k * tau) < 0:
            k += 1
            if k > _MAX_BRACKET_STEPS:
                raise SolverFailed(
                    "volatility bracket not found within "
                    f"{_MAX_BRACKET_STEPS} expansion steps")
        big_b = a - k * tau

    f_a, f_b = f(big_a), f(big_b)
    # Illinois: halve the retained endpoint's value when the new point
    # falls on the same side, guaranteeing both endpoints move.
    for _ in range(1000):
        if abs(big_b - big_a) <= config.epsilon and abs(f_a) <= config.epsilon:
            break
        big_c = big_a + (big_a - big_b) * f_a / (f_b - f_a)
        f_c = f(big_c)
        if f_c * f_b <= 0:
            big_a, f_a = big_b, f_b
        else:
            f_a /= 2.0
        big_b, f_b = big_c, f_c
        if f_a == f_b == 0.0:
            break
    if abs(f_a) > abs(f_b):
        big_a, f_a = big_b, f_b
    return math.exp(big_a / 2.0)


def update_rating(rating: Glicko2Rating, opponents: PeriodOpponents,
                  config: Glicko2Config = Glicko2Config()) -> Glicko2Rating:
    """One full rating-period update against a non-empty opponent batch."""
    mu, phi = to_internal(rating.r, rating.rd, config)
    v, delta = ancillary(mu, opponents)
    sigma_new = update_volatility(rating.sigma, delta, phi, v, config)
    phi_star = math.sqrt(phi * phi + sigma_new * sigma_new)
    phi_new = 1.0 / math.sqrt(1.0 / (phi_star * phi_star) + 1.0 / v)
    drift = sum(g(phi_j) * (s_j - expected_score(mu, mu_j, phi_j))
                for mu_j, phi_j, s_j in opponents.opponents)
    mu_new = mu + phi_new * phi_new * drift
    r_new, rd_new = to_display(mu_new, phi_new, config)
    return Glicko2Rating(r=r_new, rd=rd_new, sigma=sigma_new)


def idle_period(rating: Glicko2Rating,
                config: Glicko2Config = Glicko2Config()) -> Glicko2Rating:
    """Pass one rating period without games: rd inflates, r and sigma hold."""
    _, phi = to_internal(rating.r, rating.rd, config)
    phi_new = math.sqrt(phi * phi + rating.sigma * rating.sigma)
    return Glicko2Rating(r=rating.r, rd=phi_new * config.scale, sigma=rating.sigma)


# ---------------------------------------------------------------------------
# problem-as-player rating
# ---------------------------------------------------------------------------

def examinee_outcome_to_problem_score(outcome: int) -> float:
    """Map a binary examinee outcome to the problem's game score.

    The examinee solving the problem (outcome 1) is a loss for the problem;
    a failed attempt (outcome 0) is a win.  Partial credit is unsupported.
    """
    if outcome == 1:
        return 0.0
    if outcome == 0:
        return 1.0
    raise NonBinaryOutcome(outcome)


def rate_problems(
    records: Sequence[GameRecord],
    config: Glicko2Config = Glicko2Config(),
    outcome_mapping: Callable[[float], float] | None = None,
    initial: Mapping[str, Glicko2Rating] | None = None,
    n_periods: int | None = None,
) -> dict[str, tuple[Glicko2Rating, ...]]:
    """Rate every problem across the global sequence of rating periods.

    Each record is one attempt from the problem's perspective.  Records for
    one problem within one period form a single update batch; periods where
    a problem saw no attempts apply :func:`idle_period`.  Timelines share a
    common period axis 0..T-1, where T covers the largest period seen (or
    ``n_periods`` if larger), so entry t is the state after period t.

    ``outcome_mapping`` post-processes each record's score (default:
    identity, scores already problem-perspective).  ``initial`` supplies
    starting ratings per problem; unknown problems start at the defaults.
    Problems appearing only in ``initial`` still receive idle updates.
    """
    mapping = outcome_mapping if outcome_mapping is not None else lambda s: s
    by_problem: dict[str, dict[int, list[GameRecord]]] = {}
    last_period: dict[str, int] = {}
    max_period = -1
    for rec in records:
        if rec.subject_id in last_period and rec.period < last_period[rec.subject_id]:
            raise NonMonotonePeriods(rec.subject_id)
        last_period[rec.subject_id] = rec.period
        by_problem.setdefault(rec.subject_id, {}).setdefault(rec.period, []).append(rec)
        max_period = max(max_period, rec.period)

    problem_ids = set(by_problem)
    if initial:
        problem_ids |= set(initial)
    total = max(max_period + 1, n_periods or 0)

    timelines: dict[str, tuple[Glicko2Rating, ...]] = {}
    for pid in sorted(problem_ids):
        state = (initial or {}).get(pid, config.default_rating())
        steps: list[Glicko2Rating] = []
        for period in range(total):
            batch = by_problem.get(pid, {}).get(period)
            if batch:
                opponents = PeriodOpponents.from_display(
                    ((b.opponent_rating, b.opponent_rd, mapping(b.score)) for b in batch),
                    config)
                state = update_rating(state, opponents, config)
            else:
                state = idle_period(state, config)
            steps.append(state)
        timelines[pid] = tuple(steps)
    return timelines


# ---------------------------------------------------------------------------
# timeline serialization
# ---------------------------------------------------------------------------

def timelines_to_jsonl(timelines: Mapping[str, Sequence[Glicko2Rating]]) -> str:
    """One JSON object per (problem, period), sorted for stable output."""
    lines = []
    for pid in sorted(timelines):
        for period, state in enumerate(timelines[pid]):
            lines.append(json.dumps(
                {"problem_id": pid, "period": period,
                 "r": state.r, "rd": state.rd, "sigma": state.sigma},
                sort_keys=True))
    return "\n".join(lines) + ("\n" if lines else "")


def timelines_to_csv(timelines: Mapping[str, Sequence[Glicko2Rating]]) -> str:
    """CSV mirror of the JSONL timeline columns."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["problem_id", "period", "r", "rd", "sigma"])
    for pid in sorted(timelines):
        for period, state in enumerate(timelines[pid]):
            writer.writerow([pid, period,
                             repr(state.r), repr(state.rd), repr(state.sigma)])
    return out.getvalue()


def load_timelines_jsonl(text: str) -> dict[str, tuple[Glicko2Rating, ...]]:
    """Parse a JSONL timeline back into per-problem rating sequences."""
    staged: dict[str, dict[int, Glicko2Rating]] = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as err:
            raise MalformedRow(line_no, f"invalid JSON: {err.msg}") from err
        missing = {"problem_id", "period", "r", "rd", "sigma"} - set(obj)
        if missing:
            raise MalformedRow(line_no, f"missing fields {sorted(missing)}")
        staged.setdefault(str(obj["problem_id"]), {})[int(obj["period"])] = Glicko2Rating(
            r=float(obj["r"]), rd=float(obj["rd"]), sigma=float(obj["sigma"]))
    out: dict[str, tuple[Glicko2Rating, ...]] = {}
    for pid, by_period in staged.items():
        periods = sorted(by_period)
        if periods != list(range(len(periods))):
            raise MalformedRow(0, f"problem {pid!r} has gaps in its period sequence")
        out[pid] = tuple(by_period[t] for t in periods)
    return out
