"""Pairwise rank verification of difficulty estimates.

External judges (human voters or score-based raters) designate the harder
item of each pair; the estimator's scores are checked against that ordering.
Reported statistics: matching accuracy (fraction of included pairs ordered
correctly), average per-pair discrepancy delta = |s_h - s_e| when the
estimator gets the order wrong, and Spearman rank correlation.  Uncertainty
comes from a seeded nonparametric bootstrap over pairs.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    AllPairsExcluded,
    InvalidParameter,
    LengthMismatch,
    MalformedRow,
    ZeroVariance,
)
from .standardize import midranks

DEFAULT_SCORE_GAP = 2.0


class VoteOutcome(enum.Enum):
    FIRST = "first"
    SECOND = "second"
    TIE = "tie"


@dataclass(frozen=True)
class Vote:
    """One rater's choice of the harder element of a (first, second) pair."""

    rater_id: str
    choice: str

    def __post_init__(self):
        if self.choice not in ("first", "second"):
            raise InvalidParameter(f"vote choice must be 'first' or 'second', "
                                   f"got {self.choice!r}")


@dataclass(frozen=True)
class PairJudgment:
    """One judged pair: designated harder/easier items plus estimator scores.

    ``item_hard``/``item_easy`` carry the external judge's verdict;
    ``est_hard``/``est_easy`` are the estimator's (score, sd) for those same
    items.  ``judge_scores`` optionally holds per-rater (score_first,
    score_second) values for score-based judges.
    """

    pair_id: str
    item_hard: str
    item_easy: str
    est_hard: tuple[float, float]
    est_easy: tuple[float, float]
    votes: tuple[Vote, ...] = ()
    judge_scores: tuple[tuple[float, float], ...] | None = None


def majority_vote(votes: Iterable[Vote | str]) -> VoteOutcome:
    """Strict majority over binary choices; an even split is a TIE value."""
    first = second = 0
    for v in votes:
        choice = v.choice if isinstance(v, Vote) else v
        if choice == "first":
            first += 1
        elif choice == "second":
            second += 1
        else:
            raise InvalidParameter(f"vote choice must be 'first' or 'second', "
                                   f"got {choice!r}")
    if first + second == 0:
        raise InvalidParameter("majority_vote needs at least one vote")
    if first > second:
        return VoteOutcome.FIRST
    if second > first:
        return VoteOutcome.SECOND
    return VoteOutcome.TIE


def judgment_from_votes(item_first: str, item_second: str,
                        votes: Iterable[Vote | str]) -> tuple[str, str] | None:
    """Resolve (item_hard, item_easy) by majority; None on a tie."""
    outcome = majority_vote(votes)
    if outcome is VoteOutcome.FIRST:
        return item_first, item_second
    if outcome is VoteOutcome.SECOND:
        return item_second, item_first
    return None


def pair_discrepancy(s_h: float, s_e: float) -> float:
    """delta = |s_h - s_e| when the judged-harder item scored lower, else 0."""
    return abs(s_h - s_e) if s_h < s_e else 0.0


@dataclass(frozen=True)
class ExclusionPolicy:
    """Which pairs to drop before computing accuracy.

    rule 'none' keeps everything; 'irt_sd_rule' drops pairs whose score gap
    is below the larger estimator sd; 'score_gap_rule' drops pairs whose
    average judge score difference is at most ``gap``.  Vote ties are always
    dropped (reason 'vote_tie') when votes are present.
    """

    rule: str = "none"
    gap: float = DEFAULT_SCORE_GAP

    def __post_init__(self):
        if self.rule not in ("none", "irt_sd_rule", "score_gap_rule"):
            raise InvalidParameter(
                f"rule must be 'none', 'irt_sd_rule' or 'score_gap_rule', "
                f"got {self.rule!r}")


@dataclass(frozen=True)
class BootstrapConfig:
    n_resamples: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.n_resamples < 1:
            raise InvalidParameter(f"n_resamples must be >= 1, got {self.n_resamples}")


@dataclass(frozen=True)
class MatchingReport:
    """Accuracy and discrepancy statistics with bootstrap uncertainties."""

    matching_accuracy: float
    matching_accuracy_sd: float
    avg_discrepancy: float
    avg_discrepancy_sd: float
    n_included: int
    n_excluded: int
    exclusion_reasons: dict[str, int] = field(default_factory=dict)
    # Exact score ties count as mismatches; documented for output metadata.
    tie_policy: str = "estimated-score ties count as mismatches"


def _exclusion_reason(pair: PairJudgment, policy: ExclusionPolicy) -> str | None:
    if pair.votes and majority_vote(pair.votes) is VoteOutcome.TIE:
        return "vote_tie"
    if policy.rule == "irt_sd_rule":
        gap = abs(pair.est_hard[0] - pair.est_easy[0])
        if gap < max(pair.est_hard[1], pair.est_easy[1]):
            return "irt_sd_rule"
    elif policy.rule == "score_gap_rule":
        if pair.judge_scores is None:
            raise InvalidParameter(
                f"score_gap_rule needs judge_scores on every pair; "
                f"pair {pair.pair_id!r} has none")
        diffs = [sf - ss for sf, ss in pair.judge_scores]
        if abs(sum(diffs) / len(diffs)) <= policy.gap:
            return "score_gap_rule"
    return None


def split_pairs(pairs: Sequence[PairJudgment], policy: ExclusionPolicy
                ) -> tuple[list[PairJudgment], dict[str, int]]:
    """Partition pairs into (included, reason -> excluded count)."""
    included: list[PairJudgment] = []
    reasons: dict[str, int] = {}
    for pair in pairs:
        reason = _exclusion_reason(pair, policy)
        if reason is None:
            included.append(pair)
        else:
            reasons[reason] = reasons.get(reason, 0) + 1
    return included, reasons


def matching_report(pairs: Sequence[PairJudgment],
                    exclusion: ExclusionPolicy = ExclusionPolicy(),
                    bootstrap: BootstrapConfig = BootstrapConfig()) -> MatchingReport:
    """Accuracy and average discrepancy over pairs surviving exclusion.

    Bootstrap sds resample included pairs with replacement; deterministic
    under the bootstrap seed.  Raises AllPairsExcluded when nothing survives.
    """
    included, reasons = split_pairs(pairs, exclusion)
    if not included:
        raise AllPairsExcluded(
            f"all {len(pairs)} pairs excluded ({reasons}); nothing to score")

    correct = np.array([1.0 if p.est_hard[0] > p.est_easy[0] else 0.0
                        for p in included])
    deltas = np.array([pair_discrepancy(p.est_hard[0], p.est_easy[0])
                       for p in included])

    rng = np.random.default_rng(bootstrap.seed)
    n = len(included)
    idx = rng.integers(0, n, size=(bootstrap.n_resamples, n))
    acc_samples = correct[idx].mean(axis=1)
    delta_samples = deltas[idx].mean(axis=1)

    return MatchingReport(
        matching_accuracy=float(correct.mean()),
        matching_accuracy_sd=float(np.std(acc_samples, ddof=1)),
        avg_discrepancy=float(deltas.mean()),
        avg_discrepancy_sd=float(np.std(delta_samples, ddof=1)),
        n_included=n,
        n_excluded=len(pairs) - n,
        exclusion_reasons=reasons,
    )


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """Spearman rank correlation: Pearson correlation of midranks."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise LengthMismatch(f"need equal-length vectors, got {x.shape} and {y.shape}")
    if x.size < 2:
        raise LengthMismatch("spearman needs at least 2 observations")
    rx = midranks(x)
    ry = midranks(y)
    dx = rx - rx.mean()
    dy = ry - ry.mean()
    denom = math.sqrt(float(dx @ dx) * float(dy @ dy))
    if denom == 0:
        raise ZeroVariance("an input is constant in ranks; correlation undefined")
    return float(dx @ dy) / denom


def discrepancy_histogram(pairs: Sequence[PairJudgment], n_bins: int = 20,
                          upper: float = 1.0) -> tuple[list[float], list[int]]:
    """Binned counts of per-pair discrepancies, for downstream plotting."""
    if n_bins < 1:
        raise InvalidParameter(f"n_bins must be >= 1, got {n_bins}")
    deltas = [pair_discrepancy(p.est_hard[0], p.est_easy[0]) for p in pairs]
    counts, edges = np.histogram(deltas, bins=n_bins, range=(0.0, upper))
    return [float(e) for e in edges], [int(c) for c in counts]


# ---------------------------------------------------------------------------
# ingest / report serialization
# ---------------------------------------------------------------------------

def load_pairs_jsonl(text: str) -> list[PairJudgment]:
    """Parse judged pairs from JSONL; schema documented in docs/formats.md."""
    pairs = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as err:
            raise MalformedRow(line_no, f"invalid JSON: {err.msg}") from err
        missing = {"pair_id", "item_hard", "item_easy", "est_hard", "est_easy"} - set(obj)
        if missing:
            raise MalformedRow(line_no, f"missing fields {sorted(missing)}")
        try:
            votes = tuple(Vote(rater_id=str(v["rater_id"]), choice=str(v["choice"]))
                          for v in obj.get("votes", []))
            judge_scores = obj.get("judge_scores")
            if judge_scores is not None:
                judge_scores = tuple((float(s[0]), float(s[1])) for s in judge_scores)
            pairs.append(PairJudgment(
                pair_id=str(obj["pair_id"]),
                item_hard=str(obj["item_hard"]),
                item_easy=str(obj["item_easy"]),
                est_hard=(float(obj["est_hard"]["s"]), float(obj["est_hard"]["sd"])),
                est_easy=(float(obj["est_easy"]["s"]), float(obj["est_easy"]["sd"])),
                votes=votes,
                judge_scores=judge_scores,
            ))
        except (KeyError, TypeError, ValueError, InvalidParameter) as err:
            raise MalformedRow(line_no, f"bad pair row: {err}") from err
    return pairs


def report_to_dict(report: MatchingReport) -> dict:
    return {
        "matching_accuracy": report.matching_accuracy,
        "matching_accuracy_sd": report.matching_accuracy_sd,
        "avg_discrepancy": report.avg_discrepancy,
        "avg_discrepancy_sd": report.avg_discrepancy_sd,
        "n_included": report.n_included,
        "n_excluded": report.n_excluded,
        "exclusion_reasons": dict(sorted(report.exclusion_reasons.items())),
        "tie_policy": report.tie_policy,
    }
