"""Difficulty estimation from aggregated success percentages.

When only per-item success rates are known (no individual response rows),
the expected success probability under a normal examinee-ability law

    p(b) = integral of irf(theta; b, c) over theta ~ Normal(mean, sd)

links the observed proportion to the item difficulty b.  The integral is a
Gauss-Hermite quadrature; inversion is a bisection on the strictly
decreasing map b -> p(b); the uncertainty comes from the binomial delta
method sd(p) / |dp/db|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
from numpy.polynomial.hermite import hermgauss

from ..data import ItemDifficultySummary
from ..errors import InvalidParameter, ProportionAtAsymptote
from .model import sigmoid

_MIN_ORDER = 8
_P_MARGIN = 1e-12


@dataclass(frozen=True)
class NormalAbility:
    """Normal ability law of the examinee population behind a proportion."""

    mean: float = 0.0
    sd: float = 1.0

    def __post_init__(self):
        if self.sd <= 0:
            raise InvalidParameter(f"ability sd must be positive, got {self.sd}")


@dataclass(frozen=True)
class MarginalEstimate:
    """Inverted difficulty for one item with its delta-method uncertainty."""

    item_id: str
    b: float
    b_sd: float


@dataclass(frozen=True)
class MarginalFit:
    """Estimates plus the items excluded for sitting at an asymptote."""

    estimates: tuple[MarginalEstimate, ...]
    excluded: tuple[tuple[str, str], ...] = ()

    def __iter__(self):
        return iter(self.estimates)

    def __len__(self):
        return len(self.estimates)


def _nodes(ability: NormalAbility, order: int) -> tuple[np.ndarray, np.ndarray]:
    if order < _MIN_ORDER:
        raise InvalidParameter(f"quadrature order must be >= {_MIN_ORDER}, got {order}")
    x, w = hermgauss(order)
    theta = ability.mean + math.sqrt(2.0) * ability.sd * x
    return theta, w / math.sqrt(math.pi)


def marginal_prob(b: float, c: float, ability: NormalAbility = NormalAbility(),
                  quadrature_order: int = 64) -> float:
    """Population success probability of an item under the guessing model."""
    if not 0.0 <= c < 1.0:
        raise InvalidParameter(f"guessing rate c must be in [0, 1), got {c}")
    theta, w = _nodes(ability, quadrature_order)
    return float(np.dot(w, c + (1.0 - c) * sigmoid(theta - b)))


def marginal_prob_derivative(b: float, c: float,
                             ability: NormalAbility = NormalAbility(),
                             quadrature_order: int = 64) -> float:
    """d marginal_prob / d b, always negative."""
    theta, w = _nodes(ability, quadrature_order)
    lo = sigmoid(theta - b)
    return float(np.dot(w, -(1.0 - c) * lo * (1.0 - lo)))


def invert_difficulty(p: float, c: float = 0.0,
                      ability: NormalAbility = NormalAbility(),
                      tol: float = 1e-9, quadrature_order: int = 64,
                      item_id: str = "") -> float:
    """Solve marginal_prob(b) = p for b by bisection.

    Raises ProportionAtAsymptote when p cannot be reached: at or below the
    guessing floor c, or at or above 1.
    """
    if p <= c + _P_MARGIN or p >= 1.0 - _P_MARGIN:
        raise ProportionAtAsymptote(item_id, p, c)

    # The map is strictly decreasing, so expand until the target is bracketed.
    width = 10.0 * max(ability.sd, 1.0)
    lo, hi = ability.mean - width, ability.mean + width
    while marginal_prob(lo, c, ability, quadrature_order) < p:
        lo -= width
        if lo < ability.mean - 1e6:
            raise ProportionAtAsymptote(item_id, p, c)
    while marginal_prob(hi, c, ability, quadrature_order) > p:
        hi += width
        if hi > ability.mean + 1e6:
            raise ProportionAtAsymptote(item_id, p, c)

    for _ in range(200):
        mid = 0.5 * (lo + hi)
        val = marginal_prob(mid, c, ability, quadrature_order)
        if abs(val - p) <= tol or (hi - lo) < 1e-14:
            return mid
        if val > p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def fit_from_item_difficulties(
    summaries: Iterable[ItemDifficultySummary],
    c: float | None = None,
    ability: NormalAbility = NormalAbility(),
    tol: float = 1e-9,
    quadrature_order: int = 64,
    n_choices: int | None = None,
    group_abilities: Mapping[str, NormalAbility] | None = None,
) -> MarginalFit:
    """Invert every summary's success rate into a difficulty estimate.

    The guessing rate defaults to 1/n_choices when a choice count is given,
    else 0.  Items whose rate sits at or beyond an asymptote are excluded
    and reported in ``excluded`` with a diagnostic instead of being clamped.
    Per-group ability laws override the default via ``group_abilities``
    keyed by the summary's group_tag.
    """
    if c is None:
        if n_choices is not None:
            if n_choices < 2:
                raise InvalidParameter(f"n_choices must be >= 2, got {n_choices}")
            c = 1.0 / n_choices
        else:
            c = 0.0

    estimates: list[MarginalEstimate] = []
    excluded: list[tuple[str, str]] = []
    for item in summaries:
        law = ability
        if group_abilities and item.group_tag is not None:
            law = group_abilities.get(item.group_tag, ability)
        try:
            b_hat = invert_difficulty(item.p_correct, c, law, tol,
                                      quadrature_order, item_id=item.item_id)
        except ProportionAtAsymptote as err:
            excluded.append((item.item_id, str(err)))
            continue
        slope = marginal_prob_derivative(b_hat, c, law, quadrature_order)
        p_sd = math.sqrt(item.p_correct * (1.0 - item.p_correct) / item.n_attempts)
        b_sd = p_sd / abs(slope) if slope != 0 else float("inf")
        estimates.append(MarginalEstimate(item_id=item.item_id, b=b_hat, b_sd=b_sd))
    return MarginalFit(estimates=tuple(estimates), excluded=tuple(excluded))
