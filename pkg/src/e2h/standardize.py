"""Unified [0,1] difficulty scores, quantiles, and difficulty bins.

Raw difficulty estimates arrive on whatever scale the estimator used
(logit-scale b values, display-scale ratings).  Normalization maps them to
[0,1] two ways:

* ``minmax_clipped`` (default): affine map of the [p_lo, p_hi] percentile
  window onto [0,1], values outside clipped to the boundary.  Doubles as
  outlier removal.
* ``quantile``: midrank empirical CDF value (rank - 0.5)/n.

Both attach the midrank quantile and propagate the raw uncertainty: through
the affine slope for minmax, through a kernel density estimate of the local
CDF slope for quantiles (approximate, flagged in metadata).
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DegenerateRange,
    InvalidParameter,
    MalformedRow,
    TooFewItems,
    UnknownItem,
)

DEFAULT_P_LO = 1.0
DEFAULT_P_HI = 99.0
SCORES_SCHEMA = "difficulty-scores/1"


@dataclass(frozen=True)
class RawScore:
    """Estimator output for one item before standardization."""

    item_id: str
    raw: float
    raw_sd: float = 0.0

    def __post_init__(self):
        if self.raw_sd < 0:
            raise InvalidParameter(f"raw_sd must be non-negative, got {self.raw_sd}")


@dataclass(frozen=True)
class DifficultyScore:
    """Standardized difficulty: raw value, [0,1] score, quantile, uncertainties."""

    item_id: str
    raw: float
    raw_sd: float
    normalized: float
    normalized_sd: float
    quantile: float

    def __post_init__(self):
        if not 0.0 <= self.normalized <= 1.0:
            raise InvalidParameter(f"normalized must be in [0,1], got {self.normalized}")
        if not 0.0 <= self.quantile <= 1.0:
            raise InvalidParameter(f"quantile must be in [0,1], got {self.quantile}")
        if self.raw_sd < 0 or self.normalized_sd < 0:
            raise InvalidParameter("sd fields must be non-negative")


def midranks(values: Sequence[float]) -> np.ndarray:
    """Average rank (1-based) per entry, ties sharing their mean rank."""
    arr = np.asarray(values, dtype=float)
    order = np.argsort(arr, kind="stable")
    ranks = np.empty(arr.size, dtype=float)
    i = 0
    while i < arr.size:
        j = i
        while j + 1 < arr.size and arr[order[j + 1]] == arr[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def _silverman_bandwidth(values: np.ndarray) -> float:
    n = values.size
    sd = float(np.std(values, ddof=1)) if n > 1 else 0.0
    q75, q25 = np.percentile(values, [75, 25])
    iqr = float(q75 - q25)
    spread = min(sd, iqr / 1.34) if iqr > 0 else sd
    if spread <= 0:
        spread = sd if sd > 0 else 1.0
    return 0.9 * spread * n ** (-0.2)


def _kde_density(values: np.ndarray) -> np.ndarray:
    """Gaussian kernel density of the raw values, evaluated at each value."""
    h = _silverman_bandwidth(values)
    z = (values[:, None] - values[None, :]) / h
    return np.exp(-0.5 * z * z).sum(axis=1) / (values.size * h * math.sqrt(2 * math.pi))


def normalize(scores: Iterable[RawScore], method: str = "minmax_clipped",
              p_lo: float = DEFAULT_P_LO, p_hi: float = DEFAULT_P_HI
              ) -> list[DifficultyScore]:
    """Standardize raw difficulty estimates to [0,1] with quantiles.

    Requires at least two distinct raw values; a flat input raises
    DegenerateRange.  See the module docstring for the two methods.
    """
    items = list(scores)
    raw = np.array([s.raw for s in items], dtype=float)
    raw_sd = np.array([s.raw_sd for s in items], dtype=float)
    if raw.size < 2 or np.all(raw == raw[0]):
        raise DegenerateRange("normalization needs at least 2 distinct raw values")
    quantiles = (midranks(raw) - 0.5) / raw.size

    if method == "minmax_clipped":
        if not 0 <= p_lo < p_hi <= 100:
            raise InvalidParameter(f"need 0 <= p_lo < p_hi <= 100, got ({p_lo}, {p_hi})")
        lo, hi = np.percentile(raw, [p_lo, p_hi])
        if hi <= lo:
            raise DegenerateRange(
                f"clip percentiles coincide (p{p_lo}=p{p_hi}={lo}); range is degenerate")
        slope = 1.0 / (hi - lo)
        normalized = np.clip((raw - lo) * slope, 0.0, 1.0)
        normalized_sd = raw_sd * slope
    elif method == "quantile":
        normalized = quantiles
        normalized_sd = raw_sd * _kde_density(raw)
    else:
        raise InvalidParameter(
            f"method must be 'minmax_clipped' or 'quantile', got {method!r}")

    return [
        DifficultyScore(item_id=s.item_id, raw=float(raw[i]), raw_sd=float(raw_sd[i]),
                        normalized=float(normalized[i]),
                        normalized_sd=float(normalized_sd[i]),
                        quantile=float(quantiles[i]))
        for i, s in enumerate(items)
    ]


def quantile_of(scores: Sequence[DifficultyScore], item_id: str) -> float:
    """Midrank empirical-CDF value of one item among the given scores."""
    ids = [s.item_id for s in scores]
    if item_id not in ids:
        raise UnknownItem(item_id)
    ranks = midranks([s.raw for s in scores])
    return float((ranks[ids.index(item_id)] - 0.5) / len(scores))


# ---------------------------------------------------------------------------
# difficulty bins
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Bin:
    """One training bin: its items and their mean normalized difficulty."""

    kind: str
    index: int
    center: float
    item_ids: tuple[str, ...]


@dataclass(frozen=True)
class DifficultyBins:
    """Graded (contiguous difficulty runs) and random baseline bins."""

    graded: tuple[Bin, ...]
    random: tuple[Bin, ...]
    bin_size: int


def make_bins(scores: Sequence[DifficultyScore], a: int, b: int,
              seed: int = 0) -> DifficultyBins:
    """Split items into a graded difficulty bins plus b random baseline bins.

    bin_size = floor(n / (a+b)).  Graded bins are the a equal contiguous runs
    of the difficulty-sorted first a*bin_size items, lowest difficulty first;
    leftover hardest items are excluded.  Each random bin is an independent
    uniform sample of bin_size items without replacement from all items.
    Deterministic for a fixed seed.
    """
    if a < 1 or b < 0:
        raise InvalidParameter(f"need a >= 1 and b >= 0, got a={a}, b={b}")
    n = len(scores)
    if n < a + b:
        raise TooFewItems(f"need at least a+b={a + b} items, got {n}")
    bin_size = n // (a + b)

    by_difficulty = sorted(scores, key=lambda s: (s.normalized, s.item_id))
    graded = []
    for j in range(a):
        chunk = by_difficulty[j * bin_size:(j + 1) * bin_size]
        graded.append(Bin(
            kind="graded", index=j,
            center=float(np.mean([s.normalized for s in chunk])),
            item_ids=tuple(s.item_id for s in chunk)))

    rng = np.random.default_rng(seed)
    random_bins = []
    for j in range(b):
        picks = rng.choice(n, size=bin_size, replace=False)
        chunk = [scores[int(i)] for i in picks]
        random_bins.append(Bin(
            kind="random", index=j,
            center=float(np.mean([s.normalized for s in chunk])),
            item_ids=tuple(s.item_id for s in chunk)))
    return DifficultyBins(graded=tuple(graded), random=tuple(random_bins),
                          bin_size=bin_size)


# ---------------------------------------------------------------------------
# score serialization
# ---------------------------------------------------------------------------

_SCORE_FIELDS = ("item_id", "raw", "raw_sd", "normalized", "normalized_sd", "quantile")


def scores_to_csv(scores: Sequence[DifficultyScore]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(_SCORE_FIELDS)
    for s in scores:
        writer.writerow([s.item_id, repr(s.raw), repr(s.raw_sd), repr(s.normalized),
                         repr(s.normalized_sd), repr(s.quantile)])
    return out.getvalue()


def scores_to_json(scores: Sequence[DifficultyScore]) -> str:
    payload = {
        "schema": SCORES_SCHEMA,
        "scores": [
            {"item_id": s.item_id, "raw": s.raw, "raw_sd": s.raw_sd,
             "normalized": s.normalized, "normalized_sd": s.normalized_sd,
             "quantile": s.quantile}
            for s in scores
        ],
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _score_from_mapping(row: dict, line_no: int) -> DifficultyScore:
    try:
        return DifficultyScore(
            item_id=str(row["item_id"]),
            raw=float(row["raw"]), raw_sd=float(row["raw_sd"]),
            normalized=float(row["normalized"]),
            normalized_sd=float(row["normalized_sd"]),
            quantile=float(row["quantile"]))
    except (KeyError, TypeError, ValueError) as err:
        raise MalformedRow(line_no, f"bad score row: {err}") from err


def load_scores_csv(text: str) -> list[DifficultyScore]:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None or set(_SCORE_FIELDS) - set(reader.fieldnames):
        raise MalformedRow(1, f"score CSV needs header fields {_SCORE_FIELDS}")
    return [_score_from_mapping(row, line_no)
            for line_no, row in enumerate(reader, start=2)]


def load_scores_json(text: str) -> list[DifficultyScore]:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as err:
        raise MalformedRow(0, f"invalid JSON: {err.msg}") from err
    if not isinstance(payload, dict) or "scores" not in payload:
        raise MalformedRow(0, "score JSON must be an object with a 'scores' array")
    return [_score_from_mapping(row, i) for i, row in enumerate(payload["scores"])]
