"""Input records for the three performance-data shapes, with loaders.

Three kinds of raw evidence feed the difficulty estimators:

* binary examinee-by-item outcomes  -> :class:`ResponseMatrix` (IRT input),
* aggregated per-item success rates -> :class:`ItemDifficultySummary`
  (marginal IRT input),
* per-attempt game records against rated opponents -> :class:`GameRecord`
  (rating-engine input).

Loaders are pure functions of their input stream: they either return fully
validated, immutable values or raise a structured error.  File formats are
documented in docs/formats.md.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Iterator

from .errors import (
    DuplicateResponse,
    InvalidScore,
    MalformedRow,
    NonBinaryOutcome,
    NonPositiveCount,
    NonPositiveRd,
    OutOfRangeProportion,
)

VALID_GAME_SCORES = (0.0, 0.5, 1.0)


@dataclass(frozen=True)
class ResponseRecord:
    """One binary outcome of an examinee attempting an item."""

    examinee_id: str
    item_id: str
    outcome: int
    period: int = 0

    def __post_init__(self):
        if self.outcome not in (0, 1):
            raise NonBinaryOutcome(self.outcome)


@dataclass(frozen=True)
class ResponseMatrix:
    """Validated sparse examinee-by-item outcome set with dense id maps."""

    records: tuple[ResponseRecord, ...]
    examinee_index: dict[str, int]
    item_index: dict[str, int]

    @property
    def n_examinees(self) -> int:
        return len(self.examinee_index)

    @property
    def n_items(self) -> int:
        return len(self.item_index)

    @property
    def examinee_ids(self) -> tuple[str, ...]:
        return tuple(self.examinee_index)

    @property
    def item_ids(self) -> tuple[str, ...]:
        return tuple(self.item_index)

    @classmethod
    def from_records(cls, records: Iterable[ResponseRecord]) -> "ResponseMatrix":
        """Build the dense id maps and reject duplicate (examinee, item, period) keys."""
        recs = tuple(records)
        seen: set[tuple[str, str, int]] = set()
        examinee_index: dict[str, int] = {}
        item_index: dict[str, int] = {}
        for rec in recs:
            if rec.outcome not in (0, 1):
                raise NonBinaryOutcome(rec.outcome)
            key = (rec.examinee_id, rec.item_id, rec.period)
            if key in seen:
                raise DuplicateResponse(key)
            seen.add(key)
            if rec.examinee_id not in examinee_index:
                examinee_index[rec.examinee_id] = len(examinee_index)
            if rec.item_id not in item_index:
                item_index[rec.item_id] = len(item_index)
        return cls(records=recs, examinee_index=examinee_index, item_index=item_index)


@dataclass(frozen=True)
class ItemDifficultySummary:
    """Aggregated success rate for one item (e.g. a contest problem)."""

    item_id: str
    p_correct: float
    n_attempts: int
    group_tag: str | None = None

    def __post_init__(self):
        if not 0.0 <= self.p_correct <= 1.0:
            raise OutOfRangeProportion(self.p_correct)
        if self.n_attempts < 1:
            raise NonPositiveCount(self.n_attempts)


@dataclass(frozen=True)
class GameRecord:
    """One rated game from the subject's perspective.

    ``score`` is the subject's result: 1 win, 0.5 draw, 0 loss.  Opponent
    rating and deviation are on the display scale.
    """

    subject_id: str
    opponent_rating: float
    opponent_rd: float
    score: float
    period: int = 0

    def __post_init__(self):
        if self.score not in VALID_GAME_SCORES:
            raise InvalidScore(self.score)
        if self.opponent_rd <= 0:
            raise NonPositiveRd(self.opponent_rd)


# ---------------------------------------------------------------------------
# stream plumbing
# ---------------------------------------------------------------------------

def _text_lines(source: str | Path | bytes | IO) -> Iterator[str]:
    """Yield decoded text lines from a path, bytes, str payload or file object."""
    if isinstance(source, Path):
        text = source.read_text(encoding="utf-8")
    elif isinstance(source, bytes):
        text = source.decode("utf-8")
    elif isinstance(source, str):
        # A short string that names an existing file is treated as a path;
        # anything else is raw CSV/JSONL content.
        p = Path(source)
        if "\n" not in source and p.is_file():
            text = p.read_text(encoding="utf-8")
        else:
            text = source
    else:
        raw = source.read()
        text = raw.decode("utf-8") if isinstance(raw, bytes) else raw
    return iter(io.StringIO(text))


def _iter_rows(source, fmt: str, fields: tuple[str, ...],
               optional: tuple[str, ...] = ()) -> Iterator[tuple[int, dict]]:
    """Yield (line_no, row dict) pairs, validating presence of required fields."""
    if fmt not in ("csv", "jsonl"):
        raise ValueError(f"format must be 'csv' or 'jsonl', got {fmt!r}")
    lines = _text_lines(source)
    if fmt == "csv":
        reader = csv.DictReader(lines)
        if reader.fieldnames is None:
            return
        missing = set(fields) - set(reader.fieldnames)
        if missing:
            raise MalformedRow(1, f"header missing fields {sorted(missing)}")
        for line_no, row in enumerate(reader, start=2):
            if None in row or any(v is None for v in row.values()):
                raise MalformedRow(line_no, "wrong number of columns")
            yield line_no, row
    else:
        for line_no, line in enumerate(lines, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as err:
                raise MalformedRow(line_no, f"invalid JSON: {err.msg}") from err
            if not isinstance(obj, dict):
                raise MalformedRow(line_no, "expected a JSON object")
            missing = set(fields) - set(obj)
            if missing:
                raise MalformedRow(line_no, f"missing fields {sorted(missing)}")
            yield line_no, obj


def _parse_float(value, line_no: int, name: str) -> float:
    try:
        return float(value)
    except (TypeError, ValueError):
        raise MalformedRow(line_no, f"field {name!r} is not a number: {value!r}")


def _parse_int(value, line_no: int, name: str) -> int:
    try:
        out = int(str(value))
    except (TypeError, ValueError):
        raise MalformedRow(line_no, f"field {name!r} is not an integer: {value!r}")
    return out


def _parse_period(row: dict, line_no: int) -> int:
    raw = row.get("period")
    if raw is None or raw == "":
        return 0
    period = _parse_int(raw, line_no, "period")
    if period < 0:
        raise MalformedRow(line_no, f"period must be non-negative, got {period}")
    return period


# ---------------------------------------------------------------------------
# loaders
# ---------------------------------------------------------------------------

def load_responses(source, fmt: str = "csv") -> ResponseMatrix:
    """Load binary examinee-by-item outcomes into a validated matrix.

    Required fields: examinee_id, item_id, outcome; optional: period
    (defaults to 0).  Duplicate (examinee, item, period) triples raise
    DuplicateResponse; any outcome other than 0/1 raises NonBinaryOutcome.
    """
    records = []
    for line_no, row in _iter_rows(source, fmt, ("examinee_id", "item_id", "outcome")):
        raw_outcome = row["outcome"]
        if isinstance(raw_outcome, bool) or raw_outcome in (0, 1):
            outcome = int(raw_outcome)
        elif isinstance(raw_outcome, str) and raw_outcome.strip() in ("0", "1"):
            outcome = int(raw_outcome)
        else:
            raise NonBinaryOutcome(raw_outcome)
        records.append(ResponseRecord(
            examinee_id=str(row["examinee_id"]),
            item_id=str(row["item_id"]),
            outcome=outcome,
            period=_parse_period(row, line_no),
        ))
    return ResponseMatrix.from_records(records)


def load_item_difficulties(source, fmt: str = "csv") -> list[ItemDifficultySummary]:
    """Load aggregated per-item success proportions.

    Required fields: item_id, p_correct, n_attempts; optional: group_tag.
    """
    summaries = []
    for line_no, row in _iter_rows(source, fmt, ("item_id", "p_correct", "n_attempts")):
        p = _parse_float(row["p_correct"], line_no, "p_correct")
        if not 0.0 <= p <= 1.0:
            raise OutOfRangeProportion(p)
        n = _parse_int(row["n_attempts"], line_no, "n_attempts")
        if n < 1:
            raise NonPositiveCount(n)
        tag = row.get("group_tag")
        summaries.append(ItemDifficultySummary(
            item_id=str(row["item_id"]),
            p_correct=p,
            n_attempts=n,
            group_tag=str(tag) if tag not in (None, "") else None,
        ))
    return summaries


def load_game_records(source, fmt: str = "csv") -> list[GameRecord]:
    """Load per-attempt game records, sorted by (subject_id, period).

    Required fields: subject_id, opponent_rating, opponent_rd, score, period.
    Scores outside {0, 0.5, 1} raise InvalidScore; opponent_rd must be
    positive.
    """
    records = []
    for line_no, row in _iter_rows(
            source, fmt, ("subject_id", "opponent_rating", "opponent_rd", "score")):
        score = _parse_float(row["score"], line_no, "score")
        if score not in VALID_GAME_SCORES:
            raise InvalidScore(score)
        rd = _parse_float(row["opponent_rd"], line_no, "opponent_rd")
        if rd <= 0:
            raise NonPositiveRd(rd)
        records.append(GameRecord(
            subject_id=str(row["subject_id"]),
            opponent_rating=_parse_float(row["opponent_rating"], line_no, "opponent_rating"),
            opponent_rd=rd,
            score=score,
            period=_parse_period(row, line_no),
        ))
    records.sort(key=lambda r: (r.subject_id, r.period))
    return records


# ---------------------------------------------------------------------------
# serialization (round-trip partners of the loaders)
# ---------------------------------------------------------------------------

def dump_responses(matrix: ResponseMatrix, fmt: str = "csv") -> str:
    """Serialize a validated matrix back to CSV or JSONL text."""
    if fmt == "csv":
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["examinee_id", "item_id", "outcome", "period"])
        for rec in matrix.records:
            writer.writerow([rec.examinee_id, rec.item_id, rec.outcome, rec.period])
        return out.getvalue()
    if fmt == "jsonl":
        lines = [
            json.dumps({"examinee_id": r.examinee_id, "item_id": r.item_id,
                        "outcome": r.outcome, "period": r.period}, sort_keys=True)
            for r in matrix.records
        ]
        return "\n".join(lines) + ("\n" if lines else "")
    raise ValueError(f"format must be 'csv' or 'jsonl', got {fmt!r}")
