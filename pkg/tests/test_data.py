"""Ingestion, validation, and round-trip checks for the data loaders."""

import io
import json

import numpy as np
import pytest

from e2h.data import (
    GameRecord,
    ItemDifficultySummary,
    ResponseMatrix,
    ResponseRecord,
    dump_responses,
    load_game_records,
    load_item_difficulties,
    load_responses,
)
from e2h.errors import (
    DuplicateResponse,
    InvalidScore,
    MalformedRow,
    NonBinaryOutcome,
    NonPositiveCount,
    NonPositiveRd,
    OutOfRangeProportion,
)


class TestLoadResponses:
    def test_minimal_two_item_csv(self):
        m = load_responses("examinee_id,item_id,outcome\ne1,i1,1\ne1,i2,0\n")
        assert len(m.examinee_index) == 1
        assert len(m.item_index) == 2
        assert len(m.records) == 2

    def test_non_binary_outcome_rejected(self):
        with pytest.raises(NonBinaryOutcome):
            load_responses("examinee_id,item_id,outcome\ne1,i1,2\n")

    def test_large_jsonl_counts(self):
        rng = np.random.default_rng(3)
        lines = [
            json.dumps({"examinee_id": f"e{e}", "item_id": f"i{i}",
                        "outcome": int(rng.integers(0, 2))})
            for e in range(200) for i in range(100)
        ]
        m = load_responses("\n".join(lines) + "\n", fmt="jsonl")
        assert len(m.examinee_index) == 200
        assert len(m.item_index) == 100
        assert len(m.records) == 20_000

    def test_duplicate_cell_rejected(self):
        text = ("examinee_id,item_id,outcome,period\n"
                "e1,i1,1,0\ne1,i1,0,0\n")
        with pytest.raises(DuplicateResponse):
            load_responses(text)

    def test_same_cell_distinct_periods_ok(self):
        text = ("examinee_id,item_id,outcome,period\n"
                "e1,i1,1,0\ne1,i1,0,1\n")
        m = load_responses(text)
        assert len(m.records) == 2

    def test_missing_header_is_malformed(self):
        with pytest.raises(MalformedRow):
            load_responses("e1,i1,1\n")

    def test_file_object_source(self):
        buf = io.StringIO("examinee_id,item_id,outcome\ne1,i1,1\n")
        m = load_responses(buf)
        assert len(m.records) == 1


class TestLoadItemDifficulties:
    def test_single_row(self):
        rows = load_item_difficulties("item_id,p_correct,n_attempts\ni1,0.5,100\n")
        assert len(rows) == 1
        assert rows[0].p_correct == 0.5
        assert rows[0].n_attempts == 100

    def test_out_of_range_proportion(self):
        with pytest.raises(OutOfRangeProportion):
            load_item_difficulties("item_id,p_correct,n_attempts\ni1,1.2,100\n")

    def test_nonpositive_count(self):
        with pytest.raises(NonPositiveCount):
            load_item_difficulties("item_id,p_correct,n_attempts\ni1,0.5,0\n")

    def test_mean_matches_generator(self):
        rng = np.random.default_rng(11)
        ps = rng.uniform(0.05, 0.95, 25)
        text = "item_id,p_correct,n_attempts\n" + "".join(
            f"q{k},{float(p)!r},50\n" for k, p in enumerate(ps))
        rows = load_item_difficulties(text)
        assert len(rows) == 25
        assert abs(np.mean([r.p_correct for r in rows]) - ps.mean()) <= 1e-12

    def test_group_tag_carried(self):
        rows = load_item_difficulties(
            "item_id,p_correct,n_attempts,group_tag\ni1,0.5,10,hard\n")
        assert rows[0].group_tag == "hard"


class TestLoadGameRecords:
    def test_single_row(self):
        rows = load_game_records(
            "subject_id,opponent_rating,opponent_rd,score,period\n"
            "p1,1400,30,1,0\n")
        assert rows == [GameRecord("p1", 1400.0, 30.0, 1.0, 0)]

    def test_fractional_score_rejected(self):
        with pytest.raises(InvalidScore):
            load_game_records(
                "subject_id,opponent_rating,opponent_rd,score,period\n"
                "p1,1400,30,0.3,0\n")

    def test_nonpositive_rd_rejected(self):
        with pytest.raises(NonPositiveRd):
            load_game_records(
                "subject_id,opponent_rating,opponent_rd,score,period\n"
                "p1,1400,0,1,0\n")

    def test_worked_example_file(self):
        text = ("subject_id,opponent_rating,opponent_rd,score,period\n"
                "p1,1400,30,1,0\np1,1550,100,0,0\np1,1700,300,0,0\n")
        rows = load_game_records(text)
        assert len(rows) == 3
        assert all(r.period == 0 for r in rows)
        assert [r.opponent_rating for r in rows] == [1400.0, 1550.0, 1700.0]

    def test_sorted_by_subject_then_period(self):
        text = ("subject_id,opponent_rating,opponent_rd,score,period\n"
                "p2,1500,50,1,1\np1,1500,50,0,2\np1,1500,50,1,0\n")
        rows = load_game_records(text)
        assert [(r.subject_id, r.period) for r in rows] == [
            ("p1", 0), ("p1", 2), ("p2", 1)]


class TestRoundTrip:
    def test_csv_round_trip(self):
        m = ResponseMatrix.from_records([
            ResponseRecord("e1", "i1", 1, 0),
            ResponseRecord("e1", "i2", 0, 1),
            ResponseRecord("e2", "i1", 0, 0),
        ])
        again = load_responses(dump_responses(m, fmt="csv"))
        assert again.records == m.records

    def test_jsonl_round_trip(self):
        m = ResponseMatrix.from_records(
            [ResponseRecord("e1", "i1", 1, 3)])
        again = load_responses(dump_responses(m, fmt="jsonl"), fmt="jsonl")
        assert again.records == m.records


class TestValidationAtConstruction:
    def test_record_outcome_checked(self):
        with pytest.raises(NonBinaryOutcome):
            ResponseRecord("e1", "i1", 7)

    def test_summary_proportion_checked(self):
        with pytest.raises(OutOfRangeProportion):
            ItemDifficultySummary("i1", -0.1, 10)

    def test_game_score_checked(self):
        with pytest.raises(InvalidScore):
            GameRecord("p1", 1500.0, 50.0, 0.25)
