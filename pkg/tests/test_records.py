"""Record parsing, dataset invariants, and reproducible splitting."""

import json
import math

import numpy as np
import pytest

from votegate.errors import ParseError, RangeError, ValidationError
from votegate.records import (
    SPLIT_ALGORITHM,
    PathRecord,
    PromptInstance,
    make_dataset,
    parse_dataset,
    split,
    write_dataset,
)

from conftest import dataset, instance


def record(id, truth, pairs):
    return {
        "id": id,
        "truth": truth,
        "paths": [{"answer": a, "scores": {"score": q}} for a, q in pairs],
    }


def test_parse_happy_path(jsonl_file):
    path = jsonl_file(
        [
            record("q1", "a", [("a", 0.2), ("b", -1.0)]),
            record("q2", "b", [("b", 0.5)]),
        ]
    )
    ds = parse_dataset(path)
    assert len(ds) == 2
    assert ds.score_names == frozenset({"score"})
    first = ds.instances[0]
    assert first.id == "q1"
    assert first.truth == "a"
    assert first.m == 2
    assert first.paths[1].answer_id == "b"
    assert first.paths[1].scores == {"score": -1.0}


def test_parse_skips_blank_lines(jsonl_file):
    path = jsonl_file(
        [json.dumps(record("q1", "a", [("a", 0.0)])), "   ", ""], name="gaps.jsonl"
    )
    assert len(parse_dataset(path)) == 1


def test_parse_error_reports_line_number(jsonl_file):
    path = jsonl_file([json.dumps(record("q1", "a", [("a", 0.0)])), "{not json"])
    with pytest.raises(ParseError) as err:
        parse_dataset(path)
    assert err.value.line_number == 2


def test_parse_rejects_unknown_format(jsonl_file):
    path = jsonl_file([json.dumps(record("q1", "a", [("a", 0.0)]))])
    with pytest.raises(ParseError):
        parse_dataset(path, format="csv")


@pytest.mark.parametrize(
    "bad",
    [
        {"id": "", "truth": "a", "paths": [{"answer": "a", "scores": {"score": 0.0}}]},
        {"id": "q", "truth": "", "paths": [{"answer": "a", "scores": {"score": 0.0}}]},
        {"id": "q", "truth": "a", "paths": []},
        {"id": "q", "truth": "a", "paths": [{"answer": "", "scores": {"score": 0.0}}]},
        {"id": "q", "truth": "a", "paths": [{"answer": "a", "scores": {"score": math.nan}}]},
        {"id": "q", "truth": "a", "paths": [{"answer": "a", "scores": {"score": True}}]},
        {"id": "q", "truth": "a", "paths": [{"answer": "a", "scores": {"score": "hi"}}]},
    ],
    ids=["empty-id", "empty-truth", "no-paths", "empty-answer", "nan", "bool", "string"],
)
def test_parse_rejects_invalid_records(jsonl_file, bad):
    path = jsonl_file([json.dumps(bad)])
    with pytest.raises((ParseError, ValidationError)):
        parse_dataset(path)


def test_nonfinite_scores_rejected():
    with pytest.raises(ValidationError):
        PathRecord(answer_id="a", scores={"score": math.inf})


def test_instance_requires_consistent_score_names():
    with pytest.raises(ValidationError):
        PromptInstance(
            id="q",
            truth="a",
            paths=(
                PathRecord(answer_id="a", scores={"score": 0.0}),
                PathRecord(answer_id="b", scores={"other": 0.0}),
            ),
        )


def test_make_dataset_rejects_duplicate_ids():
    with pytest.raises(ValidationError) as err:
        dataset([("q1", "a", [("a", 0.0)]), ("q1", "a", [("a", 0.0)])])
    assert err.value.instance_id == "q1"


def test_make_dataset_rejects_mixed_score_names():
    with pytest.raises(ValidationError):
        make_dataset(
            [
                instance("q1", "a", [("a", 0.0)], score_name="score"),
                instance("q2", "a", [("a", 0.0)], score_name="logp"),
            ]
        )


def test_make_dataset_warns_on_varying_pool_size():
    with pytest.warns(UserWarning, match="differing pool sizes"):
        ds = dataset([("q1", "a", [("a", 0.0)]), ("q2", "a", [("a", 0.0), ("b", 1.0)])])
    assert len(ds) == 2


def test_make_dataset_empty_is_legal():
    ds = make_dataset([])
    assert len(ds) == 0
    assert ds.score_names == frozenset()


def test_write_then_parse_round_trip(tmp_path):
    ds = dataset(
        [
            ("q1", "a", [("a", 0.25), ("b", -3.5), ("a", 1e-9)]),
            ("q2", "c", [("c", 7.0)]),
        ]
    )
    path = tmp_path / "round.jsonl"
    write_dataset(ds, path)
    assert parse_dataset(path) == ds


def test_split_partitions_the_dataset():
    ds = dataset([(f"q{i}", "a", [("a", float(i))]) for i in range(10)])
    cal, test, plan = split(ds, n_cal=3, seed=7)
    assert len(cal) == 3
    assert len(test) == 7
    cal_ids = {inst.id for inst in cal}
    test_ids = {inst.id for inst in test}
    assert cal_ids.isdisjoint(test_ids)
    assert cal_ids | test_ids == {inst.id for inst in ds}
    assert plan.n_cal == 3
    assert plan.seed == 7
    assert plan.algorithm == SPLIT_ALGORITHM
    assert sorted(plan.permutation) == list(range(10))


def test_split_is_deterministic_and_seed_sensitive():
    ds = dataset([(f"q{i}", "a", [("a", float(i))]) for i in range(30)])
    cal1, test1, plan1 = split(ds, n_cal=10, seed=123)
    cal2, test2, plan2 = split(ds, n_cal=10, seed=123)
    assert plan1 == plan2
    assert cal1 == cal2 and test1 == test2
    _, _, plan3 = split(ds, n_cal=10, seed=124)
    assert plan3.permutation != plan1.permutation


def test_split_permutation_is_uniformish():
    # each index should land in the 2-element calibration set sometimes
    ds = dataset([(f"q{i}", "a", [("a", 0.0)]) for i in range(6)])
    seen = set()
    for seed in range(200):
        cal, _, _ = split(ds, n_cal=2, seed=seed)
        seen.update(inst.id for inst in cal)
    assert seen == {f"q{i}" for i in range(6)}


@pytest.mark.parametrize("n_cal", [0, 10, 11])
def test_split_rejects_bad_sizes(n_cal):
    ds = dataset([(f"q{i}", "a", [("a", 0.0)]) for i in range(10)])
    with pytest.raises(RangeError):
        split(ds, n_cal=n_cal, seed=0)


@pytest.mark.parametrize("seed", [-1, 2**64])
def test_split_rejects_bad_seeds(seed):
    ds = dataset([(f"q{i}", "a", [("a", 0.0)]) for i in range(4)])
    with pytest.raises(RangeError):
        split(ds, n_cal=2, seed=seed)
