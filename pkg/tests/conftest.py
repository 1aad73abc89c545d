"""Shared construction helpers for the test suite."""

import json

import pytest

from votegate.aggregate import VoteOutcome
from votegate.records import PathRecord, PromptInstance, make_dataset


def instance(id, truth, pairs, score_name="score"):
    """A PromptInstance from (answer, score) pairs."""
    paths = tuple(
        PathRecord(answer_id=a, scores={score_name: float(q)}) for a, q in pairs
    )
    return PromptInstance(id=id, truth=truth, paths=paths)


def dataset(rows, score_name="score"):
    """A Dataset from (id, truth, pairs) rows."""
    return make_dataset(
        instance(i, t, pairs, score_name=score_name) for i, t, pairs in rows
    )


def outcome(nu, correct, id="x", winner=None, m=4):
    """A bare VoteOutcome when only (confidence, correctness) matter."""
    w = winner if winner is not None else ("t" if correct else "f")
    return VoteOutcome(
        instance_id=id,
        winner=w,
        confidence=float(nu),
        tallies={w: float(nu)},
        correct=bool(correct),
        m=m,
    )


def outcomes(pairs):
    """VoteOutcomes from (confidence, correct) pairs."""
    return [outcome(nu, c, id=f"x{i}") for i, (nu, c) in enumerate(pairs)]


@pytest.fixture
def jsonl_file(tmp_path):
    """Write records as a JSONL file and return its path."""

    def write(records, name="data.jsonl"):
        path = tmp_path / name
        with open(path, "w", encoding="utf-8") as handle:
            for rec in records:
                handle.write((rec if isinstance(rec, str) else json.dumps(rec)) + "\n")
        return path

    return write
