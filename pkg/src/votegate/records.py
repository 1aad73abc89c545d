"""Data model, file ingestion, validation, and seeded splits for path-pool datasets.

A dataset is a flat file with one JSON object per line. Each object is one
prompt instance: the pool of candidate answers sampled for that prompt, each
with a map of named path-quality scores, plus the ground-truth answer id.
Answer ids are opaque tokens compared by exact string equality; extraction
and normalization of free-form model output happen upstream of this package.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ParseError, RangeError, ValidationError

# Permutation scheme used by split(): backward Fisher-Yates driven by
# numpy's PCG64 stream, one integers(0, i+1) draw per position.
SPLIT_ALGORITHM = "fisher-yates/pcg64/v1"

_SEED_MAX = 2**64


@dataclass(frozen=True)
class PathRecord:
    """One candidate path: canonical answer id plus named quality scores."""

    answer_id: str
    scores: dict

    def __post_init__(self):
        if not isinstance(self.answer_id, str) or not self.answer_id:
            raise ValidationError("answer_id must be a non-empty string")
        for name, value in self.scores.items():
            if not isinstance(name, str) or not name:
                raise ValidationError("score names must be non-empty strings")
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ValidationError(f"score {name!r} must be a number")
            if not math.isfinite(value):
                raise ValidationError(f"score {name!r} must be finite")


@dataclass(frozen=True)
class PromptInstance:
    """One prompt's pool of m paths and its ground-truth answer id."""

    id: str
    truth: str
    paths: tuple

    def __post_init__(self):
        if not isinstance(self.id, str) or not self.id:
            raise ValidationError("id must be a non-empty string")
        if not isinstance(self.truth, str) or not self.truth:
            raise ValidationError("truth must be a non-empty string", self.id)
        if len(self.paths) < 1:
            raise ValidationError("instance must contain at least one path", self.id)
        names = frozenset(self.paths[0].scores)
        for path in self.paths[1:]:
            if frozenset(path.scores) != names:
                raise ValidationError(
                    "all paths of an instance must carry the same score names",
                    self.id,
                )

    @property
    def m(self):
        return len(self.paths)

    @property
    def score_names(self):
        return frozenset(self.paths[0].scores)


@dataclass(frozen=True)
class Dataset:
    """An immutable sequence of prompt instances sharing one score-name set."""

    instances: tuple
    score_names: frozenset

    def __len__(self):
        return len(self.instances)

    def __iter__(self):
        return iter(self.instances)


@dataclass(frozen=True)
class SplitPlan:
    """Audit record of one calibration/test split."""

    seed: int
    n_cal: int
    permutation: tuple
    algorithm: str = SPLIT_ALGORITHM


def make_dataset(instances):
    """Assemble validated instances into a Dataset.

    Enforces dataset-level invariants: unique instance ids and a score-name
    set shared by every instance. Differing pool sizes m are legal and only
    warned about, since none of the downstream math needs a constant m.
    """
    instances = tuple(instances)
    if not instances:
        return Dataset(instances=(), score_names=frozenset())
    seen = set()
    names = instances[0].score_names
    sizes = set()
    for inst in instances:
        if inst.id in seen:
            raise ValidationError("duplicate instance id", inst.id)
        seen.add(inst.id)
        if inst.score_names != names:
            raise ValidationError(
                f"score names {sorted(inst.score_names)} differ from the "
                f"dataset's {sorted(names)}",
                inst.id,
            )
        sizes.add(inst.m)
    if len(sizes) > 1:
        warnings.warn(
            f"instances have differing pool sizes m={sorted(sizes)}; "
            "proceeding (the aggregation math does not require constant m)",
            stacklevel=2,
        )
    return Dataset(instances=instances, score_names=names)


def _parse_record(obj, line_number):
    if not isinstance(obj, dict):
        raise ParseError("record is not a JSON object", line_number)
    known = {"id", "truth", "paths"}
    extra = set(obj) - known
    if extra:
        warnings.warn(
            f"line {line_number}: ignoring unknown record keys {sorted(extra)}",
            stacklevel=3,
        )
    for key in known:
        if key not in obj:
            raise ValidationError(f"line {line_number}: missing key {key!r}")
    inst_id = obj["id"]
    if not isinstance(inst_id, str) or not inst_id:
        raise ValidationError(f"line {line_number}: id must be a non-empty string")
    raw_paths = obj["paths"]
    if not isinstance(raw_paths, list):
        raise ValidationError("paths must be an array", inst_id)
    paths = []
    for entry in raw_paths:
        if not isinstance(entry, dict):
            raise ValidationError("each path must be an object", inst_id)
        extra = set(entry) - {"answer", "scores"}
        if extra:
            warnings.warn(
                f"line {line_number}: ignoring unknown path keys {sorted(extra)}",
                stacklevel=3,
            )
        if "answer" not in entry or "scores" not in entry:
            raise ValidationError("path needs 'answer' and 'scores'", inst_id)
        scores = entry["scores"]
        if not isinstance(scores, dict):
            raise ValidationError("scores must be an object", inst_id)
        try:
            paths.append(PathRecord(answer_id=entry["answer"], scores=dict(scores)))
        except ValidationError as exc:
            raise ValidationError(str(exc), inst_id) from None
    try:
        return PromptInstance(id=inst_id, truth=obj["truth"], paths=tuple(paths))
    except ValidationError as exc:
        if exc.instance_id is None:
            raise ValidationError(str(exc), inst_id) from None
        raise


def parse_dataset(path, format="jsonl"):
    """Parse and validate a dataset file.

    Parameters
    ----------
    path : str or Path
        File with one JSON record per line (UTF-8). Whitespace-only lines
        are skipped.
    format : str
        Record-format tag; only "jsonl" is defined.

    Returns
    -------
    Dataset
        Fully validated; no partially constructed dataset escapes.

    Raises
    ------
    ParseError
        Malformed line, reported with its 1-based line number.
    ValidationError
        A record violates a type invariant (NaN score, empty answer,
        duplicate id, inconsistent score names); names the instance.
    """
    if format != "jsonl":
        raise ParseError(f"unknown record format {format!r}")
    instances = []
    with open(path, "r", encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(str(exc), line_number) from None
            instances.append(_parse_record(obj, line_number))
    return make_dataset(instances)


def write_dataset(dataset, path):
    """Serialize a Dataset back to the one-record-per-line file format."""
    with open(path, "w", encoding="utf-8") as handle:
        for inst in dataset:
            obj = {
                "id": inst.id,
                "truth": inst.truth,
                "paths": [
                    {"answer": p.answer_id, "scores": p.scores} for p in inst.paths
                ],
            }
            handle.write(json.dumps(obj) + "\n")


def split(dataset, n_cal, seed):
    """Split a dataset into calibration and test parts, reproducibly.

    Draws a uniformly random permutation with backward Fisher-Yates over
    numpy's PCG64 stream (see SPLIT_ALGORITHM); the first n_cal permuted
    instances form the calibration set, the rest the test set.

    Returns
    -------
    (Dataset, Dataset, SplitPlan)

    Raises
    ------
    RangeError
        When n_cal is not in [1, len(dataset) - 1] or the seed does not
        fit in an unsigned 64-bit integer.
    """
    n = len(dataset)
    if not 1 <= n_cal < n:
        raise RangeError(f"n_cal must be in [1, {n - 1}], got {n_cal}")
    if not 0 <= seed < _SEED_MAX:
        raise RangeError("seed must fit in an unsigned 64-bit integer")
    rng = np.random.Generator(np.random.PCG64(seed))
    perm = np.arange(n)
    for i in range(n - 1, 0, -1):
        j = int(rng.integers(0, i + 1))
        perm[i], perm[j] = perm[j], perm[i]
    # subsets of a valid dataset stay valid; skip re-validation and re-warning
    cal = Dataset(
        instances=tuple(dataset.instances[i] for i in perm[:n_cal]),
        score_names=dataset.score_names,
    )
    test = Dataset(
        instances=tuple(dataset.instances[i] for i in perm[n_cal:]),
        score_names=dataset.score_names,
    )
    plan = SplitPlan(seed=seed, n_cal=n_cal, permutation=tuple(int(i) for i in perm))
    return cal, test, plan
