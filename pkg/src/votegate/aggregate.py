"""Score-weighted voting: weight functions, per-answer tallies, winner, confidence.

Given one prompt's pool of scored paths, the weighted vote for answer y is
V_y = sum of w(q_j) over paths j that answered y. The winner is the argmax
(ties broken by lexicographically smallest answer id) and the vote
confidence is the winner's share nu = V_winner / sum_y V_y.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import UnknownScore, ValidationError

WEIGHT_KINDS = ("uniform", "linear", "exponential")

# exp() overflows double precision just above 709; stay clear of it when
# undoing the per-pool rescale for reporting
_EXP_ARG_LIMIT = 700.0


@dataclass(frozen=True)
class WeightSpec:
    """Weight function turning a path-quality score q into a positive weight.

    kind "uniform" ignores q (plain majority voting); "linear" uses
    max(q - shift, floor); "exponential" uses exp(beta * q). The default
    matches the exp(q) convention for log-probability style scores.
    """

    kind: str = "exponential"
    beta: float = 1.0
    shift: float = 0.0
    floor: float = 1e-12

    def __post_init__(self):
        if self.kind not in WEIGHT_KINDS:
            raise ValidationError(
                f"unknown weight kind {self.kind!r}; expected one of {WEIGHT_KINDS}"
            )
        if not (isinstance(self.beta, (int, float)) and math.isfinite(self.beta)):
            raise ValidationError("beta must be a finite number")
        if self.beta < 0:
            raise ValidationError("beta must be >= 0")
        if not (isinstance(self.shift, (int, float)) and math.isfinite(self.shift)):
            raise ValidationError("shift must be a finite number")
        if not (isinstance(self.floor, (int, float)) and math.isfinite(self.floor)):
            raise ValidationError("floor must be a finite number")
        if self.floor <= 0:
            raise ValidationError("floor must be > 0")


@dataclass(frozen=True)
class VoteOutcome:
    """Result of aggregating one instance's pool under a weight function."""

    instance_id: str
    winner: str
    confidence: float
    tallies: dict
    correct: bool
    m: int


def weight(q, spec):
    """Evaluate the weight function at a single finite score q.

    This is the defining scalar form. During aggregation the exponential
    kind is evaluated with the pool's maximum score subtracted first; the
    winner and confidence are invariant to that common rescaling, and it
    keeps the arithmetic finite for any finite beta * q.
    """
    if spec.kind == "uniform":
        return 1.0
    if spec.kind == "linear":
        return max(q - spec.shift, spec.floor)
    return math.exp(spec.beta * q)


def _pool_weights(qs, spec):
    """Weights for one pool, rescale-safe, plus the common factor taken out."""
    if spec.kind == "uniform":
        return [1.0] * len(qs), 1.0
    if spec.kind == "linear":
        return [max(q - spec.shift, spec.floor) for q in qs], 1.0
    q_max = max(qs)
    ws = [math.exp(spec.beta * (q - q_max)) for q in qs]
    scale_log = spec.beta * q_max
    scale = math.exp(scale_log) if abs(scale_log) < _EXP_ARG_LIMIT else None
    return ws, scale


def aggregate(instance, score_name, spec):
    """Convert one PromptInstance into a VoteOutcome.

    Parameters
    ----------
    instance : PromptInstance
    score_name : str
        Which named score drives the weights.
    spec : WeightSpec

    Returns
    -------
    VoteOutcome
        Reported tallies are in unrescaled weight units whenever that is
        representable; otherwise they keep the pool's common rescale (the
        winner and confidence are identical either way).

    Raises
    ------
    UnknownScore
        When score_name is absent from the instance's paths.
    """
    qs = []
    for path in instance.paths:
        if score_name not in path.scores:
            raise UnknownScore(
                f"score {score_name!r} not in instance {instance.id!r} "
                f"(has {sorted(instance.score_names)})"
            )
        qs.append(float(path.scores[score_name]))
    ws, scale = _pool_weights(qs, spec)

    by_answer = {}
    for path, w in zip(instance.paths, ws):
        by_answer.setdefault(path.answer_id, []).append(w)
    # fsum is exactly rounded, so tallies and nu do not depend on path order
    tallies = {answer: math.fsum(values) for answer, values in by_answer.items()}
    total = math.fsum(tallies.values())
    best = max(tallies.values())
    winner = min(a for a, v in tallies.items() if v == best)
    confidence = best / total
    if scale is not None and scale != 1.0:
        tallies = {a: v * scale for a, v in tallies.items()}
    return VoteOutcome(
        instance_id=instance.id,
        winner=winner,
        confidence=confidence,
        tallies=tallies,
        correct=winner == instance.truth,
        m=len(qs),
    )


def aggregate_dataset(dataset, score_name, spec):
    """Aggregate every instance, preserving dataset order."""
    return [aggregate(inst, score_name, spec) for inst in dataset]


def outcome_arrays(outcomes):
    """Confidence and correctness of a batch of outcomes as numpy arrays."""
    nu = np.array([o.confidence for o in outcomes], dtype=float)
    correct = np.array([o.correct for o in outcomes], dtype=bool)
    return nu, correct
