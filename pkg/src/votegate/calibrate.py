"""Conformal risk control for the confident-error rate.

The per-example loss at threshold lambda is 1 when the vote answers
(confidence strictly above lambda) with a wrong answer, else 0. The
empirical risk over a calibration set is a non-increasing step function
of lambda that only changes at observed confidence values, so the exact
candidate grid is those values plus the endpoints 0 and 1. The calibrated
threshold is the smallest grid value whose risk clears the slack
beta_n = alpha - (1 - alpha) / n; if even beta_n < 0 the policy must
always abstain and the threshold is pinned to 1.

Thresholding is strict everywhere (answer iff nu > lambda), the
right-continuous convention. The empirical tail definitions in some
derivations use >= at atoms instead; this package standardizes on > and
evaluates only at grid points, where the choice is a documented
convention rather than a numerical difference.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .aggregate import outcome_arrays
from .errors import (
    EmptyCalibration,
    EmptyInput,
    LengthMismatch,
    RangeError,
    ValidationError,
)

# version tag for the candidate-grid convention, stored alongside policies
GRID_VERSION = "nu-support-v1"


@dataclass(frozen=True, eq=False)
class RiskCurve:
    """Empirical confident-error risk at each candidate threshold.

    thresholds is strictly increasing and always contains 0 and 1;
    risks is the matching non-increasing step function; n is the
    calibration size.
    """

    thresholds: np.ndarray
    risks: np.ndarray
    n: int

    def risk_at(self, lam):
        """Evaluate the step function at any lambda in [0, 1].

        Between grid points the curve is constant and equals its value at
        the largest grid point <= lambda, because losses change only when
        lambda crosses an observed confidence.
        """
        if not 0.0 <= lam <= 1.0:
            raise RangeError(f"lambda must be in [0, 1], got {lam}")
        idx = int(np.searchsorted(self.thresholds, lam, side="right")) - 1
        return float(self.risks[idx])


@dataclass(frozen=True)
class Policy:
    """A calibrated abstention policy: answer iff nu > lambda_hat."""

    lambda_hat: float
    alpha: float
    n: int
    always_abstain: bool = False
    grid_version: str = GRID_VERSION


@dataclass(frozen=True)
class Decision:
    """Outcome of applying a policy to one instance."""

    instance_id: str
    action: str
    answer: str | None
    confidence: float


def confident_error_loss(outcome, lam):
    """Per-example loss: 1 iff the outcome answers at lambda and is wrong.

    Strict inequality: confidence exactly at the threshold abstains.
    """
    return int(outcome.confidence > lam and not outcome.correct)


def risk_curve_from_arrays(nu, correct):
    """Empirical risk curve from confidence and correctness arrays."""
    nu = np.asarray(nu, dtype=float)
    correct = np.asarray(correct, dtype=bool)
    if nu.shape != correct.shape:
        raise LengthMismatch(
            f"confidence and correctness differ in length: {nu.shape} vs {correct.shape}"
        )
    n = nu.size
    if n == 0:
        raise EmptyCalibration("risk curve needs at least one outcome")
    thresholds = np.unique(np.concatenate([nu, [0.0, 1.0]]))
    wrong_sorted = np.sort(nu[~correct])
    above = wrong_sorted.size - np.searchsorted(wrong_sorted, thresholds, side="right")
    return RiskCurve(thresholds=thresholds, risks=above / n, n=n)


def risk_curve(outcomes):
    """Empirical risk curve of a calibration set of VoteOutcomes.

    The threshold grid is the sorted distinct observed confidences plus
    {0, 1}; the risk at each grid value counts confident errors exactly.
    """
    if len(outcomes) == 0:
        raise EmptyCalibration("risk curve needs at least one outcome")
    nu, correct = outcome_arrays(outcomes)
    return risk_curve_from_arrays(nu, correct)


def crc_slack(alpha, n):
    """The calibration slack beta_n = alpha - (1 - alpha) / n.

    Computed as (alpha * (n + 1) - 1) / n, the same quantity rearranged so
    the boundary alpha * (n + 1) = 1 lands on exactly zero in floating
    point (e.g. alpha=0.05, n=19).
    """
    return (alpha * (n + 1) - 1.0) / n


def crc_threshold(curve, alpha):
    """Select the calibrated threshold for a target confident-error rate.

    lambda_hat is the infimum over [0, 1] of thresholds whose empirical
    risk is at most beta_n = alpha - (1 - alpha) / n. The risk curve is
    right-continuous and constant between grid points, so the infimum is
    attained at a grid point and a binary search over the monotone risk
    array is exact. When beta_n < 0 no threshold can qualify and the
    policy always abstains with lambda_hat = 1.

    Raises
    ------
    RangeError
        When alpha is outside (0, 1).
    """
    if not 0.0 < alpha < 1.0:
        raise RangeError(f"alpha must be in (0, 1), got {alpha}")
    beta_n = crc_slack(alpha, curve.n)
    if beta_n < 0.0:
        return Policy(lambda_hat=1.0, alpha=alpha, n=curve.n, always_abstain=True)
    # risks are non-increasing; first index with risk <= beta_n
    idx = int(np.searchsorted(-curve.risks, -beta_n, side="left"))
    return Policy(
        lambda_hat=float(curve.thresholds[idx]),
        alpha=alpha,
        n=curve.n,
        always_abstain=False,
    )


def apply_policy(policy, outcomes):
    """Apply a calibrated policy to a batch of outcomes.

    Answers with the vote winner iff confidence strictly exceeds
    lambda_hat; an always-abstain policy abstains on everything.
    """
    decisions = []
    for outcome in outcomes:
        answers = (not policy.always_abstain) and outcome.confidence > policy.lambda_hat
        decisions.append(
            Decision(
                instance_id=outcome.instance_id,
                action="answer" if answers else "abstain",
                answer=outcome.winner if answers else None,
                confidence=outcome.confidence,
            )
        )
    return decisions


def realized_risk(decisions, truths):
    """Fraction of ALL inputs on which the policy answered incorrectly.

    The denominator counts every decision, including abstentions: this is
    the marginal confident-error rate the CRC guarantee controls, not the
    selective error rate among answered inputs.

    Raises
    ------
    LengthMismatch
        When decisions and truths differ in length.
    EmptyInput
        When there are no decisions at all.
    """
    decisions = list(decisions)
    truths = list(truths)
    if len(decisions) != len(truths):
        raise LengthMismatch(
            f"{len(decisions)} decisions vs {len(truths)} truths"
        )
    if not decisions:
        raise EmptyInput("realized risk of zero decisions is undefined")
    wrong = sum(
        1
        for decision, truth in zip(decisions, truths)
        if decision.action == "answer" and decision.answer != truth
    )
    return wrong / len(decisions)


def policy_to_json(policy):
    """Serialize a policy to a small JSON document."""
    return json.dumps(
        {
            "lambda_hat": policy.lambda_hat,
            "alpha": policy.alpha,
            "n": policy.n,
            "always_abstain": policy.always_abstain,
            "grid_version": policy.grid_version,
        },
        sort_keys=True,
    )


def policy_from_json(text):
    """Parse a policy serialized by policy_to_json, validating its fields."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"policy is not valid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise ValidationError("policy JSON must be an object")
    required = {"lambda_hat", "alpha", "n", "always_abstain", "grid_version"}
    missing = required - set(obj)
    if missing:
        raise ValidationError(f"policy JSON missing keys {sorted(missing)}")
    lam = obj["lambda_hat"]
    alpha = obj["alpha"]
    n = obj["n"]
    flag = obj["always_abstain"]
    if not isinstance(lam, (int, float)) or isinstance(lam, bool) or not 0 <= lam <= 1:
        raise ValidationError("lambda_hat must be a number in [0, 1]")
    if (
        not isinstance(alpha, (int, float))
        or isinstance(alpha, bool)
        or not 0 < alpha < 1
    ):
        raise ValidationError("alpha must be a number in (0, 1)")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ValidationError("n must be a positive integer")
    if not isinstance(flag, bool):
        raise ValidationError("always_abstain must be a boolean")
    if flag and lam != 1.0:
        raise ValidationError("an always-abstain policy must have lambda_hat = 1")
    return Policy(
        lambda_hat=float(lam),
        alpha=float(alpha),
        n=n,
        always_abstain=flag,
        grid_version=str(obj["grid_version"]),
    )
