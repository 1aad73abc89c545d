"""Accuracy-yield frontier: threshold sweep, trapezoid AUC, Pareto structure.

The sweep visits the exact thresholds where the answered set can change:
0 plus every distinct observed confidence. Points where nothing survives
the threshold are flagged rather than given a fabricated accuracy, and
the AUC integrates only over the observed yield domain; accuracy is never
extrapolated to unattainable operating points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .aggregate import outcome_arrays
from .errors import EmptyInput, InsufficientPoints


@dataclass(frozen=True)
class FrontierPoint:
    """One operating point of the sweep; a_c is None when nothing survives."""

    lambda_: float
    yield_: float
    a_c: float | None
    n_selected: int


@dataclass(frozen=True)
class FrontierSummary:
    """Trapezoid AUC over the observed yield domain plus Pareto diagnostics."""

    points: tuple
    auc: float
    domain: tuple
    pareto_violations: int


def sweep(outcomes):
    """Trace the accuracy-yield frontier of a batch of outcomes.

    Returns one FrontierPoint per candidate threshold (0 plus each
    distinct confidence value, ascending). Yield is non-increasing along
    the sweep because the selected set only shrinks.

    Raises
    ------
    EmptyInput
        On an empty batch.
    """
    return sweep_from_arrays(*outcome_arrays(outcomes))


def sweep_from_arrays(nu, correct):
    """Array-level sweep: same contract, on parallel (nu, correct) arrays."""
    nu = np.asarray(nu, dtype=float)
    correct = np.asarray(correct, dtype=bool)
    n = nu.size
    if n == 0:
        raise EmptyInput("cannot sweep zero outcomes")
    grid = np.unique(np.concatenate([[0.0], nu]))
    nu_sorted = np.sort(nu)
    cor_sorted = np.sort(nu[correct])
    n_sel = n - np.searchsorted(nu_sorted, grid, side="right")
    n_sel_cor = cor_sorted.size - np.searchsorted(cor_sorted, grid, side="right")
    points = []
    for lam, sel, sel_cor in zip(grid, n_sel, n_sel_cor):
        sel = int(sel)
        points.append(
            FrontierPoint(
                lambda_=float(lam),
                yield_=sel / n,
                a_c=(int(sel_cor) / sel) if sel > 0 else None,
                n_selected=sel,
            )
        )
    return points


def frontier_auc(points):
    """Summarize a sweep: trapezoid AUC, observed domain, Pareto violations.

    The AUC integrates selective accuracy over yield between the smallest
    and largest observed yields with defined accuracy; adjacent points
    with equal yield form zero-width trapezoids and contribute nothing.
    Pareto violations count adjacent sweep pairs (in threshold order)
    where raising the threshold strictly decreased both yield and
    accuracy.

    Raises
    ------
    InsufficientPoints
        When fewer than two points have defined accuracy.
    """
    points = tuple(points)
    defined = [p for p in points if p.a_c is not None]
    if len(defined) < 2:
        raise InsufficientPoints(
            f"need >= 2 points with defined accuracy, got {len(defined)}"
        )

    by_yield = sorted(defined, key=lambda p: p.yield_)
    auc = 0.0
    for left, right in zip(by_yield, by_yield[1:]):
        auc += (right.yield_ - left.yield_) * (right.a_c + left.a_c) / 2.0

    by_lambda = sorted(defined, key=lambda p: p.lambda_)
    violations = 0
    for prev, cur in zip(by_lambda, by_lambda[1:]):
        if cur.a_c < prev.a_c and cur.yield_ < prev.yield_:
            violations += 1

    return FrontierSummary(
        points=points,
        auc=auc,
        domain=(by_yield[0].yield_, by_yield[-1].yield_),
        pareto_violations=violations,
    )
