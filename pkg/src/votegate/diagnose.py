"""Separability and selective-accuracy analytics over vote confidences.

All conditional quantities are computed on the exact grid of observed
confidence values; no smoothing or binning. Survival tails use the strict
convention S(lam) = P(nu > lam) to match the answering rule, and discrete
hazards at a support point are the conditional exit probabilities
h(lam) = P(nu = lam | nu >= lam) within a correctness stratum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .aggregate import outcome_arrays
from .errors import (
    DegenerateStratum,
    DomainError,
    EmptyInput,
    EmptySelection,
    RangeError,
)


@dataclass(frozen=True, eq=False)
class SeparabilityProfile:
    """Stratified tail and hazard profile on the observed confidence grid.

    All arrays are aligned with grid. delta is the separability gap
    S_cor - S_err; delta_strict is the hazard gap h_err - h_cor.
    """

    grid: np.ndarray
    s_cor: np.ndarray
    s_err: np.ndarray
    delta: np.ndarray
    h_cor: np.ndarray
    h_err: np.ndarray
    delta_strict: np.ndarray
    p_v_hat: float
    n_cor: int
    n_err: int

    @property
    def n(self):
        return self.n_cor + self.n_err


@dataclass(frozen=True, eq=False)
class PredictorOutput:
    """Plug-in selective-accuracy predictor with its concentration bound.

    a_c_hat is G_hat / H_hat per grid point (NaN where H_hat = 0, which
    can only happen at the top of the grid); s0_hat is the smallest
    answered fraction over the operating set (grid points whose empirical
    separability gap is at least delta0); bound is the finite-sample
    deviation bound 4 * eps_n(delta) / s0_hat.
    """

    grid: np.ndarray
    a_c_hat: np.ndarray
    gain_hat: np.ndarray
    yield_hat: np.ndarray
    g_hat: np.ndarray
    h_hat: np.ndarray
    operating_set: np.ndarray
    s0_hat: float
    bound: float
    epsilon: float
    p_v_hat: float
    n: int
    delta: float
    delta0: float


def _stratum_tails(values_sorted, grid, size):
    """survival, hazard, at-risk counts of one stratum on a shared grid."""
    lo = np.searchsorted(values_sorted, grid, side="left")
    hi = np.searchsorted(values_sorted, grid, side="right")
    at_risk = size - lo
    exits = hi - lo
    survival = (size - hi) / size
    hazard = np.divide(
        exits,
        at_risk,
        out=np.zeros(len(grid), dtype=float),
        where=at_risk > 0,
    )
    return survival, hazard


def separability_profile_from_arrays(nu, correct):
    """Separability profile from confidence and correctness arrays."""
    nu = np.asarray(nu, dtype=float)
    correct = np.asarray(correct, dtype=bool)
    n = nu.size
    if n == 0:
        raise EmptyInput("profile needs at least one outcome")
    n_cor = int(correct.sum())
    n_err = n - n_cor
    if n_cor == 0 or n_err == 0:
        raise DegenerateStratum(
            "both correct and incorrect outcomes are required",
            p_v_hat=n_cor / n,
        )
    grid = np.unique(nu)
    cor_sorted = np.sort(nu[correct])
    err_sorted = np.sort(nu[~correct])
    s_cor, h_cor = _stratum_tails(cor_sorted, grid, n_cor)
    s_err, h_err = _stratum_tails(err_sorted, grid, n_err)
    return SeparabilityProfile(
        grid=grid,
        s_cor=s_cor,
        s_err=s_err,
        delta=s_cor - s_err,
        h_cor=h_cor,
        h_err=h_err,
        delta_strict=h_err - h_cor,
        p_v_hat=n_cor / n,
        n_cor=n_cor,
        n_err=n_err,
    )


def separability_profile(outcomes):
    """Stratified survival and hazard profile of a batch of outcomes.

    Raises
    ------
    DegenerateStratum
        When every outcome is correct or every outcome is wrong; the
        exception reports the observed vote accuracy.
    """
    nu, correct = outcome_arrays(outcomes)
    return separability_profile_from_arrays(nu, correct)


def survival_from_hazards(hazards):
    """Rebuild a survival curve from discrete hazards at support points.

    Returns the cumulative product of (1 - h) taken over support points up
    to and including each grid position. With the strict-tail convention
    S(lam) = P(nu > lam), the factor at lam itself belongs in the product:
    the result telescopes exactly to the empirical tail counts.
    """
    return np.cumprod(1.0 - np.asarray(hazards, dtype=float))


def selective_accuracy(outcomes, lam):
    """Accuracy among outcomes whose confidence strictly exceeds lam.

    Raises
    ------
    EmptySelection
        When nothing is selected; this is deliberately distinct from
        returning 0, which would mean "selected and all wrong".
    """
    nu, correct = outcome_arrays(outcomes)
    selected = nu > lam
    n_sel = int(selected.sum())
    if n_sel == 0:
        raise EmptySelection(f"no outcome has confidence > {lam}")
    return float(correct[selected].sum() / n_sel)


def yield_fraction(outcomes, lam):
    """Fraction of outcomes answered at threshold lam (strict inequality)."""
    nu, _ = outcome_arrays(outcomes)
    if nu.size == 0:
        raise EmptyInput("yield of zero outcomes is undefined")
    return float((nu > lam).sum() / nu.size)


def accuracy_gain(p_v, s_cor, s_err):
    """Closed-form selective-accuracy gain A_c(lam) - p_v.

    Evaluates p_v * (1 - p_v) * delta / (s_cor - (1 - p_v) * delta) with
    delta = s_cor - s_err. Algebraically identical to the Bayes form
    (see bayes_selective_accuracy); the two must agree to 1e-12 absolute
    on the valid domain, and tests enforce that.

    Raises
    ------
    DomainError
        When p_v is not in (0, 1), a survival value leaves [0, 1], or the
        denominator is not strictly positive.
    """
    if not 0.0 < p_v < 1.0:
        raise DomainError(f"p_v must be in (0, 1), got {p_v}")
    if not (0.0 <= s_cor <= 1.0 and 0.0 <= s_err <= 1.0):
        raise DomainError("survival values must lie in [0, 1]")
    delta = s_cor - s_err
    denom = s_cor - (1.0 - p_v) * delta
    if denom <= 0.0:
        raise DomainError(f"denominator must be > 0, got {denom}")
    return p_v * (1.0 - p_v) * delta / denom


def bayes_selective_accuracy(p_v, s_cor, s_err):
    """Selective accuracy by Bayes' rule on the answering event.

    A_c = s_cor * p_v / (s_cor * p_v + s_err * (1 - p_v)). This is the
    independent cross-check route for accuracy_gain; both are kept so the
    identity stays testable.
    """
    if not 0.0 < p_v < 1.0:
        raise DomainError(f"p_v must be in (0, 1), got {p_v}")
    if not (0.0 <= s_cor <= 1.0 and 0.0 <= s_err <= 1.0):
        raise DomainError("survival values must lie in [0, 1]")
    denom = s_cor * p_v + s_err * (1.0 - p_v)
    if denom <= 0.0:
        raise DomainError("no probability mass answers at this threshold")
    return s_cor * p_v / denom


def dkw_epsilon(n, delta):
    """DKW deviation level eps_n(delta) = sqrt(log(4 / delta) / (2 n))."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if not 0.0 < delta < 1.0:
        raise RangeError(f"delta must be in (0, 1), got {delta}")
    return math.sqrt(math.log(4.0 / delta) / (2.0 * n))


def concentration_bound(n, delta, s0):
    """Finite-sample bound 4 * eps_n(delta) / s0 on the predictor error."""
    if not s0 > 0.0:
        raise DomainError(f"answering margin s0 must be > 0, got {s0}")
    return 4.0 * dkw_epsilon(n, delta) / s0


def min_calibration_size(delta, s0):
    """Smallest n satisfying the sample-size condition n >= 2 log(4/delta) / s0^2."""
    if not 0.0 < delta < 1.0:
        raise RangeError(f"delta must be in (0, 1), got {delta}")
    if not s0 > 0.0:
        raise DomainError(f"answering margin s0 must be > 0, got {s0}")
    return 2.0 * math.log(4.0 / delta) / (s0 * s0)


def plugin_predictor(outcomes, delta0=None, delta=0.05):
    """Predict selective accuracy at every grid threshold from one sample.

    Parameters
    ----------
    outcomes : sequence of VoteOutcome
        Calibration outcomes; both strata must be present.
    delta0 : float or None
        Operating-set parameter: the bound is stated over grid points with
        empirical separability gap >= delta0. Any delta0 > 0 keeps the set
        inside the answered region automatically (a positive gap forces a
        positive tail). None, the default, means "strictly positive gap".
        The top grid point always has zero gap AND zero yield, so
        delta0 <= 0 always trips the zero-yield error below.
    delta : float
        Confidence level of the finite-sample bound.

    Returns
    -------
    PredictorOutput
        a_c_hat uses the numerically stable ratio G_hat / H_hat; the
        closed-form variant (p_v_hat plus accuracy_gain of the profile
        values) is algebraically identical and kept as a separate route
        for verification.

    Raises
    ------
    DegenerateStratum
        When one stratum is empty.
    DomainError
        When the operating set is empty or its smallest answered fraction
        is zero.
    """
    nu, correct = outcome_arrays(outcomes)
    return plugin_predictor_from_arrays(nu, correct, delta0=delta0, delta=delta)


def plugin_predictor_from_arrays(nu, correct, delta0=None, delta=0.05):
    """Array-level plugin_predictor: same contract, on parallel arrays."""
    nu = np.asarray(nu, dtype=float)
    correct = np.asarray(correct, dtype=bool)
    profile = separability_profile_from_arrays(nu, correct)
    n = nu.size
    grid = profile.grid
    nu_sorted = np.sort(nu)
    cor_sorted = np.sort(nu[correct])
    h_hat = (n - np.searchsorted(nu_sorted, grid, side="right")) / n
    g_hat = (
        profile.n_cor - np.searchsorted(cor_sorted, grid, side="right")
    ) / n
    a_c_hat = np.divide(
        g_hat,
        h_hat,
        out=np.full(len(grid), np.nan),
        where=h_hat > 0,
    )
    if delta0 is None:
        operating = profile.delta > 0.0
        if not operating.any():
            raise DomainError(
                "no grid point has a positive separability gap; there is "
                "nothing for abstention to exploit"
            )
    else:
        operating = profile.delta >= delta0
        if not operating.any():
            raise DomainError(
                f"no grid point has separability gap >= {delta0}; "
                "widen the operating set"
            )
    s0_hat = float(h_hat[operating].min())
    if s0_hat <= 0.0:
        raise DomainError("operating set contains a point with zero yield")
    eps = dkw_epsilon(n, delta)
    return PredictorOutput(
        grid=grid,
        a_c_hat=a_c_hat,
        gain_hat=a_c_hat - profile.p_v_hat,
        yield_hat=h_hat,
        g_hat=g_hat,
        h_hat=h_hat,
        operating_set=operating,
        s0_hat=s0_hat,
        bound=4.0 * eps / s0_hat,
        epsilon=eps,
        p_v_hat=profile.p_v_hat,
        n=n,
        delta=delta,
        delta0=delta0,
    )
