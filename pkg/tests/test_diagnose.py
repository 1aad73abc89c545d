"""Separability profiles, closed-form gains, the plug-in predictor."""

import math

import numpy as np
import pytest

from votegate.diagnose import (
    accuracy_gain,
    bayes_selective_accuracy,
    concentration_bound,
    dkw_epsilon,
    min_calibration_size,
    plugin_predictor,
    plugin_predictor_from_arrays,
    selective_accuracy,
    separability_profile,
    separability_profile_from_arrays,
    survival_from_hazards,
    yield_fraction,
)
from votegate.errors import (
    DegenerateStratum,
    DomainError,
    EmptyInput,
    EmptySelection,
    RangeError,
)

from conftest import outcomes


def random_arrays(rng, n=None, p=0.7, quantize=None):
    n = n or int(rng.integers(10, 200))
    nu = rng.uniform(0.05, 1.0, size=n)
    if quantize:
        nu = np.ceil(nu * quantize) / quantize
    cor = rng.random(n) < p
    # profiles need both strata
    cor[0], cor[1] = True, False
    return nu, cor


def predictor_arrays(rng, n=None, quantize=12):
    """Random arrays with a guaranteed positive gap somewhere.

    Unstructured noise can have delta <= 0 at every grid point, which the
    predictor rightly refuses; capping the error stratum below the top
    grid value makes the gap positive at the largest error confidence.
    """
    nu, cor = random_arrays(rng, n=n, quantize=quantize)
    nu = np.concatenate([nu, [1.0, 1.0]])
    cor = np.concatenate([cor, [True, True]])
    nu[~cor] = np.minimum(nu[~cor], 1.0 - 1.0 / quantize)
    return nu, cor


# ---------------------------------------------------------------- profile


def test_profile_hand_values():
    outs = outcomes([(0.3, False), (0.6, True), (0.9, True)])
    prof = separability_profile(outs)
    np.testing.assert_array_equal(prof.grid, [0.3, 0.6, 0.9])
    np.testing.assert_array_equal(prof.s_cor, [1.0, 0.5, 0.0])
    np.testing.assert_array_equal(prof.s_err, [0.0, 0.0, 0.0])
    np.testing.assert_array_equal(prof.delta, [1.0, 0.5, 0.0])
    np.testing.assert_array_equal(prof.h_cor, [0.0, 0.5, 1.0])
    np.testing.assert_array_equal(prof.h_err, [1.0, 0.0, 0.0])
    np.testing.assert_array_equal(prof.delta_strict, [1.0, -0.5, -1.0])
    assert prof.p_v_hat == 2 / 3
    assert prof.n_cor == 2 and prof.n_err == 1 and prof.n == 3


def test_profile_requires_both_strata():
    with pytest.raises(DegenerateStratum) as err:
        separability_profile(outcomes([(0.5, True), (0.9, True)]))
    assert err.value.p_v_hat == 1.0
    with pytest.raises(DegenerateStratum) as err:
        separability_profile(outcomes([(0.5, False)]))
    assert err.value.p_v_hat == 0.0
    with pytest.raises(EmptyInput):
        separability_profile_from_arrays([], [])


def test_profile_tails_match_direct_counts():
    rng = np.random.default_rng(7)
    for _ in range(30):
        nu, cor = random_arrays(rng, quantize=8)
        prof = separability_profile_from_arrays(nu, cor)
        for g, sc, se in zip(prof.grid, prof.s_cor, prof.s_err):
            assert sc == (nu[cor] > g).sum() / cor.sum()
            assert se == (nu[~cor] > g).sum() / (~cor).sum()


def test_hazard_definition_matches_direct_counts():
    rng = np.random.default_rng(13)
    nu, cor = random_arrays(rng, n=120, quantize=6)
    prof = separability_profile_from_arrays(nu, cor)
    stratum = nu[cor]
    for g, h in zip(prof.grid, prof.h_cor):
        at_risk = (stratum >= g).sum()
        exits = (stratum == g).sum()
        assert h == (exits / at_risk if at_risk else 0.0)


def test_survival_product_recovery():
    # cumprod of (1 - hazard) telescopes back to the strict tails
    rng = np.random.default_rng(19)
    for _ in range(30):
        nu, cor = random_arrays(rng, quantize=10)
        prof = separability_profile_from_arrays(nu, cor)
        np.testing.assert_allclose(
            survival_from_hazards(prof.h_cor), prof.s_cor, atol=1e-12
        )
        np.testing.assert_allclose(
            survival_from_hazards(prof.h_err), prof.s_err, atol=1e-12
        )


def test_selective_accuracy_and_yield():
    outs = outcomes([(0.3, False), (0.6, True), (0.9, True)])
    assert selective_accuracy(outs, 0.65) == 1.0
    assert selective_accuracy(outs, 0.0) == 2 / 3
    assert yield_fraction(outs, 0.45) == 2 / 3
    assert yield_fraction(outs, 0.9) == 0.0  # strict: at the max nothing answers
    with pytest.raises(EmptySelection):
        selective_accuracy(outs, 0.95)
    with pytest.raises(EmptyInput):
        yield_fraction([], 0.5)


# ------------------------------------------------------------ closed form


def test_gain_frozen_values():
    assert accuracy_gain(0.5, 0.5, 0.25) == pytest.approx(1 / 6, abs=1e-15)
    assert accuracy_gain(0.5, 0.5, 0.0) == pytest.approx(0.5, abs=1e-15)
    # zero gap means zero gain regardless of the rest
    assert accuracy_gain(0.37, 0.8, 0.8) == 0.0
    assert bayes_selective_accuracy(0.5, 0.5, 0.0) == 1.0
    assert bayes_selective_accuracy(0.37, 0.8, 0.8) == pytest.approx(0.37, abs=1e-15)


def test_gain_matches_bayes_form():
    rng = np.random.default_rng(31)
    for _ in range(1000):
        p_v = float(rng.uniform(0.01, 0.99))
        s_cor = float(rng.uniform(1e-6, 1.0))
        s_err = float(rng.uniform(0.0, 1.0))
        gain = accuracy_gain(p_v, s_cor, s_err)
        a_c = bayes_selective_accuracy(p_v, s_cor, s_err)
        assert p_v + gain == pytest.approx(a_c, abs=1e-12)


def test_gain_domain_errors():
    with pytest.raises(DomainError):
        accuracy_gain(0.0, 0.5, 0.2)
    with pytest.raises(DomainError):
        accuracy_gain(1.0, 0.5, 0.2)
    with pytest.raises(DomainError):
        accuracy_gain(0.5, 1.2, 0.2)
    with pytest.raises(DomainError):
        accuracy_gain(0.5, 0.5, -0.1)
    with pytest.raises(DomainError):
        accuracy_gain(0.5, 0.0, 0.0)  # nothing answers: denominator 0
    with pytest.raises(DomainError):
        bayes_selective_accuracy(0.5, 0.0, 0.0)


def test_dkw_and_bound_values():
    eps = dkw_epsilon(200, 0.05)
    assert eps == pytest.approx(0.10466645397014605, rel=1e-15)
    assert eps == pytest.approx(math.sqrt(math.log(80.0) / 400.0), rel=1e-15)
    assert concentration_bound(200, 0.05, 0.5) == pytest.approx(
        0.8373316317611684, rel=1e-15
    )
    assert min_calibration_size(0.05, 0.5) == pytest.approx(
        35.05621307739105, rel=1e-15
    )
    # the bound shrinks like 1/sqrt(n)
    assert dkw_epsilon(800, 0.05) == pytest.approx(eps / 2.0, rel=1e-15)


def test_dkw_input_validation():
    with pytest.raises(DomainError):
        dkw_epsilon(0, 0.05)
    with pytest.raises(RangeError):
        dkw_epsilon(100, 0.0)
    with pytest.raises(RangeError):
        dkw_epsilon(100, 1.0)
    with pytest.raises(DomainError):
        concentration_bound(100, 0.05, 0.0)
    with pytest.raises(RangeError):
        min_calibration_size(1.5, 0.5)
    with pytest.raises(DomainError):
        min_calibration_size(0.05, -1.0)


# ------------------------------------------------------------- predictor


def test_predictor_hand_case():
    outs = outcomes([(0.3, False), (0.6, True), (0.9, True)])
    pred = plugin_predictor(outs, delta0=None, delta=0.05)
    np.testing.assert_array_equal(pred.grid, [0.3, 0.6, 0.9])
    np.testing.assert_array_equal(pred.h_hat, [2 / 3, 1 / 3, 0.0])
    np.testing.assert_array_equal(pred.g_hat, [2 / 3, 1 / 3, 0.0])
    np.testing.assert_array_equal(pred.a_c_hat[:2], [1.0, 1.0])
    assert math.isnan(pred.a_c_hat[2])  # nothing answers above the top point
    np.testing.assert_array_equal(pred.operating_set, [True, True, False])
    assert pred.s0_hat == 1 / 3
    assert pred.p_v_hat == 2 / 3
    assert pred.epsilon == dkw_epsilon(3, 0.05)
    assert pred.bound == 4.0 * pred.epsilon / pred.s0_hat
    np.testing.assert_allclose(
        pred.gain_hat[:2], pred.a_c_hat[:2] - pred.p_v_hat, atol=1e-15
    )


def test_predictor_ratio_equals_conditional_accuracy():
    rng = np.random.default_rng(37)
    for _ in range(30):
        nu, cor = predictor_arrays(rng)
        pred = plugin_predictor_from_arrays(nu, cor)
        for g, a_hat, h in zip(pred.grid, pred.a_c_hat, pred.h_hat):
            if h == 0.0:
                assert math.isnan(a_hat)
                continue
            direct = (cor & (nu > g)).sum() / (nu > g).sum()
            assert a_hat == pytest.approx(direct, abs=1e-12)


def test_predictor_ratio_equals_gain_route():
    rng = np.random.default_rng(43)
    nu, cor = predictor_arrays(rng, n=400, quantize=16)
    prof = separability_profile_from_arrays(nu, cor)
    pred = plugin_predictor_from_arrays(nu, cor)
    for sc, se, a_hat, h in zip(prof.s_cor, prof.s_err, pred.a_c_hat, pred.h_hat):
        if h == 0.0:
            continue
        bayes = bayes_selective_accuracy(prof.p_v_hat, sc, se)
        assert a_hat == pytest.approx(bayes, abs=1e-12)


def test_predictor_h_hat_mixes_the_strata():
    rng = np.random.default_rng(47)
    nu, cor = random_arrays(rng, n=300, quantize=9)
    prof = separability_profile_from_arrays(nu, cor)
    pred = plugin_predictor_from_arrays(nu, cor)
    mix = prof.p_v_hat * prof.s_cor + (1 - prof.p_v_hat) * prof.s_err
    np.testing.assert_allclose(pred.h_hat, mix, atol=1e-12)


def test_predictor_default_operating_set_needs_positive_gap():
    # equal strata: the gap is zero everywhere, nothing to exploit
    nu = np.array([0.4, 0.7, 0.4, 0.7])
    cor = np.array([True, True, False, False])
    with pytest.raises(DomainError, match="positive separability gap"):
        plugin_predictor_from_arrays(nu, cor, delta0=None)


def test_predictor_explicit_delta0_semantics():
    nu, cor = np.array([0.3, 0.6, 0.9]), np.array([False, True, True])
    # delta at the grid is [1.0, 0.5, 0.0]
    pred = plugin_predictor_from_arrays(nu, cor, delta0=0.5)
    np.testing.assert_array_equal(pred.operating_set, [True, True, False])
    pred = plugin_predictor_from_arrays(nu, cor, delta0=0.7)
    np.testing.assert_array_equal(pred.operating_set, [True, False, False])
    assert pred.s0_hat == 2 / 3
    with pytest.raises(DomainError, match="widen"):
        plugin_predictor_from_arrays(nu, cor, delta0=1.5)
    # delta0 = 0 pulls the zero-yield top grid point into the set
    with pytest.raises(DomainError, match="zero yield"):
        plugin_predictor_from_arrays(nu, cor, delta0=0.0)


def test_predictor_carries_its_parameters():
    nu, cor = np.array([0.3, 0.6, 0.9]), np.array([False, True, True])
    pred = plugin_predictor_from_arrays(nu, cor, delta0=0.25, delta=0.2)
    assert pred.delta == 0.2
    assert pred.delta0 == 0.25
    assert pred.n == 3
