"""Multi-split experiments, guarantee validation, and ablation sweeps.

Every split or trial is an independent job owning a seed derived from
the experiment seed via SeedSequence.spawn, with no mutable state shared
between jobs; the loop over jobs is therefore trivially parallelizable
and report assembly is an ordered reduction over the job index. Results
are plain JSON-ready dicts with no timestamps, so a rerun of the same
config is byte-identical.
"""

from __future__ import annotations

import math
from dataclasses import replace

import numpy as np

from ..aggregate import aggregate_dataset, outcome_arrays
from ..calibrate import crc_threshold, risk_curve_from_arrays
from ..diagnose import plugin_predictor_from_arrays, separability_profile_from_arrays
from ..errors import (
    ConfigError,
    DegenerateStratum,
    DomainError,
    InsufficientPoints,
    VotegateError,
)
from ..frontier import frontier_auc, sweep_from_arrays
from ..records import parse_dataset
from ..synth import simulate_outcomes

REPORT_SCHEMA = "votegate-report/v1"
GUARANTEE_RULE = "mean realized risk <= alpha + 3 * SE"


def _with_context(exc, where):
    """Best-effort re-wrap of a module error with split/alpha context."""
    try:
        return exc.__class__(f"{where}: {exc}")
    except Exception:
        return exc


def _weight_dict(weight):
    out = {"kind": weight.kind}
    if weight.kind == "exponential":
        out["beta"] = weight.beta
    elif weight.kind == "linear":
        out["shift"] = weight.shift
        out["floor"] = weight.floor
    return out


def _score_law_dict(law):
    if law.kind == "normal":
        return {"kind": "normal", "mu": law.mu, "sigma": law.sigma}
    return {"kind": "finite", "values": list(law.values), "probs": list(law.probs)}


def _generator_dict(spec):
    if spec is None:
        return None
    out = {"m": spec.m, "answers": spec.answers, "mixture_mode": spec.mixture_mode}
    if spec.mixture is not None:
        out["mixture"] = [
            {"component": _generator_dict(comp), "weight": w}
            for comp, w in spec.mixture
        ]
        return out
    if isinstance(spec.pi_law, str):
        out["pi_law"] = spec.pi_law
    else:
        out["classes"] = [
            {"pi": list(cls.pi), "weight": cls.weight, "truth_index": cls.truth_index}
            for cls in spec.pi_law
        ]
    if isinstance(spec.score_laws, str):
        out["score_laws"] = spec.score_laws
    else:
        out["score_correct"] = _score_law_dict(spec.score_laws[0])
        out["score_incorrect"] = _score_law_dict(spec.score_laws[1])
    return out


def _config_dict(config):
    return {
        "input_path": config.input_path,
        "generator": _generator_dict(config.generator),
        "test_generator": _generator_dict(config.test_generator),
        "score_name": config.score_name,
        "weight": _weight_dict(config.weight),
        "alphas": list(config.alphas),
        "n_cal": config.n_cal,
        "n_test": config.n_test,
        "n_splits": config.n_splits,
        "seed": config.seed,
        "delta0": config.delta0,
        "delta": config.delta,
        "output_dir": config.output_dir,
        "allow_split_resampling": config.allow_split_resampling,
    }


def _versions():
    import sys

    from .. import __version__

    return {
        "package": __version__,
        "numpy": np.__version__,
        "python": ".".join(str(v) for v in sys.version_info[:3]),
    }


class _DatasetSource:
    """Split provider over one fixed dataset: aggregate once, index per split."""

    mode = "dataset"

    def __init__(self, config):
        dataset = parse_dataset(config.input_path)
        outcomes = aggregate_dataset(dataset, config.score_name, config.weight)
        self.nu, self.correct = outcome_arrays(outcomes)
        self.n_total = len(outcomes)
        if config.n_cal >= self.n_total:
            raise ConfigError(
                f"n_cal={config.n_cal} leaves no test data in a dataset of "
                f"{self.n_total}"
            )
        self.n_test = (
            config.n_test
            if config.n_test is not None
            else self.n_total - config.n_cal
        )
        if config.n_cal + self.n_test > self.n_total:
            raise ConfigError(
                f"n_cal + n_test = {config.n_cal + self.n_test} exceeds the "
                f"dataset size {self.n_total}"
            )
        self.n_cal = config.n_cal

    def draw(self, seed):
        rng = np.random.default_rng(seed)
        perm = rng.permutation(self.n_total)
        cal = perm[: self.n_cal]
        test = perm[self.n_cal : self.n_cal + self.n_test]
        # different index ranges of one permutation cannot overlap
        assert np.intersect1d(cal, test).size == 0
        return (
            (self.nu[cal], self.correct[cal]),
            (self.nu[test], self.correct[test]),
        )


class _GeneratorSource:
    """Split provider drawing fresh calibration and test pools per split."""

    mode = "generator"

    def __init__(self, config):
        self.generator = config.generator
        self.test_generator = config.test_generator
        self.n_cal = config.n_cal
        self.n_test = config.n_test
        self.weight = config.weight

    def draw(self, seed):
        if self.test_generator is None:
            nu, correct = simulate_outcomes(
                self.generator, self.n_cal + self.n_test, seed, self.weight
            )
            return (
                (nu[: self.n_cal], correct[: self.n_cal]),
                (nu[self.n_cal :], correct[self.n_cal :]),
            )
        cal_seed, test_seed = seed.spawn(2)
        cal = simulate_outcomes(self.generator, self.n_cal, cal_seed, self.weight)
        test = simulate_outcomes(
            self.test_generator, self.n_test, test_seed, self.weight
        )
        return cal, test


def _make_source(config):
    if config.input_path is not None:
        return _DatasetSource(config)
    return _GeneratorSource(config)


def _split_seeds(config):
    return np.random.SeedSequence(config.seed).spawn(config.n_splits)


def _tail_ratio(nu, correct, grid):
    """Empirical selective accuracy of (nu, correct) at each grid point."""
    n = nu.size
    nu_sorted = np.sort(nu)
    cor_sorted = np.sort(nu[correct])
    h = (n - np.searchsorted(nu_sorted, grid, side="right")) / n
    g = (cor_sorted.size - np.searchsorted(cor_sorted, grid, side="right")) / n
    return np.divide(g, h, out=np.full(grid.size, np.nan), where=h > 0)


def _alpha_rows(split_index, curve, nu_test, correct_test, alphas):
    rows = []
    for alpha in alphas:
        policy = crc_threshold(curve, alpha)
        if policy.always_abstain:
            answered = np.zeros(nu_test.size, dtype=bool)
        else:
            answered = nu_test > policy.lambda_hat
        n_answered = int(answered.sum())
        wrong_answered = int((answered & ~correct_test).sum())
        rows.append(
            {
                "split": split_index,
                "alpha": alpha,
                "lambda_hat": policy.lambda_hat,
                "always_abstain": policy.always_abstain,
                "risk": wrong_answered / nu_test.size,
                "yield": n_answered / nu_test.size,
                "a_c": (
                    int((answered & correct_test).sum()) / n_answered
                    if n_answered > 0
                    else None
                ),
                "n_answered": n_answered,
            }
        )
    return rows


def _predictor_row(split_index, nu_cal, correct_cal, nu_test, correct_test, config):
    base = {
        "split": split_index,
        "degenerate": False,
        "error": None,
        "s0_hat": None,
        "epsilon": None,
        "bound": None,
        "gap": None,
        "within_bound": None,
        "n_operating": 0,
    }
    try:
        pred = plugin_predictor_from_arrays(
            nu_cal, correct_cal, delta0=config.delta0, delta=config.delta
        )
    except (DegenerateStratum, DomainError) as exc:
        base["degenerate"] = True
        base["error"] = str(exc)
        return base
    a_c_test = _tail_ratio(nu_test, correct_test, pred.grid)
    usable = pred.operating_set & ~np.isnan(pred.a_c_hat) & ~np.isnan(a_c_test)
    base.update(
        s0_hat=pred.s0_hat,
        epsilon=pred.epsilon,
        bound=pred.bound,
        n_operating=int(usable.sum()),
    )
    if usable.any():
        gap = float(np.max(np.abs(pred.a_c_hat[usable] - a_c_test[usable])))
        base["gap"] = gap
        base["within_bound"] = bool(gap <= pred.bound)
    return base


def _mean_std(values):
    values = [v for v in values if v is not None]
    if not values:
        return None, None
    mean = float(np.mean(values))
    std = float(np.std(values, ddof=1)) if len(values) >= 2 else None
    return mean, std


def _aggregate_rows(rows, alphas, n_splits):
    aggregates = []
    for alpha in alphas:
        sub = [r for r in rows if r["alpha"] == alpha]
        risks = [r["risk"] for r in sub]
        mean_risk, std_risk = _mean_std(risks)
        mean_yield, std_yield = _mean_std([r["yield"] for r in sub])
        mean_a_c, std_a_c = _mean_std([r["a_c"] for r in sub])
        mean_lam, std_lam = _mean_std([r["lambda_hat"] for r in sub])
        aggregates.append(
            {
                "alpha": alpha,
                "n_splits": n_splits,
                "mean_risk": mean_risk,
                "std_risk": std_risk,
                "se_risk": (
                    std_risk / math.sqrt(len(sub)) if std_risk is not None else None
                ),
                "mean_yield": mean_yield,
                "std_yield": std_yield,
                "mean_a_c": mean_a_c,
                "std_a_c": std_a_c,
                "n_a_c_defined": sum(1 for r in sub if r["a_c"] is not None),
                "mean_lambda_hat": mean_lam,
                "std_lambda_hat": std_lam,
                "n_always_abstain": sum(1 for r in sub if r["always_abstain"]),
            }
        )
    return aggregates


def _none_if_nan(x):
    x = float(x)
    return None if math.isnan(x) else x


def _profile_section(nu_cal, correct_cal, config):
    """Grid profile of the first calibration split, CSV-ready rows."""
    try:
        profile = separability_profile_from_arrays(nu_cal, correct_cal)
    except DegenerateStratum as exc:
        return {"degenerate": True, "error": str(exc), "rows": []}
    try:
        pred = plugin_predictor_from_arrays(
            nu_cal, correct_cal, delta0=config.delta0, delta=config.delta
        )
        a_c_hat = pred.a_c_hat
        yield_hat = pred.h_hat
        predictor = {
            "s0_hat": pred.s0_hat,
            "epsilon": pred.epsilon,
            "bound": pred.bound,
            "delta": pred.delta,
            "delta0": pred.delta0,
        }
    except (DegenerateStratum, DomainError) as exc:
        a_c_hat = _tail_ratio(nu_cal, correct_cal, profile.grid)
        n = nu_cal.size
        yield_hat = (
            n - np.searchsorted(np.sort(nu_cal), profile.grid, side="right")
        ) / n
        predictor = {"error": str(exc)}
    rows = []
    for i, lam in enumerate(profile.grid):
        rows.append(
            {
                "lambda": float(lam),
                "s_cor": float(profile.s_cor[i]),
                "s_err": float(profile.s_err[i]),
                "delta": float(profile.delta[i]),
                "h_cor": float(profile.h_cor[i]),
                "h_err": float(profile.h_err[i]),
                "delta_strict": float(profile.delta_strict[i]),
                "a_c_hat": _none_if_nan(a_c_hat[i]),
                "yield": float(yield_hat[i]),
            }
        )
    return {
        "degenerate": False,
        "p_v_hat": profile.p_v_hat,
        "n_cor": profile.n_cor,
        "n_err": profile.n_err,
        "predictor": predictor,
        "rows": rows,
    }


def _frontier_section(nu_test, correct_test):
    points = sweep_from_arrays(nu_test, correct_test)
    rows = [
        {
            "lambda": p.lambda_,
            "yield": p.yield_,
            "a_c": p.a_c,
            "n_selected": p.n_selected,
        }
        for p in points
    ]
    try:
        summary = frontier_auc(points)
    except InsufficientPoints as exc:
        return {"rows": rows, "error": str(exc)}
    return {
        "rows": rows,
        "auc": summary.auc,
        "y_min": summary.domain[0],
        "y_max": summary.domain[1],
        "pareto_violations": summary.pareto_violations,
    }


def run_experiment(config):
    """Run the full multi-split protocol described by a config.

    Per split: draw (or index) calibration and test outcomes, fit the
    abstention threshold on calibration for each alpha, and measure
    realized confident-error rate, selective accuracy, and yield on the
    held-out test side, plus the calibration-side accuracy prediction
    against the test-side observation. Deterministic given the config.
    """
    source = _make_source(config)
    seeds = _split_seeds(config)
    rows = []
    predictor_rows = []
    first_split = None
    for s, seed in enumerate(seeds):
        try:
            (nu_cal, cor_cal), (nu_test, cor_test) = source.draw(seed)
            curve = risk_curve_from_arrays(nu_cal, cor_cal)
            rows.extend(_alpha_rows(s, curve, nu_test, cor_test, config.alphas))
        except VotegateError as exc:
            raise _with_context(exc, f"split {s}") from exc
        predictor_rows.append(
            _predictor_row(s, nu_cal, cor_cal, nu_test, cor_test, config)
        )
        if first_split is None:
            first_split = (nu_cal, cor_cal, nu_test, cor_test)

    nu_cal0, cor_cal0, nu_test0, cor_test0 = first_split
    gaps = [r["gap"] for r in predictor_rows if r["gap"] is not None]
    within = [r["within_bound"] for r in predictor_rows if r["within_bound"] is not None]
    predictor_aggregate = {
        "mean_gap": float(np.mean(gaps)) if gaps else None,
        "max_gap": float(np.max(gaps)) if gaps else None,
        "frac_within_bound": (
            sum(1 for w in within if w) / len(within) if within else None
        ),
        "n_degenerate": sum(1 for r in predictor_rows if r["degenerate"]),
    }
    return {
        "schema": REPORT_SCHEMA,
        "versions": _versions(),
        "config": _config_dict(config),
        "mode": source.mode,
        "rows": rows,
        "aggregates": _aggregate_rows(rows, config.alphas, config.n_splits),
        "predictor_rows": predictor_rows,
        "predictor_aggregate": predictor_aggregate,
        "profile": _profile_section(nu_cal0, cor_cal0, config),
        "frontier": _frontier_section(nu_test0, cor_test0),
    }


def validate_guarantee(config):
    """Check the confident-error guarantee by independent Monte Carlo trials.

    Each trial draws fresh calibration AND fresh test pools (the joint
    draw the guarantee is stated over), fits the threshold per alpha on
    the calibration side, and records the realized confident-error rate
    on the test side. Passes when the mean realized risk stays within
    3 standard errors of alpha. A fixed dataset only supports the weaker
    split-resampling statement, so it requires the explicit
    allow_split_resampling flag and is labeled as such.
    """
    if config.input_path is not None and not config.allow_split_resampling:
        raise ConfigError(
            "guarantee validation needs fresh draws per trial; a fixed dataset "
            "tests a related but weaker statement. Set allow_split_resampling "
            "to run in split-resampling mode."
        )
    if config.n_splits < 2:
        raise ConfigError("guarantee validation needs n_splits >= 2 trials")
    source = _make_source(config)
    mode = "split-resampling" if source.mode == "dataset" else "fresh-draws"
    seeds = _split_seeds(config)
    risks = {alpha: [] for alpha in config.alphas}
    yields = {alpha: [] for alpha in config.alphas}
    lambdas = {alpha: [] for alpha in config.alphas}
    for s, seed in enumerate(seeds):
        try:
            (nu_cal, cor_cal), (nu_test, cor_test) = source.draw(seed)
            curve = risk_curve_from_arrays(nu_cal, cor_cal)
            for row in _alpha_rows(s, curve, nu_test, cor_test, config.alphas):
                risks[row["alpha"]].append(row["risk"])
                yields[row["alpha"]].append(row["yield"])
                lambdas[row["alpha"]].append(row["lambda_hat"])
        except VotegateError as exc:
            raise _with_context(exc, f"trial {s}") from exc
    alpha_rows = []
    for alpha in config.alphas:
        r = np.asarray(risks[alpha])
        mean = float(r.mean())
        std = float(r.std(ddof=1))
        se = std / math.sqrt(r.size)
        threshold = alpha + 3.0 * se
        alpha_rows.append(
            {
                "alpha": alpha,
                "n_trials": int(r.size),
                "mean_risk": mean,
                "std_risk": std,
                "se_risk": se,
                "threshold": threshold,
                "passed": bool(mean <= threshold),
                "mean_yield": float(np.mean(yields[alpha])),
                "mean_lambda_hat": float(np.mean(lambdas[alpha])),
            }
        )
    return {
        "schema": "votegate-guarantee/v1",
        "versions": _versions(),
        "config": _config_dict(config),
        "mode": mode,
        "rule": GUARANTEE_RULE,
        "shifted_test": config.test_generator is not None,
        "alphas": alpha_rows,
        "passed": all(row["passed"] for row in alpha_rows),
    }


def _generator_with_m(spec, m):
    if spec is None:
        return None
    if spec.mixture is not None:
        comps = tuple(
            (replace(comp, m=m), w) for comp, w in spec.mixture
        )
        return replace(spec, m=m, mixture=comps)
    return replace(spec, m=m)


ABLATION_AXES = ("m", "n_cal", "weight", "score")


def ablation_sweep(config, axis, values):
    """Rerun the experiment along one design axis and tabulate aggregates.

    axis "m" varies pool size (generator inputs only), "n_cal" the
    calibration size, "weight" the weighting scheme (values are
    WeightSpec), and "score" the score name (values are strings).
    """
    if axis not in ABLATION_AXES:
        raise ConfigError(f"unknown ablation axis {axis!r}; expected {ABLATION_AXES}")
    if not values:
        raise ConfigError("ablation needs at least one axis value")
    runs = []
    for value in values:
        if axis == "m":
            if config.generator is None:
                raise ConfigError("the m axis needs a generator input")
            variant = replace(
                config,
                generator=_generator_with_m(config.generator, value),
                test_generator=_generator_with_m(config.test_generator, value),
            )
            label = value
        elif axis == "n_cal":
            variant = replace(config, n_cal=value)
            label = value
        elif axis == "weight":
            variant = replace(config, weight=value)
            label = _weight_dict(value)
        else:
            variant = replace(config, score_name=value)
            label = value
        report = run_experiment(variant)
        runs.append(
            {
                "value": label,
                "aggregates": report["aggregates"],
                "predictor_aggregate": report["predictor_aggregate"],
            }
        )
    return {
        "schema": "votegate-ablation/v1",
        "versions": _versions(),
        "config": _config_dict(config),
        "axis": axis,
        "runs": runs,
    }
