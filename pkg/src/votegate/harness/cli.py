"""Command-line interface.

Subcommands cover the whole pipeline: ingest, split, calibrate,
evaluate, diagnose, frontier, simulate, validate-guarantee, ablate.
Every subcommand accepts --config (TOML experiment config supplying
defaults), --seed, and --out; explicit flags beat the config, which
beats built-in defaults. All artifacts land under the output directory
together with a manifest of checksums.

Exit codes: 0 success, 1 validation failure (bad data, degenerate
strata, a failed guarantee), 2 usage error (bad flags, bad config,
unreadable files).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

from ..aggregate import WeightSpec, aggregate_dataset
from ..calibrate import (
    apply_policy,
    crc_threshold,
    policy_from_json,
    policy_to_json,
    realized_risk,
    risk_curve,
)
from ..diagnose import plugin_predictor, separability_profile
from ..errors import ConfigError, VotegateError
from ..frontier import frontier_auc, sweep
from ..records import parse_dataset, split as split_dataset, write_dataset
from ..synth import PRESETS, generate_dataset, preset
from . import figures, report
from .config import OUTPUT_DIR_ENV, ExperimentConfig, load_config
from .experiment import ABLATION_AXES, ablation_sweep, validate_guarantee


def _add_common(sub):
    sub.add_argument("--config", help="TOML experiment config supplying defaults")
    sub.add_argument("--seed", type=int, help="seed override")
    sub.add_argument("--out", help="output directory override")


def _add_weight_flags(sub):
    sub.add_argument(
        "--weight-kind", choices=("uniform", "linear", "exponential"),
        help="path weighting scheme",
    )
    sub.add_argument("--beta", type=float, help="exponential weight temperature")
    sub.add_argument("--shift", type=float, help="linear weight shift")
    sub.add_argument("--floor", type=float, help="linear weight floor")


def _add_score_flag(sub):
    sub.add_argument("--score", help="score name to weight by")


class _Settings:
    """Effective settings for one invocation: config defaults + flag overrides."""

    def __init__(self, args):
        self.config = load_config(args.config) if args.config else None
        self.seed = args.seed if args.seed is not None else (
            self.config.seed if self.config else 0
        )
        out = getattr(args, "out", None)
        if out:
            self.out = out
        elif self.config:
            self.out = self.config.output_dir  # env already applied by load_config
        else:
            self.out = os.environ.get(OUTPUT_DIR_ENV) or "votegate-out"
        self.score_name = getattr(args, "score", None) or (
            self.config.score_name if self.config else "score"
        )
        base = self.config.weight if self.config else WeightSpec(kind="uniform")
        kind = getattr(args, "weight_kind", None) or base.kind
        self.weight = WeightSpec(
            kind=kind,
            beta=_pick(getattr(args, "beta", None), base.beta),
            shift=_pick(getattr(args, "shift", None), base.shift),
            floor=_pick(getattr(args, "floor", None), base.floor),
        )


def _pick(flag_value, default):
    return flag_value if flag_value is not None else default


def _experiment_config(settings, args):
    """The full ExperimentConfig for config-driven subcommands."""
    if settings.config is None:
        raise ConfigError("this subcommand needs --config")
    config = settings.config
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    return replace(config, output_dir=settings.out)


def _load_dataset(args):
    if not getattr(args, "input", None):
        raise ConfigError("this subcommand needs --input")
    return parse_dataset(args.input)


def _finish(out_dir, written, lines):
    report.write_manifest(out_dir, written)
    written.append(report.MANIFEST_NAME)
    for line in lines:
        print(line)
    print(f"wrote {len(written)} file(s) under {out_dir}")
    return 0


def _cmd_ingest(args):
    settings = _Settings(args)
    dataset = _load_dataset(args)
    os.makedirs(settings.out, exist_ok=True)
    path = os.path.join(settings.out, "ingested.jsonl")
    write_dataset(dataset, path)
    sizes = sorted({inst.m for inst in dataset})
    lines = [
        f"instances: {len(dataset)}",
        f"paths per prompt: {sizes[0]}" if len(sizes) == 1
        else f"paths per prompt: {sizes[0]}..{sizes[-1]} (inconsistent)",
        f"scores: {', '.join(sorted(dataset.score_names))}",
    ]
    return _finish(settings.out, ["ingested.jsonl"], lines)


def _cmd_split(args):
    settings = _Settings(args)
    dataset = _load_dataset(args)
    cal, test, plan = split_dataset(dataset, args.n_cal, settings.seed)
    os.makedirs(settings.out, exist_ok=True)
    write_dataset(cal, os.path.join(settings.out, "cal.jsonl"))
    write_dataset(test, os.path.join(settings.out, "test.jsonl"))
    report.write_json(
        os.path.join(settings.out, "split.json"),
        {
            "seed": plan.seed,
            "n_cal": plan.n_cal,
            "algorithm": plan.algorithm,
            "permutation": list(plan.permutation),
        },
    )
    lines = [f"calibration: {len(cal)} instances", f"test: {len(test)} instances"]
    return _finish(
        settings.out, ["cal.jsonl", "test.jsonl", "split.json"], lines
    )


def _cmd_calibrate(args):
    settings = _Settings(args)
    dataset = _load_dataset(args)
    outcomes = aggregate_dataset(dataset, settings.score_name, settings.weight)
    curve = risk_curve(outcomes)
    policy = crc_threshold(curve, args.alpha)
    os.makedirs(settings.out, exist_ok=True)
    with open(os.path.join(settings.out, "policy.json"), "w", encoding="utf-8") as fh:
        fh.write(policy_to_json(policy))
        fh.write("\n")
    report.write_csv(
        os.path.join(settings.out, "risk_curve.csv"),
        ("threshold", "risk"),
        [
            {"threshold": float(t), "risk": float(r)}
            for t, r in zip(curve.thresholds, curve.risks)
        ],
    )
    lines = [
        f"n_cal: {curve.n}",
        f"lambda_hat: {policy.lambda_hat}",
        f"always_abstain: {policy.always_abstain}",
    ]
    return _finish(settings.out, ["policy.json", "risk_curve.csv"], lines)


def _cmd_evaluate(args):
    settings = _Settings(args)
    dataset = _load_dataset(args)
    with open(args.policy, "r", encoding="utf-8") as fh:
        policy = policy_from_json(fh.read())
    outcomes = aggregate_dataset(dataset, settings.score_name, settings.weight)
    decisions = apply_policy(policy, outcomes)
    truths = [inst.truth for inst in dataset]
    risk = realized_risk(decisions, truths)
    answered = [d for d in decisions if d.action == "answer"]
    n_correct = sum(
        1 for d, t in zip(decisions, truths) if d.action == "answer" and d.answer == t
    )
    metrics = {
        "n": len(decisions),
        "n_answered": len(answered),
        "risk": risk,
        "yield": len(answered) / len(decisions) if decisions else 0.0,
        "a_c": n_correct / len(answered) if answered else None,
        "lambda_hat": policy.lambda_hat,
        "alpha": policy.alpha,
    }
    os.makedirs(settings.out, exist_ok=True)
    report.write_json(os.path.join(settings.out, "metrics.json"), metrics)
    report.write_csv(
        os.path.join(settings.out, "decisions.csv"),
        ("instance_id", "action", "answer", "confidence"),
        [
            {
                "instance_id": d.instance_id,
                "action": d.action,
                "answer": d.answer,
                "confidence": d.confidence,
            }
            for d in decisions
        ],
    )
    lines = [
        f"risk: {risk}",
        f"yield: {metrics['yield']}",
        f"selective accuracy: {metrics['a_c']}",
    ]
    return _finish(settings.out, ["metrics.json", "decisions.csv"], lines)


def _cmd_diagnose(args):
    settings = _Settings(args)
    dataset = _load_dataset(args)
    outcomes = aggregate_dataset(dataset, settings.score_name, settings.weight)
    profile = separability_profile(outcomes)
    delta0 = args.delta0 if args.delta0 is not None else (
        settings.config.delta0 if settings.config else None
    )
    delta = args.delta if args.delta is not None else (
        settings.config.delta if settings.config else 0.05
    )
    pred = plugin_predictor(outcomes, delta0=delta0, delta=delta)
    rows = []
    for i, lam in enumerate(profile.grid):
        a_c_hat = float(pred.a_c_hat[i])
        rows.append(
            {
                "lambda": float(lam),
                "s_cor": float(profile.s_cor[i]),
                "s_err": float(profile.s_err[i]),
                "delta": float(profile.delta[i]),
                "h_cor": float(profile.h_cor[i]),
                "h_err": float(profile.h_err[i]),
                "delta_strict": float(profile.delta_strict[i]),
                "a_c_hat": None if a_c_hat != a_c_hat else a_c_hat,
                "yield": float(pred.h_hat[i]),
            }
        )
    os.makedirs(os.path.join(settings.out, "figures"), exist_ok=True)
    report.write_csv(
        os.path.join(settings.out, "profile.csv"), report.PROFILE_COLUMNS, rows
    )
    summary = {
        "p_v_hat": profile.p_v_hat,
        "n_cor": profile.n_cor,
        "n_err": profile.n_err,
        "delta0": delta0,
        "delta": delta,
        "s0_hat": pred.s0_hat,
        "epsilon": pred.epsilon,
        "bound": pred.bound,
    }
    report.write_json(os.path.join(settings.out, "diagnose.json"), summary)
    written = ["profile.csv", "diagnose.json"]
    written.append(
        figures.profile_figure({"rows": rows}, settings.out)
    )
    lines = [
        f"vote accuracy: {profile.p_v_hat}",
        f"answering margin s0: {pred.s0_hat}",
        f"predictor bound (delta={delta}): {pred.bound}",
    ]
    return _finish(settings.out, written, lines)


def _cmd_frontier(args):
    settings = _Settings(args)
    dataset = _load_dataset(args)
    outcomes = aggregate_dataset(dataset, settings.score_name, settings.weight)
    points = sweep(outcomes)
    summary = frontier_auc(points)
    rows = [
        {
            "lambda": p.lambda_,
            "yield": p.yield_,
            "a_c": p.a_c,
            "n_selected": p.n_selected,
        }
        for p in points
    ]
    os.makedirs(os.path.join(settings.out, "figures"), exist_ok=True)
    report.write_csv(
        os.path.join(settings.out, "frontier.csv"), report.FRONTIER_COLUMNS, rows
    )
    payload = {
        "auc": summary.auc,
        "y_min": summary.domain[0],
        "pareto_violations": summary.pareto_violations,
    }
    report.write_json(os.path.join(settings.out, "frontier.json"), payload)
    written = ["frontier.csv", "frontier.json"]
    fig = figures.frontier_figure({"rows": rows, "auc": summary.auc}, settings.out)
    if fig:
        written.append(fig)
    lines = [
        f"AUC: {summary.auc} over yield [{summary.domain[0]}, {summary.domain[1]}]",
        f"pareto violations: {summary.pareto_violations}",
    ]
    return _finish(settings.out, written, lines)


def _cmd_simulate(args):
    settings = _Settings(args)
    if args.preset:
        spec = preset(args.preset, m=args.m, answers=args.answers)
    elif settings.config is not None and settings.config.generator is not None:
        spec = settings.config.generator
    else:
        raise ConfigError("simulate needs --preset or a config with a generator")
    dataset = generate_dataset(spec, args.n, settings.seed)
    os.makedirs(settings.out, exist_ok=True)
    write_dataset(dataset, os.path.join(settings.out, "dataset.jsonl"))
    from .experiment import _generator_dict

    report.write_json(
        os.path.join(settings.out, "generator.json"),
        {"generator": _generator_dict(spec), "n": args.n, "seed": settings.seed},
    )
    lines = [f"generated {len(dataset)} instances of {spec.m} paths"]
    return _finish(settings.out, ["dataset.jsonl", "generator.json"], lines)


def _cmd_validate_guarantee(args):
    settings = _Settings(args)
    config = _experiment_config(settings, args)
    result = validate_guarantee(config)
    report.write_guarantee_report(result, config.output_dir)
    for row in result["alphas"]:
        verdict = "PASS" if row["passed"] else "FAIL"
        print(
            f"alpha={row['alpha']}: mean risk {row['mean_risk']:.6f} vs "
            f"threshold {row['threshold']:.6f} -> {verdict}"
        )
    overall = "PASS" if result["passed"] else "FAIL"
    print(f"guarantee: {overall} ({result['mode']}, {result['rule']})")
    return 0 if result["passed"] else 1


def _parse_axis_values(axis, raw):
    parts = [p.strip() for p in raw.split(",") if p.strip()]
    if not parts:
        raise ConfigError("--values must list at least one value")
    if axis in ("m", "n_cal"):
        try:
            return [int(p) for p in parts]
        except ValueError as exc:
            raise ConfigError(f"axis {axis} needs integer values: {exc}") from exc
    if axis == "weight":
        out = []
        for p in parts:
            kind, _, param = p.partition(":")
            try:
                if kind == "exponential":
                    out.append(
                        WeightSpec(kind=kind, beta=float(param) if param else 1.0)
                    )
                elif kind == "linear":
                    out.append(
                        WeightSpec(kind=kind, shift=float(param) if param else 0.0)
                    )
                else:
                    out.append(WeightSpec(kind=kind))
            except (ValueError, VotegateError) as exc:
                raise ConfigError(f"bad weight value {p!r}: {exc}") from exc
        return out
    return parts


def _cmd_ablate(args):
    settings = _Settings(args)
    config = _experiment_config(settings, args)
    values = _parse_axis_values(args.axis, args.values)
    result = ablation_sweep(config, args.axis, values)
    report.write_ablation_report(result, config.output_dir)
    for run in result["runs"]:
        for agg in run["aggregates"]:
            print(
                f"{args.axis}={run['value']} alpha={agg['alpha']}: "
                f"risk {agg['mean_risk']:.4f}, yield {agg['mean_yield']:.4f}, "
                f"a_c {agg['mean_a_c'] if agg['mean_a_c'] is None else round(agg['mean_a_c'], 4)}"
            )
    return 0


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="votegate",
        description=(
            "Calibrated abstention for multi-path answer aggregation: "
            "score-weighted voting, risk-controlled thresholds, and "
            "separability diagnostics."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate and normalize a dataset file")
    p.add_argument("--input", required=True, help="JSONL dataset path")
    _add_common(p)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("split", help="split a dataset into calibration and test")
    p.add_argument("--input", required=True)
    p.add_argument("--n-cal", type=int, required=True, dest="n_cal")
    _add_common(p)
    p.set_defaults(func=_cmd_split)

    p = sub.add_parser("calibrate", help="fit the abstention threshold")
    p.add_argument("--input", required=True, help="calibration dataset (JSONL)")
    p.add_argument("--alpha", type=float, required=True, help="target rate in (0,1)")
    _add_score_flag(p)
    _add_weight_flags(p)
    _add_common(p)
    p.set_defaults(func=_cmd_calibrate)

    p = sub.add_parser("evaluate", help="apply a policy to a test dataset")
    p.add_argument("--input", required=True, help="test dataset (JSONL)")
    p.add_argument("--policy", required=True, help="policy.json from calibrate")
    _add_score_flag(p)
    _add_weight_flags(p)
    _add_common(p)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("diagnose", help="separability profile and predictor bound")
    p.add_argument("--input", required=True)
    p.add_argument("--delta0", type=float, help="operating-set gap threshold")
    p.add_argument("--delta", type=float, help="bound confidence level")
    _add_score_flag(p)
    _add_weight_flags(p)
    _add_common(p)
    p.set_defaults(func=_cmd_diagnose)

    p = sub.add_parser("frontier", help="accuracy-yield frontier sweep")
    p.add_argument("--input", required=True)
    _add_score_flag(p)
    _add_weight_flags(p)
    _add_common(p)
    p.set_defaults(func=_cmd_frontier)

    p = sub.add_parser("simulate", help="generate a synthetic dataset")
    p.add_argument("--preset", choices=PRESETS, help="generator preset")
    p.add_argument("--m", type=int, default=16, help="paths per prompt")
    p.add_argument("--answers", type=int, default=3, help="distinct answers")
    p.add_argument("--n", type=int, default=1000, help="instances to generate")
    _add_common(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser(
        "validate-guarantee",
        help="Monte Carlo check of the confident-error guarantee",
    )
    _add_common(p)
    p.set_defaults(func=_cmd_validate_guarantee)

    p = sub.add_parser("ablate", help="rerun the experiment along one axis")
    p.add_argument("--axis", choices=ABLATION_AXES, required=True)
    p.add_argument("--values", required=True, help="comma-separated axis values")
    _add_common(p)
    p.set_defaults(func=_cmd_ablate)

    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"malformed JSON input: {exc}", file=sys.stderr)
        return 2
    except VotegateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
