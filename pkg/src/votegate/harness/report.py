"""Report emission: JSON, CSV, text summary, figures, and a manifest.

Everything lands under one output directory. report bodies carry no
timestamps, so a rerun of the same config writes byte-identical JSON
and CSV artifacts. The manifest is written last and lists every other
artifact with its sha256, so a consumer can verify a report directory
is complete and untampered.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os

from . import figures

MANIFEST_NAME = "manifest.json"

PROFILE_COLUMNS = (
    "lambda", "s_cor", "s_err", "delta", "h_cor", "h_err",
    "delta_strict", "a_c_hat", "yield",
)
FRONTIER_COLUMNS = ("lambda", "yield", "a_c", "n_selected")
ROW_COLUMNS = (
    "split", "alpha", "lambda_hat", "always_abstain", "risk", "yield",
    "a_c", "n_answered",
)
PREDICTOR_COLUMNS = (
    "split", "s0_hat", "epsilon", "bound", "gap", "within_bound",
    "n_operating", "degenerate",
)
GUARANTEE_COLUMNS = (
    "alpha", "n_trials", "mean_risk", "std_risk", "se_risk", "threshold",
    "passed", "mean_yield", "mean_lambda_hat",
)


def write_json(path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_csv(path, columns, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow(
                ["" if row.get(c) is None else row.get(c) for c in columns]
            )


def write_manifest(out_dir, paths):
    # merge with prior entries so pipeline stages sharing one output
    # directory accumulate a complete manifest; vanished files drop out
    files = {}
    try:
        with open(os.path.join(out_dir, MANIFEST_NAME), "r", encoding="utf-8") as fh:
            previous = json.load(fh).get("files", {})
        files = {
            rel: meta
            for rel, meta in previous.items()
            if os.path.isfile(os.path.join(out_dir, rel))
        }
    except (OSError, ValueError):
        pass
    for rel in sorted(paths):
        digest = hashlib.sha256()
        full = os.path.join(out_dir, rel)
        with open(full, "rb") as fh:
            for chunk in iter(lambda: fh.read(65536), b""):
                digest.update(chunk)
        files[rel] = {
            "sha256": digest.hexdigest(),
            "bytes": os.path.getsize(full),
        }
    write_json(
        os.path.join(out_dir, MANIFEST_NAME),
        {"schema": "votegate-manifest/v1", "algorithm": "sha256", "files": files},
    )


def _fmt(value, digits=6):
    if value is None:
        return "n/a"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return f"{value:.{digits}g}"
    return str(value)


def _experiment_summary(report):
    lines = [
        "Experiment summary",
        "==================",
        f"mode: {report['mode']}",
        f"splits: {report['config']['n_splits']}",
        f"weight: {report['config']['weight']}",
        "",
        "Per-alpha aggregates (mean over splits, std in parentheses):",
    ]
    for agg in report["aggregates"]:
        lines.append(
            "  alpha={a}: risk {r} ({rs}), yield {y} ({ys}), "
            "selective accuracy {ac} ({acs}), lambda_hat {l} ({ls}), "
            "always-abstain splits {na}".format(
                a=_fmt(agg["alpha"]),
                r=_fmt(agg["mean_risk"]),
                rs=_fmt(agg["std_risk"]),
                y=_fmt(agg["mean_yield"]),
                ys=_fmt(agg["std_yield"]),
                ac=_fmt(agg["mean_a_c"]),
                acs=_fmt(agg["std_a_c"]),
                l=_fmt(agg["mean_lambda_hat"]),
                ls=_fmt(agg["std_lambda_hat"]),
                na=agg["n_always_abstain"],
            )
        )
    pred = report["predictor_aggregate"]
    lines += [
        "",
        "Accuracy predictor vs held-out observation (over the operating set):",
        f"  mean sup-gap {_fmt(pred['mean_gap'])}, max {_fmt(pred['max_gap'])}, "
        f"fraction within bound {_fmt(pred['frac_within_bound'])}, "
        f"degenerate splits {pred['n_degenerate']}",
    ]
    frontier = report["frontier"]
    if "auc" in frontier:
        lines += [
            "",
            f"Frontier (first test split): AUC {_fmt(frontier['auc'])} over "
            f"yield in [{_fmt(frontier['y_min'])}, {_fmt(frontier['y_max'])}], "
            f"{frontier['pareto_violations']} Pareto violation(s)",
        ]
    lines += [
        "",
        "Risk means land within sampling noise of the target by design; the",
        "acceptance rule used throughout is the explicit one: mean realized",
        "risk <= alpha + 3 standard errors of the Monte Carlo mean.",
        "",
    ]
    return "\n".join(lines)


def _guarantee_summary(result):
    lines = [
        "Guarantee validation",
        "====================",
        f"mode: {result['mode']}",
        f"rule: {result['rule']}",
        f"shifted test distribution: {_fmt(result['shifted_test'])}",
        "",
    ]
    for row in result["alphas"]:
        verdict = "PASS" if row["passed"] else "FAIL"
        lines.append(
            f"  alpha={_fmt(row['alpha'])}: mean risk {_fmt(row['mean_risk'])} "
            f"(se {_fmt(row['se_risk'])}) vs threshold {_fmt(row['threshold'])} "
            f"-> {verdict}"
        )
    lines += [
        "",
        f"overall: {'PASS' if result['passed'] else 'FAIL'}",
        "",
        "The threshold alpha + 3*SE makes the sampling-noise tolerance",
        "explicit: a mean within three standard errors above the target is",
        "consistent with a controlled method, anything beyond it is flagged.",
        "",
    ]
    return "\n".join(lines)


def _ablation_summary(result):
    lines = [
        "Ablation sweep",
        "==============",
        f"axis: {result['axis']}",
        "",
    ]
    for run in result["runs"]:
        lines.append(f"value = {run['value']}:")
        for agg in run["aggregates"]:
            lines.append(
                "  alpha={a}: risk {r}, yield {y}, selective accuracy {ac}, "
                "lambda_hat {l} ({ls})".format(
                    a=_fmt(agg["alpha"]),
                    r=_fmt(agg["mean_risk"]),
                    y=_fmt(agg["mean_yield"]),
                    ac=_fmt(agg["mean_a_c"]),
                    l=_fmt(agg["mean_lambda_hat"]),
                    ls=_fmt(agg["std_lambda_hat"]),
                )
            )
    lines.append("")
    return "\n".join(lines)


def _ablation_rows(result):
    rows = []
    for run in result["runs"]:
        for agg in run["aggregates"]:
            rows.append(
                {
                    "value": json.dumps(run["value"])
                    if isinstance(run["value"], dict)
                    else run["value"],
                    **agg,
                }
            )
    return rows


def write_report(report, out_dir):
    """Write the full experiment report tree; returns written paths."""
    os.makedirs(os.path.join(out_dir, "figures"), exist_ok=True)
    written = []

    write_json(os.path.join(out_dir, "report.json"), report)
    written.append("report.json")

    write_csv(os.path.join(out_dir, "rows.csv"), ROW_COLUMNS, report["rows"])
    written.append("rows.csv")

    write_csv(
        os.path.join(out_dir, "predictor_gap.csv"),
        PREDICTOR_COLUMNS,
        report["predictor_rows"],
    )
    written.append("predictor_gap.csv")

    profile = report["profile"]
    if profile["rows"]:
        write_csv(
            os.path.join(out_dir, "profile.csv"), PROFILE_COLUMNS, profile["rows"]
        )
        written.append("profile.csv")

    frontier = report["frontier"]
    write_csv(
        os.path.join(out_dir, "frontier.csv"), FRONTIER_COLUMNS, frontier["rows"]
    )
    written.append("frontier.csv")
    write_json(
        os.path.join(out_dir, "frontier.json"),
        {
            "auc": frontier.get("auc"),
            "y_min": frontier.get("y_min"),
            "pareto_violations": frontier.get("pareto_violations"),
        },
    )
    written.append("frontier.json")

    with open(os.path.join(out_dir, "summary.txt"), "w", encoding="utf-8") as fh:
        fh.write(_experiment_summary(report))
    written.append("summary.txt")

    written += figures.experiment_figures(report, out_dir)
    write_manifest(out_dir, written)
    written.append(MANIFEST_NAME)
    return written


def write_guarantee_report(result, out_dir):
    """Write guarantee-validation artifacts; returns written paths."""
    os.makedirs(os.path.join(out_dir, "figures"), exist_ok=True)
    written = []
    write_json(os.path.join(out_dir, "guarantee.json"), result)
    written.append("guarantee.json")
    write_csv(
        os.path.join(out_dir, "guarantee.csv"), GUARANTEE_COLUMNS, result["alphas"]
    )
    written.append("guarantee.csv")
    with open(os.path.join(out_dir, "summary.txt"), "w", encoding="utf-8") as fh:
        fh.write(_guarantee_summary(result))
    written.append("summary.txt")
    written += figures.guarantee_figures(result, out_dir)
    write_manifest(out_dir, written)
    written.append(MANIFEST_NAME)
    return written


def write_ablation_report(result, out_dir):
    """Write ablation-sweep artifacts; returns written paths."""
    os.makedirs(os.path.join(out_dir, "figures"), exist_ok=True)
    written = []
    write_json(os.path.join(out_dir, "ablation.json"), result)
    written.append("ablation.json")
    rows = _ablation_rows(result)
    columns = ("value",) + tuple(
        k for k in rows[0] if k != "value"
    ) if rows else ("value",)
    write_csv(os.path.join(out_dir, "ablation.csv"), columns, rows)
    written.append("ablation.csv")
    with open(os.path.join(out_dir, "summary.txt"), "w", encoding="utf-8") as fh:
        fh.write(_ablation_summary(result))
    written.append("summary.txt")
    written += figures.ablation_figures(result, out_dir)
    write_manifest(out_dir, written)
    written.append(MANIFEST_NAME)
    return written
