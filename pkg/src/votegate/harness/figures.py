"""Figure rendering for report directories.

All figures are PNG files under <out_dir>/figures, rendered off-screen.
Functions return the relative paths they wrote so the manifest can
include them.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

DPI = 120


def _save(fig, out_dir, name):
    rel = os.path.join("figures", name)
    fig.savefig(os.path.join(out_dir, rel), dpi=DPI, bbox_inches="tight")
    plt.close(fig)
    return rel


def _risk_by_alpha(aggregates, out_dir):
    alphas = [a["alpha"] for a in aggregates]
    means = [a["mean_risk"] for a in aggregates]
    errs = [3.0 * a["se_risk"] if a["se_risk"] is not None else 0.0 for a in aggregates]
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.errorbar(alphas, means, yerr=errs, fmt="o", capsize=4,
                label="mean realized risk (3 SE)")
    lo = 0.0
    hi = max(alphas + [m + e for m, e in zip(means, errs)]) * 1.15
    ax.plot([lo, hi], [lo, hi], "--", color="gray", label="target")
    ax.set_xlabel("target rate alpha")
    ax.set_ylabel("realized confident-error rate")
    ax.set_title("Risk calibration")
    ax.legend()
    return _save(fig, out_dir, "risk_by_alpha.png")


def profile_figure(profile, out_dir):
    rows = profile["rows"]
    grid = [r["lambda"] for r in rows]
    fig, (top, bottom) = plt.subplots(2, 1, figsize=(6, 6), sharex=True)
    top.step(grid, [r["s_cor"] for r in rows], where="post", label="S_cor")
    top.step(grid, [r["s_err"] for r in rows], where="post", label="S_err")
    top.set_ylabel("survival")
    top.set_title("Confidence separability")
    top.legend()
    bottom.step(grid, [r["delta"] for r in rows], where="post", label="gap")
    bottom.step(
        grid, [r["delta_strict"] for r in rows], where="post", label="hazard gap"
    )
    bottom.axhline(0.0, color="gray", linewidth=0.8)
    bottom.set_xlabel("threshold")
    bottom.set_ylabel("gap")
    bottom.legend()
    return _save(fig, out_dir, "profile.png")


def frontier_figure(frontier, out_dir):
    defined = [r for r in frontier["rows"] if r["a_c"] is not None]
    if len(defined) < 2:
        return None
    defined = sorted(defined, key=lambda r: r["yield"])
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(
        [r["yield"] for r in defined], [r["a_c"] for r in defined], "o-",
        markersize=3,
    )
    ax.set_xlabel("yield")
    ax.set_ylabel("selective accuracy")
    title = "Accuracy-yield frontier"
    if frontier.get("auc") is not None:
        title += f" (AUC {frontier['auc']:.4f})"
    ax.set_title(title)
    return _save(fig, out_dir, "frontier.png")


def experiment_figures(report, out_dir):
    """Render the experiment report figures; returns relative paths."""
    written = [_risk_by_alpha(report["aggregates"], out_dir)]
    if report["profile"]["rows"]:
        written.append(profile_figure(report["profile"], out_dir))
    path = frontier_figure(report["frontier"], out_dir)
    if path:
        written.append(path)
    return written


def guarantee_figures(result, out_dir):
    """Render the guarantee-validation figure; returns relative paths."""
    rows = result["alphas"]
    alphas = [r["alpha"] for r in rows]
    means = [r["mean_risk"] for r in rows]
    errs = [3.0 * r["se_risk"] for r in rows]
    thresholds = [r["threshold"] for r in rows]
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.errorbar(alphas, means, yerr=errs, fmt="o", capsize=4,
                label="mean realized risk (3 SE)")
    ax.plot(alphas, thresholds, "_", color="red", markersize=16,
            label="pass threshold")
    lo = 0.0
    hi = max(alphas + [m + e for m, e in zip(means, errs)]) * 1.15
    ax.plot([lo, hi], [lo, hi], "--", color="gray", label="target")
    ax.set_xlabel("target rate alpha")
    ax.set_ylabel("realized confident-error rate")
    verdict = "PASS" if result["passed"] else "FAIL"
    ax.set_title(f"Guarantee validation ({result['mode']}): {verdict}")
    ax.legend()
    return [_save(fig, out_dir, "guarantee.png")]


def ablation_figures(result, out_dir):
    """Render the ablation sweep figure; returns relative paths."""
    runs = result["runs"]
    if not runs:
        return []
    labels = [str(run["value"]) for run in runs]
    x = range(len(runs))
    alphas = [agg["alpha"] for agg in runs[0]["aggregates"]]
    fig, (top, bottom) = plt.subplots(2, 1, figsize=(6, 6), sharex=True)
    for i, alpha in enumerate(alphas):
        yields = [run["aggregates"][i]["mean_yield"] for run in runs]
        accs = [run["aggregates"][i]["mean_a_c"] for run in runs]
        top.plot(x, yields, "o-", label=f"alpha={alpha}")
        bottom.plot(x, accs, "o-", label=f"alpha={alpha}")
    top.set_ylabel("mean yield")
    top.set_title(f"Ablation over {result['axis']}")
    top.legend()
    bottom.set_ylabel("mean selective accuracy")
    bottom.set_xlabel(result["axis"])
    bottom.set_xticks(list(x))
    bottom.set_xticklabels(labels, rotation=20)
    fig.align_ylabels()
    return [_save(fig, out_dir, "ablation.png")]
