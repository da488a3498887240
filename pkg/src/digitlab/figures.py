"""Render report payloads to matplotlib figures.

One PNG per report, written next to the delimited output.  Imported lazily
by the CLI so that plain report runs never pay the matplotlib import cost.
"""

from __future__ import annotations

import math
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["render"]


def _save(fig, outdir: str, stem: str) -> str:
    os.makedirs(outdir, exist_ok=True)
    path = os.path.join(outdir, f"{stem}.png")
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path


def _heatmap(ax, matrix, title):
    arr = np.asarray(matrix, dtype=float)
    im = ax.imshow(arr, cmap="viridis")
    ax.set_title(title)
    ax.set_xlabel("second digit")
    ax.set_ylabel("first digit")
    for (r, c), v in np.ndenumerate(arr):
        ax.text(c, r, f"{v:.4f}", ha="center", va="center", fontsize=7, color="white")
    return im


def _render_moments(report: dict, outdir: str) -> list[str]:
    result = report["result"]
    emp = np.asarray(result["covariance_per_log"], dtype=float)
    pred = result["prediction"]
    ncols = 2 if pred is not None else 1
    fig, axes = plt.subplots(1, ncols, figsize=(4.5 * ncols, 4))
    axes = np.atleast_1d(axes)
    _heatmap(axes[0], emp, "empirical covariance / log_q N")
    if pred is not None:
        _heatmap(axes[1], [[cell["decimal"] for cell in row] for row in pred],
                 "predicted covariance")
    fig.suptitle(f"q={report['config']['q']}  A={report['config']['multipliers']}  "
                 f"N={report['config']['n_limit']}")
    return [_save(fig, outdir, "moments")]


def _render_digit_pairs(report: dict, outdir: str) -> list[str]:
    result = report["result"]
    cfg = report["config"]
    ncols = 2 if result["prediction"] is not None else 1
    fig, axes = plt.subplots(1, ncols, figsize=(4.5 * ncols, 4))
    axes = np.atleast_1d(axes)
    _heatmap(axes[0], result["frequencies"], "empirical frequency")
    if result["prediction"] is not None:
        _heatmap(axes[1], result["prediction"], "prediction")
    fig.suptitle(f"q={cfg['q']}  A=({cfg['a1']},{cfg['a2']})  "
                 f"positions ({cfg['i']},{cfg['j']})  N={cfg['n_limit']}")
    return [_save(fig, outdir, "digit_pairs")]


def _render_clt(report: dict, outdir: str) -> list[str]:
    result = report["result"]
    center = result["standardization"]["center"]
    scale = result["standardization"]["scale"]
    values = np.asarray(result["values"], dtype=float)
    counts = np.asarray(result["value_counts"], dtype=float)
    total = counts.sum()
    std = (values - center) / scale
    density = counts / total * scale  # per unit of the standardized axis
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 4))
    ax1.bar(std, density, width=1.0 / scale, color="#4878d0", label="empirical")
    grid = np.linspace(-4, 4, 401)
    ax1.plot(grid, np.exp(-grid**2 / 2) / math.sqrt(2 * math.pi), "k-", lw=1.2,
             label="standard normal")
    ax1.set_xlim(-4.5, 4.5)
    ax1.set_xlabel("standardized digit sum")
    ax1.set_ylabel("density")
    ax1.legend(frameon=False)
    emp_cdf = np.cumsum(counts) / total
    mid = (values + 0.5 - center) / scale
    from math import erfc, sqrt
    ref = np.array([0.5 * erfc(-t / sqrt(2)) for t in mid])
    ax2.step(mid, emp_cdf, where="post", label="empirical CDF")
    ax2.plot(mid, ref, "k--", lw=1.0, label="normal CDF")
    ax2.set_xlabel("standardized digit sum")
    ax2.legend(frameon=False)
    ax2.set_title(f"KS = {result['ks_distance']:.4g}")
    fig.suptitle(f"q={report['config']['q']}  A={report['config']['multiplier']}  "
                 f"N={report['config']['n_limit']}")
    return [_save(fig, outdir, "clt")]


def _render_landau(report: dict, outdir: str) -> list[str]:
    result = report["result"]
    xs = [pt["x"]["decimal"] for pt in result["profile"]] + [1.0]
    vals = [pt["value"] for pt in result["profile"]]
    vals = vals + [vals[-1]]
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.step(xs, vals, where="post", color="#4878d0")
    ax.axhline(0.0, color="k", lw=0.8)
    if result["witness"] is not None:
        ax.plot([result["witness"]["decimal"]], [result["value_at_witness"]],
                "rx", ms=9, label="violation")
        ax.legend(frameon=False)
    cfg = report["config"]
    ax.set_title(f"C={cfg['c_factors']}  D={cfg['d_factors']}  "
                 f"{'pass' if result['passed'] else 'fail'}")
    ax.set_xlabel("x")
    ax.set_ylabel("floor-sum difference")
    return [_save(fig, outdir, "landau")]


def _render_scan(report: dict, outdir: str) -> list[str]:
    result = report["result"]
    fig, axes = plt.subplots(1, len(result["histograms"]),
                             figsize=(5 * len(result["histograms"]), 3.5), squeeze=False)
    for ax, (p, hist) in zip(axes[0], sorted(result["histograms"].items(), key=lambda kv: int(kv[0]))):
        finite = sorted((int(k), v) for k, v in hist.items() if k != "inf")
        ax.bar([k for k, _ in finite], [v for _, v in finite], color="#4878d0")
        if "inf" in hist:
            ax.bar([finite[-1][0] + 2 if finite else 0], [hist["inf"]], color="#d65f5f",
                   label="infinite")
            ax.legend(frameon=False)
        small = result.get("small_valuation")
        if small is not None:
            ax.axvline(small["threshold"], color="k", ls="--", lw=0.9)
        ax.set_title(f"p = {p}")
        ax.set_xlabel("valuation of S(n)")
        ax.set_ylabel("count")
    fig.suptitle(f"{result['spec_name'] or result['spec']}  modulus {result['modulus']}  "
                 f"N={result['n_limit']}  fraction {result['fraction']:.6f}")
    return [_save(fig, outdir, "scan")]


def _render_trend(report: dict, outdir: str) -> list[str]:
    result = report["result"]
    ns = [pt["n_limit"] for pt in result["points"]]
    fracs = [pt["fraction"] for pt in result["points"]]
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.plot(ns, fracs, "o-", color="#4878d0", label="divisible fraction")
    ax.set_xscale("log", base=2)
    ax.set_xlabel("N")
    ax.set_ylabel(f"fraction with v_{result['p']}(S(n)) >= {result['alpha']}")
    ax.axhline(1.0, color="k", lw=0.8, ls=":")
    if any(pt["small_valuation_count"] is not None for pt in result["points"]):
        ax2 = ax.twinx()
        small = [pt["small_valuation_count"] / pt["n_limit"] for pt in result["points"]]
        ax2.plot(ns, small, "s--", color="#d65f5f", label="small-valuation share")
        ax2.set_ylabel("small-valuation share")
    ax.set_title(result["spec_name"] or result["spec"])
    return [_save(fig, outdir, "trend")]


def _render_valuation(report: dict, outdir: str) -> list[str]:
    result = report["result"]
    rows = result["values"]
    ns = [row["n"] for row in rows]
    finite = [row["valuation"] if isinstance(row["valuation"], int) else None for row in rows]
    fig, ax = plt.subplots(figsize=(6, 3.5))
    xs = [n for n, v in zip(ns, finite) if v is not None]
    ys = [v for v in finite if v is not None]
    ax.stem(xs, ys)
    for row in rows:
        if row["pole"]:
            ax.axvline(row["n"], color="#d65f5f", ls=":", lw=1.0)
        elif row["valuation"] == "inf":
            ax.axvline(row["n"], color="#6acc64", ls="--", lw=1.0)
    ax.set_xlabel("n")
    ax.set_ylabel(f"valuation at p = {result['p']}")
    ax.set_title(result["spec_name"] or result["spec"])
    return [_save(fig, outdir, "valuation")]


_RENDERERS = {
    "digitlab.moments/1": _render_moments,
    "digitlab.digit_pairs/1": _render_digit_pairs,
    "digitlab.clt/1": _render_clt,
    "digitlab.landau/1": _render_landau,
    "digitlab.scan/1": _render_scan,
    "digitlab.trend/1": _render_trend,
    "digitlab.valuation/1": _render_valuation,
}


def render(report: dict, outdir: str) -> list[str]:
    """Render the figures for one report dict; returns the written paths."""
    renderer = _RENDERERS.get(report.get("schema"))
    if renderer is None:
        return []
    return renderer(report, outdir)
