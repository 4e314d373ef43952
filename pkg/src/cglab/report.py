"""Figure rendering for experiment records.

Plotting is opt-in on the CLI report path: render(record, outdir) writes
one or more PNG files next to the delimited output and returns their
paths.  Everything is drawn from the RunRecord alone, so a stored run can
be re-rendered without recomputation.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["render"]


def _save(fig, outdir: str, name: str, paths: list):
    path = os.path.join(outdir, name)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    paths.append(path)


def _ecdf(ax, data, **kwargs):
    xs = np.sort(np.asarray(data, dtype=np.float64))
    ax.step(xs, np.arange(1, xs.size + 1) / xs.size, where="post", **kwargs)


def _ground_state(record, outdir, paths):
    ratios = {}
    for row in record.rows:
        ratios.setdefault((row["lam"], row["M"]), []).append(row["ratio21"])
    fig, ax = plt.subplots(figsize=(6, 4))
    for (lam, M), vals in sorted(ratios.items()):
        _ecdf(ax, vals, label=f"$\\lambda$={lam}, M={M}")
    ax.set_xscale("log")
    ax.set_xlabel(r"$\|\psi_0\|_2 / \|\psi_0\|_\infty$")
    ax.set_ylabel("empirical CDF")
    ax.legend()
    ax.set_title("ground-state norm ratio across the transition")
    _save(fig, outdir, "ground_state_ratio.png", paths)


def _localization(record, outdir, paths):
    dists = [r["dist"] for r in record.rows]
    ratios = [r["ratio21"] - 1.0 for r in record.rows]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.hist(dists, bins=50, color="tab:blue")
    ax1.set_xlabel(r"dist$(u_n, \omega)$")
    ax1.set_ylabel("count")
    ax2.hist(ratios, bins=50, color="tab:orange")
    ax2.set_xlabel(r"$\ell^2/\ell^\infty - 1$")
    fig.suptitle("window eigenvalue statistics")
    _save(fig, outdir, "localization_window.png", paths)


def _seba_band(record, outdir, paths):
    model = np.concatenate([r["dist"] for r in record.rows
                            if r["M"] == max(rr["M"] for rr in record.rows)])
    direct = record.summary.get("direct_distances", [])
    fig, ax = plt.subplots(figsize=(6, 4))
    _ecdf(ax, model, label="model window")
    if len(direct):
        _ecdf(ax, direct, label="direct simulation")
    ax.set_xlabel("distance to nearest rescaled pole")
    ax.set_ylabel("empirical CDF")
    ks = record.summary.get("ks_distances")
    ax.set_title(f"pole-distance laws (KS = {ks:.3f})" if ks is not None
                 else "pole-distance laws")
    ax.legend()
    _save(fig, outdir, "band_distance_cdf.png", paths)

    by_m = record.summary.get("median_ratio11_by_M", {})
    if len(by_m) > 1:
        fig, ax = plt.subplots(figsize=(5, 4))
        ms = sorted(by_m, key=float)
        ax.semilogx([float(m) for m in ms], [by_m[m] for m in ms], "o-")
        ax.set_xlabel("M")
        ax.set_ylabel(r"median $\ell^1/\ell^\infty$")
        ax.set_title("delocalization growth across the sweep")
        _save(fig, outdir, "band_ratio_growth.png", paths)


def _single_extended(record, outdir, paths):
    fig, ax = plt.subplots(figsize=(6, 4))
    xs = [r["sample"] for r in record.rows]
    ys = [r["ratio21_max"] for r in record.rows]
    ax.semilogy(xs, ys, "o", label=r"max $\ell^2/\ell^\infty$")
    for check in record.checks:
        thr = check.get("big_threshold")
        if thr is not None:
            ax.axhline(thr, color="tab:red", ls="--", label="outlier threshold")
            break
    ax.set_xlabel("sample")
    ax.set_ylabel("norm ratio")
    ax.legend()
    ax.set_title("delocalized outlier per sample")
    _save(fig, outdir, "single_extended.png", paths)


def _phase_diagram(record, outdir, paths):
    lams = sorted({r["lam"] for r in record.rows})
    cens = sorted({r["center_spec"] for r in record.rows})
    grid = np.full((len(lams), len(cens)), np.nan)
    labels = np.empty((len(lams), len(cens)), dtype=object)
    for r in record.rows:
        i, j = lams.index(r["lam"]), cens.index(r["center_spec"])
        grid[i, j] = np.log10(max(r["criterion"], 1e-300))
        labels[i, j] = r["classification"].replace("_", "\n")
    fig, ax = plt.subplots(figsize=(1.8 * len(cens) + 2, 1.2 * len(lams) + 2))
    im = ax.imshow(grid, aspect="auto", origin="lower", cmap="viridis")
    ax.set_xticks(range(len(cens)), cens, rotation=30, ha="right")
    ax.set_yticks(range(len(lams)), [str(v) for v in lams])
    ax.set_xlabel("center")
    ax.set_ylabel(r"$\lambda$")
    for i in range(len(lams)):
        for j in range(len(cens)):
            ax.text(j, i, labels[i, j], ha="center", va="center",
                    color="white", fontsize=8)
    fig.colorbar(im, ax=ax, label=r"$\log_{10}$ hybridization criterion")
    ax.set_title("phase diagram")
    _save(fig, outdir, "phase_diagram.png", paths)


def _seba_direct(record, outdir, paths):
    rows = [r for r in record.rows if "empirical" in r and "t" in r]
    if not rows:
        return
    fig, ax = plt.subplots(figsize=(7, 4))
    x = np.arange(len(rows))
    ax.bar(x - 0.2, [r["empirical"] for r in rows], width=0.4,
           label="empirical")
    ax.bar(x + 0.2, [r.get("bound", r.get("bound_value", np.nan))
                     for r in rows], width=0.4, label="bound")
    ax.set_xticks(x, [f"{r.get('family', '')}:{r.get('alpha', '')}:t={r['t']}"
                      for r in rows], rotation=60, ha="right", fontsize=7)
    ax.set_yscale("log")
    ax.set_ylabel("tail probability")
    ax.legend()
    ax.set_title("distance/gap tail bounds")
    _save(fig, outdir, "seba_bounds.png", paths)


def _hilbert_table(record, outdir, paths):
    xs = [r["xi"] for r in record.rows if "xi" in r]
    closed = [r["closed"] for r in record.rows if "xi" in r]
    diffs = [r["abs_diff"] for r in record.rows if "xi" in r]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.plot(xs, closed)
    ax1.set_xlabel(r"$\xi$")
    ax1.set_ylabel(r"$H(\xi)$")
    ax2.semilogy(xs, np.maximum(diffs, 1e-18))
    ax2.set_xlabel(r"$\xi$")
    ax2.set_ylabel("|closed $-$ quadrature|")
    fig.suptitle("Hilbert transform of the Gaussian density")
    _save(fig, outdir, "hilbert_table.png", paths)


_RENDERERS = {
    "ground-state": _ground_state,
    "localization": _localization,
    "seba-band": _seba_band,
    "single-extended": _single_extended,
    "phase-diagram": _phase_diagram,
    "seba-direct": _seba_direct,
    "hilbert-table": _hilbert_table,
}


def render(record, outdir: str) -> list:
    """Render the figures for one RunRecord into outdir; returns PNG paths."""
    os.makedirs(outdir, exist_ok=True)
    renderer = _RENDERERS.get(record.experiment)
    paths: list = []
    if renderer is not None and record.rows:
        renderer(record, outdir, paths)
    return paths
