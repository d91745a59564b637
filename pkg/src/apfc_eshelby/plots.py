"""Figures written next to the CSV/JSON output of a run or sweep."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

RC = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 7,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "figure.dpi": 120,
    "savefig.bbox": "tight",
}

COMPONENTS = (("sxx", r"$\sigma_{xx}$"), ("sxy", r"$\sigma_{xy}$"), ("syy", r"$\sigma_{yy}$"))


def _levels(arr, n=7):
    m = float(np.abs(arr).max())
    if m == 0:
        return None
    return np.linspace(-0.8 * m, 0.8 * m, n)


def _window(result, half_width):
    grid = result.state.grid
    cx, cy = result.config.inclusion().center
    x = grid.x - cx
    y = grid.y - cy
    ix = np.abs(x) <= half_width
    iy = np.abs(y) <= half_width
    return x[ix], y[iy], ix, iy


def stress_maps(result, path, half_width=None):
    """APFC (left) and analytic (right) stress components with shared contour levels."""
    inc = result.config.inclusion()
    half = half_width if half_width is not None else 3.0 * inc.radius
    x, y, ix, iy = _window(result, half)
    with plt.rc_context(RC):
        fig, axes = plt.subplots(3, 2, figsize=(5.0, 7.2), sharex=True, sharey=True)
        for row, (name, title) in enumerate(COMPONENTS):
            sim = getattr(result.stress, name)[np.ix_(ix, iy)]
            ana = getattr(result.analytic, name)[np.ix_(ix, iy)]
            vmax = float(np.abs(ana).max()) or 1.0
            levels = _levels(ana)
            for col, (arr, label) in enumerate(((sim, "APFC"), (ana, "analytic"))):
                ax = axes[row, col]
                im = ax.pcolormesh(x, y, arr.T, cmap="RdBu_r", vmin=-vmax, vmax=vmax, shading="auto")
                if levels is not None:
                    ax.contour(x, y, arr.T, levels=levels, colors="k", linewidths=0.5)
                ax.set_aspect("equal")
                ax.set_title(f"{title} {label}")
            fig.colorbar(im, ax=axes[row, :], shrink=0.8)
        for ax in axes[-1]:
            ax.set_xlabel("x")
        for ax in axes[:, 0]:
            ax.set_ylabel("y")
        fig.savefig(path)
        plt.close(fig)
    return path


def profile_plot(result, path):
    a0 = result.config.a0
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(4.5, 3.0))
        ax.plot(result.profile_r / a0, result.profile_apfc, label="APFC")
        ax.plot(result.profile_r / a0, result.profile_analytic, "k--", lw=0.8, label=r"$\mathcal{E}^\infty$")
        ax.set_xlabel(r"$x/a_0$")
        ax.set_ylabel(r"$\sigma_{yy}(x,0)$")
        ax.legend(frameon=False)
        fig.savefig(path)
        plt.close(fig)
    return path


def sweep_plot(cfg, results, path):
    from .experiment import RunResult, normalized_extrema

    ok = [r for r in results if isinstance(r, RunResult)]
    if not ok:
        return None
    a0 = cfg.a0
    by_strain = cfg.sweep_parameter == "eigenstrain"
    with plt.rc_context(RC):
        ncols = 2 if by_strain else 1
        fig, axes = plt.subplots(1, ncols, figsize=(4.5 * ncols, 3.0), squeeze=False)
        ax = axes[0, 0]
        if by_strain:
            ref = min(ok, key=lambda r: abs(r.report.eigenstrain)).report
            scale = abs(ref.syy_min / ref.eigenstrain)
        for r in ok:
            y = r.profile_apfc / (r.report.eigenstrain * scale) if by_strain else r.profile_apfc
            ax.plot(r.profile_r / a0, y, label=r.report.label)
        if not by_strain:
            ax.plot(ok[0].profile_r / a0, ok[0].profile_analytic, "k--", lw=0.8, label=r"$\mathcal{E}^\infty$")
        ax.set_xlabel(r"$x/a_0$")
        ax.set_ylabel(r"$\sigma_{yy}(x,0)$" + (" (normalized)" if by_strain else ""))
        ax.legend(frameon=False)
        if by_strain:
            rows = normalized_extrema(ok)
            eps = np.array([row["eigenstrain"] for row in rows])
            dev = np.array([row["min_deviation"] for row in rows])
            order = np.argsort(eps)
            axes[0, 1].semilogx(eps[order], 100 * dev[order], "o-")
            axes[0, 1].set_xlabel(r"$\varepsilon^*$")
            axes[0, 1].set_ylabel(r"deviation of min $\sigma_{yy}$ (%)")
        fig.savefig(path)
        plt.close(fig)
    return path


def density_plot(x, y, n, path):
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(4.0, 4.0))
        ax.pcolormesh(x, y, n.T, cmap="gray", shading="auto")
        ax.set_aspect("equal")
        fig.savefig(path)
        plt.close(fig)
    return path
