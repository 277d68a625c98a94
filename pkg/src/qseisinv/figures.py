"""Matplotlib renderings written next to the delimited outputs."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_STYLE = {
    "figure.figsize": (8.0, 5.0),
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 10,
    "lines.linewidth": 1.2,
}


def _new_axes(n_panels=1, sharey=False):
    plt.rcParams.update(_STYLE)
    fig, axes = plt.subplots(1, n_panels, sharey=sharey, squeeze=False)
    return fig, axes[0]


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def save_loss_curve(path, losses) -> None:
    fig, (ax,) = _new_axes()
    ax.semilogy(np.arange(1, len(losses) + 1), losses, color="k")
    ax.set_xlabel("epoch")
    ax.set_ylabel("loss")
    ax.set_title("training loss")
    _finish(fig, path)


def save_impedance_profiles(path, dt, curves, title="impedance") -> None:
    """Depth profiles; curves = {label: ImpedanceModel} with 1-D fields."""
    has_zs = any(m.zs is not None for m in curves.values())
    fig, axes = _new_axes(2 if has_zs else 1, sharey=True)
    t = None
    styles = {"true": "C0-", "prior": "C1--", "estimate": "k-"}
    for label, model in curves.items():
        t = np.arange(model.zp.size) * dt
        style = styles.get(label, "-")
        axes[0].plot(model.zp, t, style, label=label)
        if has_zs and model.zs is not None:
            axes[1].plot(model.zs, t, style, label=label)
    axes[0].invert_yaxis()
    axes[0].set_xlabel("P-impedance (km/s g/cc)")
    axes[0].set_ylabel("time (s)")
    axes[0].legend()
    if has_zs:
        axes[1].set_xlabel("S-impedance (km/s g/cc)")
    fig.suptitle(title)
    _finish(fig, path)


def save_gather_comparison(path, observed, predicted=None, title="seismic") -> None:
    """Per-angle overlay of observed and predicted traces."""
    n = observed.data.shape[1]
    fig, axes = _new_axes(n, sharey=True)
    t = np.arange(observed.n_samples) * observed.dt
    for j in range(n):
        axes[j].plot(observed.data[:, j], t, "C0-", label="observed")
        if predicted is not None:
            axes[j].plot(predicted.data[:, j], t, "k--", label="predicted")
        axes[j].set_title(f"{observed.angles[j]:g}°")
        axes[j].set_xlabel("amplitude")
    axes[0].invert_yaxis()
    axes[0].set_ylabel("time (s)")
    axes[0].legend()
    fig.suptitle(title)
    _finish(fig, path)


def save_section_images(path, dt, panels, title="section") -> None:
    """Side-by-side images of 2-D fields; panels = {label: 2-D array}."""
    fig, axes = _new_axes(len(panels))
    vmin = min(float(np.min(a)) for a in panels.values())
    vmax = max(float(np.max(a)) for a in panels.values())
    im = None
    for ax, (label, arr) in zip(axes, panels.items()):
        im = ax.imshow(
            arr,
            aspect="auto",
            cmap="viridis",
            vmin=vmin,
            vmax=vmax,
            extent=(0, arr.shape[1], arr.shape[0] * dt, 0),
        )
        ax.set_title(label)
        ax.set_xlabel("trace")
        ax.grid(False)
    axes[0].set_ylabel("time (s)")
    if im is not None:
        fig.colorbar(im, ax=list(axes), shrink=0.8)
    fig.suptitle(title)
    fig.savefig(path, dpi=130)
    plt.close(fig)
