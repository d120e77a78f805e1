"""Figure rendering for the CLI report path (PNG files next to the CSVs)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .diagnostics import ConvergenceRow, TraceRow  # noqa: E402
from .spectral import Grid2D  # noqa: E402


def save_field(path, grid: Grid2D, phi: np.ndarray, title: str = "") -> None:
    fig, ax = plt.subplots(figsize=(5.0, 4.2))
    im = ax.imshow(phi, origin="lower",
                   extent=(grid.x0, grid.x1, grid.y0, grid.y1),
                   cmap="RdBu_r", interpolation="nearest")
    fig.colorbar(im, ax=ax)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def save_trace(path, rows: list[TraceRow], title: str = "") -> None:
    t = [r.t for r in rows]
    fig, axes = plt.subplots(1, 3, figsize=(12.0, 3.4))

    axes[0].plot(t, [r.e_orig for r in rows], label="original")
    axes[0].plot(t, [r.e_mod for r in rows], "--", label="modified")
    axes[0].set_xlabel("t")
    axes[0].set_ylabel("energy")
    axes[0].legend(fontsize=8)

    axes[1].plot(t, [r.ratio for r in rows])
    axes[1].set_xlabel("t")
    axes[1].set_ylabel(r"$\|Q(\phi)\|^2 / \|q\|^2$")

    axes[2].plot(t, [r.mass for r in rows], label="mass")
    axes[2].plot(t, [r.w for r in rows], label="roughness")
    axes[2].set_xlabel("t")
    axes[2].legend(fontsize=8)

    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def save_convergence(path, rows: list[ConvergenceRow], title: str = "") -> None:
    taus = np.array([r.tau for r in rows])
    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    ax.loglog(taus, [r.err_phi for r in rows], "o-", label=r"$\phi$ error")
    ax.loglog(taus, [r.err_q for r in rows], "s-", label="q error")
    for order, style in ((1, ":"), (2, "--")):
        ref = rows[0].err_phi * (taus / taus[0]) ** order
        ax.loglog(taus, ref, style, color="gray", lw=0.8,
                  label=f"order {order}")
    ax.set_xlabel(r"$\tau$")
    ax.set_ylabel("L2 error at T")
    ax.legend(fontsize=8)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def save_compare(path, times, columns: dict[str, list[float]],
                 title: str = "") -> None:
    """Semilog plot of |E_mod - E_ref| per correction."""
    fig, ax = plt.subplots(figsize=(5.6, 4.0))
    for label, errs in columns.items():
        floor = 1e-18
        ax.semilogy(times, np.maximum(np.abs(errs), floor), label=label)
    ax.set_xlabel("t")
    ax.set_ylabel(r"$|E_{mod} - E_{ref}|$")
    ax.legend(fontsize=8)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
