"""Matplotlib rendering of CLI tables. Imported only when a figure is requested."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def render_series(header: list[str], rows: list[list], path: str) -> None:
    """One panel per measure; one curve per sweep value when sweeping."""
    data = np.array([[float(v) for v in r] for r in rows])
    sweeping = "sweep_value" in header
    first = 2 if sweeping else 1
    names = header[first:]
    fig, axes = plt.subplots(len(names), 1, figsize=(7, 2.8 * len(names)), squeeze=False)
    for ax, name, col in zip(axes[:, 0], names, range(first, len(header))):
        if sweeping:
            for v in np.unique(data[:, 1]):
                sel = data[:, 1] == v
                ax.plot(data[sel, 0], data[sel, col], lw=1, label=f"{v:.4g}")
            ax.legend(title="sweep", fontsize="small")
        else:
            ax.plot(data[:, 0], data[:, col], lw=1)
        ax.set_ylabel(name)
    axes[-1, 0].set_xlabel("t")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_poles(header: list[str], rows: list[list], path: str) -> None:
    """Poles in the complex plane, marker size by weight magnitude."""
    z = np.array([complex(float(r[0]), float(r[1])) for r in rows])
    w = np.array([abs(complex(float(r[2]), float(r[3]))) for r in rows])
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.scatter(z.real, z.imag, s=20 + 200 * w / max(w.max(), 1e-300))
    ax.set_xlabel("Re z")
    ax.set_ylabel("Im z")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
