"""Render sweep figures from aggregate rows to image files."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

_STYLES = {"signal": dict(marker="o", color="tab:blue"),
           "power": dict(marker="s", color="tab:red")}

_FIGURES = (
    ("detection_rate", "Detection rate", False),
    ("nmse", "NMSE of channel estimation", True),
    ("se", "Spectral efficiency [bit/s/Hz]", False),
    ("uatf_se", "SE lower bound [bit/s/Hz]", False),
    ("config_gap", "Achieved vs ideal configuration gap", False),
)


def render_figures(aggregates, out_dir) -> list:
    """One figure per sweep metric, curves over C/L per hardware type."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for metric, label, logy in _FIGURES:
        rows = [a for a in aggregates if a["metric"] == metric]
        if not rows:
            continue
        fig, ax = plt.subplots(figsize=(5.0, 3.4))
        for hardware in ("signal", "power"):
            pts = sorted((a["c_over_l"], a["mean"], a["std"])
                         for a in rows if a["hardware"] == hardware)
            if not pts:
                continue
            x, mean, std = zip(*pts)
            ax.errorbar(x, mean, yerr=std, label=hardware, capsize=2,
                        **_STYLES[hardware])
        if logy:
            ax.set_yscale("log")
        ax.set_xlabel("C / L")
        ax.set_ylabel(label)
        ax.grid(True, alpha=0.4)
        ax.legend()
        fig.tight_layout()
        path = out_dir / f"{metric}.png"
        fig.savefig(path, dpi=150)
        plt.close(fig)
        paths.append(path)
    return paths
