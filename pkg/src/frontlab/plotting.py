"""Plot artifacts: gnuplot scripts referencing the CSVs, and PNG figures.

Scripts are plain text and deterministic for a fixed artifact set; the PNGs
are rendered with matplotlib's non-interactive backend.
"""

from __future__ import annotations

import shutil
import subprocess
from pathlib import Path
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .errors import FrontlabError  # noqa: E402

__all__ = ["emit_plots", "gnuplot_available", "check_gnuplot", "figure_profiles", "figure_traces", "figure_sweep"]


class MissingArtifacts(FrontlabError):
    def __init__(self, missing):
        super().__init__("missing artifacts: " + ", ".join(str(m) for m in missing))
        self.missing = list(missing)


def _rel(path: Path, base: Path) -> str:
    return str(Path(path).resolve().relative_to(base.resolve()))


def emit_plots(
    out_dir,
    snapshots: Sequence = (),
    traces: Sequence = (),
    verdicts: Optional[Path] = None,
    name: str = "plots",
) -> list:
    """Write gnuplot scripts into ``out_dir`` and return their paths.

    Every listed CSV must exist; paths inside the scripts are relative to
    ``out_dir`` so the bundle can be moved.
    """
    out = Path(out_dir)
    listed = [Path(p) for p in list(snapshots) + list(traces) + ([verdicts] if verdicts else [])]
    missing = [p for p in listed if not p.exists()]
    if missing:
        raise MissingArtifacts(missing)
    scripts = []
    head = ['set datafile separator ","', "set datafile commentschars \"#\"", "set key outside right", "set grid"]
    if snapshots:
        lines = head + [
            "set terminal pngcairo size 900,600",
            f"set output '{name}_profiles.png'",
            "set xlabel 's'",
            "set ylabel 'w(s,t)'",
        ]
        parts = [f"'{_rel(p, out)}' using 1:2 every ::1 with lines title '{Path(p).stem}'" for p in snapshots]
        lines.append("plot " + ", \\\n     ".join(parts))
        scripts.append(_write(out / f"{name}_profiles.gp", lines))
    if traces:
        lines = head + [
            "set terminal pngcairo size 900,600",
            f"set output '{name}_fronts.png'",
            "set xlabel 't'",
            "set ylabel 'front radius'",
        ]
        parts = [f"'{_rel(p, out)}' using 1:3 every ::1 with linespoints title '{Path(p).parent.name}'" for p in traces]
        lines.append("plot " + ", \\\n     ".join(parts))
        scripts.append(_write(out / f"{name}_fronts.gp", lines))
    if verdicts:
        lines = head + [
            "set terminal pngcairo size 900,600",
            f"set output '{name}_verdicts.png'",
            "set logscale x",
            "set xlabel 'A / A_crit'",
            "set ylabel 'fitted front slope'",
            "set xzeroaxis",
            f"plot '{_rel(verdicts, out)}' using 2:8 every ::1 with points pt 7 title 'slope'",
        ]
        scripts.append(_write(out / f"{name}_verdicts.gp", lines))
    return scripts


def _write(path: Path, lines) -> Path:
    path.write_text("\n".join(lines) + "\n")
    return path


def gnuplot_available() -> bool:
    return shutil.which("gnuplot") is not None


def check_gnuplot(script: Path) -> bool:
    """Run the script through gnuplot when installed; ``True`` if accepted."""
    exe = shutil.which("gnuplot")
    if exe is None:
        raise FileNotFoundError("gnuplot not installed")
    proc = subprocess.run([exe, Path(script).name], cwd=Path(script).parent, capture_output=True, text=True)
    return proc.returncode == 0


def figure_profiles(path, snapshots, title: str = "") -> Path:
    """``snapshots``: iterable of ``(t, GridFunction)``."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    snaps = list(snapshots)
    for t, g in snaps:
        ax.plot(g.s, g.values, lw=0.9, label=f"t={t:.4g}")
    ax.set_xlabel("s")
    ax.set_ylabel("w")
    ax.set_title(title)
    if len(snaps) <= 12:
        ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return Path(path)


def figure_traces(path, traces: dict, r1: Optional[float] = None, title: str = "") -> Path:
    """``traces``: label -> FrontTrace."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for label, tr in traces.items():
        ax.plot(tr.t, tr.r_front, marker=".", lw=0.9, label=label)
    if r1 is not None:
        ax.axhline(r1, color="k", lw=0.6, ls="--")
    ax.set_xlabel("t")
    ax.set_ylabel("front radius")
    ax.set_title(title)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return Path(path)


def figure_sweep(path, rows, title: str = "") -> Path:
    """``rows``: ``(ratio, eps, slope)`` triples."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    by_eps: dict = {}
    for ratio, eps, slope in rows:
        by_eps.setdefault(eps, []).append((ratio, slope))
    for eps, pts in sorted(by_eps.items()):
        pts.sort()
        ax.plot([a for a, _ in pts], [b for _, b in pts], marker="o", label=f"eps={eps:g}")
    ax.axhline(0.0, color="k", lw=0.6)
    ax.axvline(1.0, color="k", lw=0.6, ls=":")
    ax.set_xscale("log")
    ax.set_xlabel("A / A_crit")
    ax.set_ylabel("fitted front slope")
    ax.set_title(title)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return Path(path)
