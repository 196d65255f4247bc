"""Figure builders for benchmark outputs.

Each builder writes a PNG and returns the exact data it drew, so tests can
check the plotted values against the input files without rasterizing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .data import ResultRow, Volume, read_result_csv, read_volume

# left-to-right method order of the benchmark boxplots
METHOD_ORDER = ("pixel1d", "slice2d", "block")


@dataclass(frozen=True)
class FigureRequest:
    kind: str  # boxplot | temporal_cut | trajectory
    inputs: tuple[str, ...]
    out: str
    snr: float | None = None
    t_index: int | None = None
    pixels: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if self.kind not in ("boxplot", "temporal_cut", "trajectory"):
            raise ValueError(f"unknown figure kind {self.kind!r}")


@dataclass(frozen=True)
class BoxplotData:
    snr: float
    methods: tuple[str, ...]
    medians: tuple[float, ...]
    samples: dict


def make_boxplot(csv_path, snr: float, out) -> BoxplotData:
    """One box per method at the given SNR, methods in benchmark order.

    Returns the medians exactly as rendered by the box artists.
    """
    rows = read_result_csv(csv_path)
    rows = [r for r in rows if r.snr == snr]
    if not rows:
        raise ValueError(f"{csv_path}: no rows at snr={snr:g}")
    methods = [m for m in METHOD_ORDER if any(r.method == m for r in rows)]
    methods += sorted({r.method for r in rows} - set(methods))
    samples = {m: [r.mse for r in rows if r.method == m] for m in methods}

    fig, ax = plt.subplots(figsize=(5, 4))
    bp = ax.boxplot([samples[m] for m in methods], tick_labels=methods)
    ax.set_ylabel("empirical mean squared error")
    ax.set_title(f"SNR = {snr:g}")
    fig.tight_layout()
    fig.savefig(out, dpi=120)
    plt.close(fig)

    medians = tuple(float(line.get_ydata()[0]) for line in bp["medians"])
    return BoxplotData(snr=snr, methods=tuple(methods), medians=medians,
                       samples=samples)


@dataclass(frozen=True)
class TemporalCutData:
    t_index: int
    labels: tuple[str, ...]
    panels: tuple[np.ndarray, ...]
    vmin: float
    vmax: float


def default_cut_index(n: int) -> int:
    """The benchmark's reference temporal cut sits at t = 0.5748."""
    return round(0.5748 * n)


def make_temporal_cut(volume_paths, out, t_index: int | None = None,
                      labels=None) -> TemporalCutData:
    """Side-by-side grayscale panels of one time slice from each volume,
    drawn on a shared intensity scale."""
    volumes = [read_volume(p) for p in volume_paths]
    if not volumes:
        raise ValueError("need at least one volume")
    shape = volumes[0].data.shape
    for v, p in zip(volumes, volume_paths):
        if v.data.shape != shape:
            raise ValueError(f"{p}: shape {v.data.shape} differs from {shape}")
    n = volumes[0].n
    if t_index is None:
        t_index = default_cut_index(n)
    if not 0 <= t_index < n:
        raise ValueError(f"time index {t_index} out of range [0, {n})")
    if labels is None:
        labels = tuple(str(p) for p in volume_paths)

    panels = tuple(v.data[t_index].copy() for v in volumes)
    vmin = min(float(p.min()) for p in panels)
    vmax = max(float(p.max()) for p in panels)
    fig, axes = plt.subplots(1, len(panels), figsize=(3 * len(panels), 3.2))
    if len(panels) == 1:
        axes = [axes]
    for ax, panel, label in zip(axes, panels, labels):
        ax.imshow(panel, cmap="gray", vmin=vmin, vmax=vmax)
        ax.set_title(label, fontsize=9)
        ax.axis("off")
    fig.suptitle(f"temporal cut at index {t_index}")
    fig.tight_layout()
    fig.savefig(out, dpi=120)
    plt.close(fig)
    return TemporalCutData(t_index=t_index, labels=tuple(labels), panels=panels,
                           vmin=vmin, vmax=vmax)


@dataclass(frozen=True)
class TrajectoryData:
    pixels: tuple[tuple[int, int], ...]
    series: dict


def make_trajectory(raw_path, denoised_path, pixels, out) -> TrajectoryData:
    """Raw vs denoised time series for the given pixel coordinates,
    coordinates echoed in the legend."""
    raw = read_volume(raw_path)
    den = read_volume(denoised_path)
    if raw.data.shape != den.data.shape:
        raise ValueError("raw and denoised volumes differ in shape")
    if raw.d != 2:
        raise ValueError("trajectory plots need d = 2 volumes")
    pixels = tuple((int(a), int(b)) for a, b in pixels)
    for k1, k2 in pixels:
        if not (0 <= k1 < raw.N and 0 <= k2 < raw.N):
            raise ValueError(f"pixel ({k1}, {k2}) outside the {raw.N}x{raw.N} grid")

    series = {}
    fig, ax = plt.subplots(figsize=(6, 3.5))
    for k1, k2 in pixels:
        r = raw.data[:, k1, k2].copy()
        d = den.data[:, k1, k2].copy()
        series[(k1, k2)] = {"raw": r, "denoised": d}
        ax.plot(r, alpha=0.45, label=f"raw ({k1},{k2})")
        ax.plot(d, label=f"denoised ({k1},{k2})")
    ax.set_xlabel("time index")
    ax.set_ylabel("intensity")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out, dpi=120)
    plt.close(fig)
    return TrajectoryData(pixels=pixels, series=series)


def render(request: FigureRequest):
    """Dispatch a FigureRequest to the matching builder."""
    if request.kind == "boxplot":
        if request.snr is None:
            raise ValueError("boxplot needs snr")
        return make_boxplot(request.inputs[0], request.snr, request.out)
    if request.kind == "temporal_cut":
        return make_temporal_cut(request.inputs, request.out, request.t_index)
    return make_trajectory(request.inputs[0], request.inputs[1],
                           request.pixels, request.out)
