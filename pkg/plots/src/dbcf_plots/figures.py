"""Turn emitted sweep and beam map CSVs into figures.

The renderer never recomputes rates: sweep CSVs are the single source of
truth, and the only processing done here is the same mean-over-realizations
aggregation that the simulation pipeline writes to its JSON summary.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

FIGURE_KINDS = ("rates_vs_g", "rates_vs_m", "beam_heatmap")

SWEEP_COLUMNS = [
    "realization_id", "seed", "mode", "tdma", "M", "K", "N", "G",
    "fronthaul_bw_hz", "user_id", "access_bps", "fronthaul_bps",
    "end_to_end_bps", "t_k", "gamma_star",
]

BEAMMAP_COLUMNS = ["x", "y", "gain"]


class SchemaError(ValueError):
    """An input CSV does not carry the columns the figure needs."""


@dataclass
class FigureSpec:
    """What to draw and where to put it.

    inputs holds the CSV paths: sweep CSVs for the rate figures, and for
    beam_heatmap the gain map CSV followed optionally by the markers CSV.
    """

    kind: str
    inputs: list = field(default_factory=list)
    output: str = "figure.png"
    title: str | None = None
    xlabel: str | None = None
    ylabel: str | None = None
    auto_g: bool = False

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}; "
                              f"expected one of {FIGURE_KINDS}")
        if not self.inputs:
            raise SchemaError("figure spec lists no input CSVs")


def _check_columns(frame: pd.DataFrame, required, path) -> None:
    for column in required:
        if column not in frame.columns:
            raise SchemaError(f"missing column {column!r} in {path}")


def load_sweep(paths) -> pd.DataFrame:
    """Read and concatenate sweep CSVs, validating the pipeline schema."""
    frames = []
    for path in paths:
        frame = pd.read_csv(path)
        _check_columns(frame, SWEEP_COLUMNS, path)
        frames.append(frame)
    return pd.concat(frames, ignore_index=True)


def load_beammap(path) -> pd.DataFrame:
    frame = pd.read_csv(path)
    _check_columns(frame, BEAMMAP_COLUMNS, path)
    return frame


def aggregate_sweep(frame: pd.DataFrame, auto_g: bool = False) -> pd.DataFrame:
    """Mean sum and min rates per (mode, M, bandwidth, tdma, G) point.

    Mirrors the pipeline's JSON summary: user rows of one realization are
    summed first, then averaged over realizations. Fiber rows collapse to a
    single "fiber" point per (M, bandwidth); auto-G sweeps collapse the G
    axis to "auto" and report the mean chosen size.
    """
    work = frame.copy()
    g_key = work["G"].astype(object)
    g_key[work["mode"] == "fiber"] = "fiber"
    if auto_g:
        g_key[work["mode"] != "fiber"] = "auto"
    work["g_key"] = g_key

    records = []
    group_cols = ["mode", "M", "fronthaul_bw_hz", "tdma", "g_key"]
    for key, point in work.groupby(group_cols, sort=False):
        per_real = point.groupby("realization_id")
        sums = per_real["end_to_end_bps"].sum()
        records.append({
            "mode": key[0], "M": int(key[1]), "fronthaul_bw_hz": key[2],
            "tdma": key[3], "G": key[4],
            "realizations": int(per_real.ngroups),
            "mean_g": float(per_real["G"].first().mean()),
            "mean_sum_end_to_end_bps": float(sums.mean()),
            "mean_min_end_to_end_bps": float(per_real["end_to_end_bps"].min().mean()),
            "mean_sum_access_bps": float(per_real["access_bps"].sum().mean()),
            "mean_sum_fronthaul_bps": float(per_real["fronthaul_bps"].sum().mean()),
        })
    out = pd.DataFrame.from_records(records)
    return out.sort_values(group_cols[:4] + ["G"], key=lambda c: c.astype(str),
                           ignore_index=True)


def find_crossing(g_values, first, second):
    """Interpolated abscissa where the two curves cross, or None.

    Scans adjacent points of the curves sampled at g_values for a sign
    change of (second - first) and linearly interpolates inside the
    bracketing interval. An exact touch counts as a crossing.
    """
    g = np.asarray(g_values, dtype=float)
    diff = np.asarray(second, dtype=float) - np.asarray(first, dtype=float)
    order = np.argsort(g)
    g, diff = g[order], diff[order]
    for i in range(len(g) - 1):
        a, b = diff[i], diff[i + 1]
        if a == 0.0:
            return float(g[i])
        if a * b < 0.0:
            return float(g[i] - a * (g[i + 1] - g[i]) / (b - a))
    if len(diff) and diff[-1] == 0.0:
        return float(g[-1])
    return None


def _rate_series(points: pd.DataFrame):
    """Non-fiber curve data per (mode, bandwidth) plus fiber reference levels."""
    series = {}
    curves = points[points["G"] != "fiber"]
    for (mode, bw), part in curves.groupby(["mode", "fronthaul_bw_hz"],
                                           sort=False):
        series[(mode, bw)] = part.reset_index(drop=True)
    fiber = points[points["G"] == "fiber"].reset_index(drop=True)
    return series, fiber


def _format_bw(bw_hz: float) -> str:
    if bw_hz >= 1e9:
        return f"{bw_hz / 1e9:g} GHz"
    return f"{bw_hz / 1e6:g} MHz"


def _build_rates_vs_g(spec: FigureSpec):
    frame = load_sweep(spec.inputs)
    points = aggregate_sweep(frame, auto_g=False)
    series, fiber = _rate_series(points)
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    info = {"points": points, "series": {}}
    for (mode, bw), part in series.items():
        part = part.assign(G=part["G"].astype(int)).sort_values("G")
        g = part["G"].to_numpy()
        e2e = part["mean_sum_end_to_end_bps"].to_numpy() / 1e6
        label = f"{mode}, B_fh={_format_bw(bw)}"
        ax.plot(g, e2e, marker="o", label=label)
        crossing = find_crossing(g, part["mean_sum_access_bps"].to_numpy(),
                                 part["mean_sum_fronthaul_bps"].to_numpy())
        info["series"][(mode, bw)] = {
            "g": g, "end_to_end_mbps": e2e,
            "access_bps": part["mean_sum_access_bps"].to_numpy(),
            "fronthaul_bps": part["mean_sum_fronthaul_bps"].to_numpy(),
            "crossing_g": crossing,
        }
    for _, row in fiber.iterrows():
        ax.axhline(row["mean_sum_end_to_end_bps"] / 1e6, linestyle="--",
                   color="gray", label=f"fiber baseline (M={row['M']})")
    info["fiber"] = fiber
    ax.set_xlabel(spec.xlabel or "group size G")
    ax.set_ylabel(spec.ylabel or "mean sum rate [Mbps]")
    if spec.title:
        ax.set_title(spec.title)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    return fig, info


def _build_rates_vs_m(spec: FigureSpec):
    frame = load_sweep(spec.inputs)
    points = aggregate_sweep(frame, auto_g=spec.auto_g)
    series, fiber = _rate_series(points)
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    info = {"points": points, "series": {}}
    for (mode, bw), part in series.items():
        part = part.sort_values("M")
        m = part["M"].to_numpy()
        e2e = part["mean_sum_end_to_end_bps"].to_numpy() / 1e6
        ax.plot(m, e2e, marker="o", label=f"{mode}, B_fh={_format_bw(bw)}")
        info["series"][(mode, bw)] = {"m": m, "end_to_end_mbps": e2e}
    if len(fiber):
        part = fiber.sort_values("M")
        ax.plot(part["M"].to_numpy(),
                part["mean_sum_end_to_end_bps"].to_numpy() / 1e6,
                marker="s", linestyle="--", color="gray", label="fiber baseline")
    info["fiber"] = fiber
    ax.set_xlabel(spec.xlabel or "number of APs M")
    ax.set_ylabel(spec.ylabel or "mean sum rate [Mbps]")
    if spec.title:
        ax.set_title(spec.title)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    return fig, info


def _build_beam_heatmap(spec: FigureSpec):
    grid = load_beammap(spec.inputs[0])
    xs = np.unique(grid["x"].to_numpy())
    ys = np.unique(grid["y"].to_numpy())
    if len(grid) != len(xs) * len(ys):
        raise SchemaError(f"beam map {spec.inputs[0]} is not a full x/y grid")
    pivot = grid.pivot(index="y", columns="x", values="gain")
    z = pivot.to_numpy()

    fig, ax = plt.subplots(figsize=(6.0, 5.2))
    mesh = ax.pcolormesh(pivot.columns.to_numpy(), pivot.index.to_numpy(), z,
                         shading="nearest", cmap="viridis")
    fig.colorbar(mesh, ax=ax, label="beam gain")

    markers = None
    if len(spec.inputs) > 1:
        markers = pd.read_csv(spec.inputs[1])
        _check_columns(markers, ["kind", "index", "x", "y", "in_group"],
                       spec.inputs[1])
        aps = markers[markers["kind"] == "ap"]
        served = aps[aps["in_group"] == 1]
        idle = aps[aps["in_group"] == 0]
        ax.scatter(idle["x"], idle["y"], s=12, c="white", edgecolors="black",
                   linewidths=0.4, label="AP")
        ax.scatter(served["x"], served["y"], s=30, c="red",
                   edgecolors="black", linewidths=0.5, label="group AP")
        ues = markers[markers["kind"] == "ue"]
        ax.scatter(ues["x"], ues["y"], marker="^", s=30, c="cyan",
                   edgecolors="black", linewidths=0.5, label="UE")
        cpu = markers[markers["kind"] == "cpu"]
        ax.scatter(cpu["x"], cpu["y"], marker="*", s=140, c="yellow",
                   edgecolors="black", linewidths=0.5, label="CPU")
        ax.legend(fontsize=8, loc="upper right")

    ax.set_xlabel(spec.xlabel or "x [m]")
    ax.set_ylabel(spec.ylabel or "y [m]")
    if spec.title:
        ax.set_title(spec.title)
    ax.set_aspect("equal")
    info = {"x": xs, "y": ys, "grid": z, "markers": markers}
    return fig, info


_BUILDERS = {
    "rates_vs_g": _build_rates_vs_g,
    "rates_vs_m": _build_rates_vs_m,
    "beam_heatmap": _build_beam_heatmap,
}


def build_figure(spec: FigureSpec):
    """Build the matplotlib figure plus the aggregated data behind it."""
    return _BUILDERS[spec.kind](spec)


def render(spec: FigureSpec) -> str:
    """Render the figure described by spec and write it to spec.output."""
    fig, _ = build_figure(spec)
    fig.savefig(spec.output, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return spec.output
