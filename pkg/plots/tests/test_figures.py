import csv
import hashlib
import json
import subprocess
import sys

import numpy as np
import pandas as pd
import pytest

from dbcf_plots import (
    FigureSpec,
    SchemaError,
    aggregate_sweep,
    build_figure,
    find_crossing,
    load_sweep,
    render,
)
from dbcf_plots.figures import SWEEP_COLUMNS


def _write_sweep_csv(path, g_values, realizations=1, users=4, mode="separate",
                     bw=2e9, fiber_rate=None):
    rows = []
    for rid in range(realizations):
        for g in g_values:
            for k in range(users):
                access = 1e7 * (g + k + 1)
                fronthaul = 2e8 / g + 1e6 * k
                rows.append([rid, 1000 + rid, mode, "approach1", 16, users, 16,
                             g, bw, k, access, fronthaul,
                             min(access, fronthaul), 1.0 / users, 0.5])
        if fiber_rate is not None:
            for k in range(users):
                rows.append([rid, 1000 + rid, "fiber", "approach1", 16, users,
                             16, 16, bw, k, fiber_rate, float("inf"),
                             fiber_rate, 0.0, 0.5])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_COLUMNS)
        writer.writerows(rows)
    return path


def _write_beammap_csv(path, n=5, gain=None):
    axis = np.linspace(-10.0, 10.0, n)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "gain"])
        for y in axis:
            for x in axis:
                value = gain if gain is not None else float(x * x + y)
                writer.writerow([repr(float(x)), repr(float(y)), repr(value)])
    return path


def _sha256(path):
    return hashlib.sha256(open(path, "rb").read()).hexdigest()


def test_rates_vs_g_two_point_line_chart(tmp_path):
    path = _write_sweep_csv(tmp_path / "sweep.csv", [2, 3], fiber_rate=9e7)
    spec = FigureSpec(kind="rates_vs_g", inputs=[str(path)],
                      output=str(tmp_path / "fig.png"))
    fig, info = build_figure(spec)
    series = info["series"][("separate", 2e9)]
    assert list(series["g"]) == [2, 3]
    line = fig.axes[0].lines[0]
    assert len(line.get_xdata()) == 2
    render(spec)
    assert (tmp_path / "fig.png").stat().st_size > 0


def test_rendering_leaves_inputs_unmodified(tmp_path):
    sweep = _write_sweep_csv(tmp_path / "sweep.csv", [2, 4, 6], fiber_rate=9e7)
    beammap = _write_beammap_csv(tmp_path / "map.csv")
    before = (_sha256(sweep), _sha256(beammap))
    render(FigureSpec(kind="rates_vs_g", inputs=[str(sweep)],
                      output=str(tmp_path / "a.png")))
    render(FigureSpec(kind="beam_heatmap", inputs=[str(beammap)],
                      output=str(tmp_path / "b.png")))
    assert (_sha256(sweep), _sha256(beammap)) == before


def test_missing_column_names_the_column(tmp_path):
    path = _write_sweep_csv(tmp_path / "sweep.csv", [2, 3])
    frame = pd.read_csv(path).drop(columns=["access_bps"])
    frame.to_csv(tmp_path / "broken.csv", index=False)
    with pytest.raises(SchemaError, match="access_bps"):
        load_sweep([tmp_path / "broken.csv"])


def test_unknown_kind_and_empty_inputs_rejected(tmp_path):
    with pytest.raises(SchemaError, match="kind"):
        FigureSpec(kind="pie", inputs=["x.csv"])
    with pytest.raises(SchemaError, match="input"):
        FigureSpec(kind="rates_vs_g", inputs=[])


def test_constant_gain_gives_uniform_heatmap(tmp_path):
    path = _write_beammap_csv(tmp_path / "map.csv", n=6, gain=3.0)
    spec = FigureSpec(kind="beam_heatmap", inputs=[str(path)],
                      output=str(tmp_path / "map.png"))
    fig, info = build_figure(spec)
    assert info["grid"].shape == (6, 6)
    assert np.all(info["grid"] == 3.0)
    render(spec)
    assert (tmp_path / "map.png").stat().st_size > 0


def test_find_crossing():
    assert find_crossing([2, 4, 6], [1.0, 3.0, 5.0], [4.0, 4.0, 4.0]) == 5.0
    assert find_crossing([2, 4], [1.0, 2.0], [5.0, 6.0]) is None
    assert find_crossing([2, 4], [3.0, 5.0], [3.0, 1.0]) == 2.0


def test_rates_vs_m_series(tmp_path):
    a = _write_sweep_csv(tmp_path / "m16.csv", [4], fiber_rate=9e7)
    frame = pd.read_csv(a)
    frame["M"] = 32
    frame.loc[frame["mode"] != "fiber", "access_bps"] *= 2.0
    frame["end_to_end_bps"] = frame[["access_bps", "fronthaul_bps"]].min(axis=1)
    frame.to_csv(tmp_path / "m32.csv", index=False)
    spec = FigureSpec(kind="rates_vs_m", inputs=[str(a), str(tmp_path / "m32.csv")],
                      output=str(tmp_path / "m.png"), auto_g=True)
    _, info = build_figure(spec)
    series = info["series"][("separate", 2e9)]
    assert list(series["m"]) == [16, 32]
    render(spec)


def test_aggregation_matches_pipeline_json(tmp_path):
    out = tmp_path / "sweep"
    subprocess.run(
        [sys.executable, "-m", "dualband_cellfree.cli", "sweep",
         "--set", "num_aps=16", "--set", "num_ues=4",
         "--set", "cpu_antennas=16", "--set", "pilot_length=4",
         "--sweep-g", "2,4", "--realizations", "2",
         "--out", str(out)],
        check=True, capture_output=True, text=True)
    frame = load_sweep([out / "sweep.csv"])
    points = aggregate_sweep(frame)
    with open(out / "sweep.json") as fh:
        summary = json.load(fh)
    expected = {(p["mode"], p["M"], p["fronthaul_bw_hz"], p["tdma"],
                 str(p["G"])): p for p in summary["points"]}
    assert len(points) == len(expected)
    fields = ["mean_g", "mean_sum_end_to_end_bps", "mean_min_end_to_end_bps",
              "mean_sum_access_bps", "mean_sum_fronthaul_bps"]
    for _, row in points.iterrows():
        ref = expected[(row["mode"], row["M"], row["fronthaul_bw_hz"],
                        row["tdma"], str(row["G"]))]
        for name in fields:
            assert row[name] == pytest.approx(ref[name], rel=1e-9), name


def test_cli_plot_spec_and_kind_commands(tmp_path):
    sweep = _write_sweep_csv(tmp_path / "sweep.csv", [2, 3], fiber_rate=9e7)
    spec_path = tmp_path / "spec.json"
    with open(spec_path, "w") as fh:
        json.dump({"kind": "rates_vs_g", "inputs": [str(sweep)],
                   "output": str(tmp_path / "cli.png")}, fh)
    out = subprocess.run([sys.executable, "-m", "dbcf_plots.cli", "plot",
                          "--spec", str(spec_path)],
                         capture_output=True, text=True)
    assert out.returncode == 0, out.stderr
    assert (tmp_path / "cli.png").stat().st_size > 0

    beammap = _write_beammap_csv(tmp_path / "map.csv")
    out = subprocess.run([sys.executable, "-m", "dbcf_plots.cli",
                          "beam-heatmap", "--csv", str(beammap),
                          "--out", str(tmp_path / "hm.png")],
                         capture_output=True, text=True)
    assert out.returncode == 0, out.stderr

    out = subprocess.run([sys.executable, "-m", "dbcf_plots.cli",
                          "rates-vs-g", "--csv", str(tmp_path / "missing.csv"),
                          "--out", str(tmp_path / "x.png")],
                         capture_output=True, text=True)
    assert out.returncode == 2
