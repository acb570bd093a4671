"""End-to-end rate assembly, Monte Carlo sweeps and the fiber baseline.

A realization draws one placement, then runs the two-step chain: user-centric
grouping (with optional group-size iteration), max-min access power control,
per-group multicast fronthaul beams, TDMA scheduling, and the per-user
end-to-end rate min(B_ac * R_ac, t_k * B_fh * R_fh).  Sweeps fan realizations
out over derived seeds and emit one CSV row per (point, realization, user)
plus an aggregate JSON summary; outputs are byte-identical for a given master
seed regardless of worker count.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .access_power import PowerAllocation, access_rates, maxmin_power_bisection
from .beamforming import make_codebook, multicast_beam_heuristic
from .channel import build_access_stats, build_fronthaul_channels
from .errors import ConfigurationError
from .fronthaul_sched import TdmaSchedule, tdma_capped, tdma_equal_rate
from .grouping import access_grouping, cluster_top_g, top_g_groups
from .scenario import (SystemConfig, derive_seed, generate_grid_clusters,
                       generate_placement, normalize_powers)

MODES = ("separate", "mixed", "fiber")
TDMA_APPROACHES = ("approach1", "approach2")

# fronthaul side of the fiber baseline: never the bottleneck
FIBER_FRONTHAUL_BPS = math.inf

CSV_COLUMNS = ["realization_id", "seed", "mode", "tdma", "M", "K", "N", "G",
               "fronthaul_bw_hz", "user_id", "access_bps", "fronthaul_bps",
               "end_to_end_bps", "t_k", "gamma_star"]


@dataclass
class RealizationResult:
    seed: int
    mode: str
    tdma: str
    g_star: int
    gamma_star: float
    per_user_access_bps: np.ndarray
    per_user_fronthaul_bps: np.ndarray
    per_user_end_to_end_bps: np.ndarray
    schedule: TdmaSchedule | None
    allocation: PowerAllocation
    groups: list
    history: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)


@dataclass
class SweepResult:
    points: list       # aggregate dicts, one per (mode, M, bandwidth, G axis)
    rows: list         # raw CSV rows as dicts
    csv_path: Path | None
    json_path: Path | None


def end_to_end_rates(access_rates_shz, group_rates_shz, schedule: TdmaSchedule,
                     access_bw_hz: float, fronthaul_bw_hz: float) -> np.ndarray:
    """Per-user delivered rate: min of the bandwidth-scaled channel rates."""
    access_bps = access_bw_hz * np.asarray(access_rates_shz, dtype=float)
    fronthaul_bps = schedule.t * fronthaul_bw_hz * np.asarray(group_rates_shz,
                                                              dtype=float)
    return np.minimum(access_bps, fronthaul_bps)


class RealizationContext:
    """One placement draw with caches for the per-group-size sub-solvers.

    Access power control and beam search are independent of the fronthaul
    bandwidth, so sweeping bandwidths on a fixed seed reuses both caches.
    """

    def __init__(self, config: SystemConfig, seed: int, mode: str = "separate",
                 grid_shape: tuple[int, int] | None = None):
        if mode not in MODES:
            raise ConfigurationError(f"unknown mode {mode!r}")
        self.config = config
        self.seed = seed
        self.mode = mode
        self.powers = normalize_powers(config)
        if mode == "mixed":
            if grid_shape is None:
                side = int(round(math.sqrt(config.num_aps)))
                if side * side != config.num_aps:
                    raise ConfigurationError(
                        "mixed mode needs a square AP count for the cluster grid")
                grid_shape = (side, side)
            self.placement, self.layout = generate_grid_clusters(
                config, grid_shape[0], grid_shape[1], seed)
        else:
            self.placement, self.layout = generate_placement(config, seed), None
        self.fronthaul = build_fronthaul_channels(self.placement, config)
        self.stats = build_access_stats(self.placement, config, self.powers.rho_t)
        self.codebook = make_codebook(config.cpu_antennas, config.phase_bits)
        self._groupings = {}
        self._access_cache = {}
        self._beam_cache = {}
        self._hi_hint = None

    @property
    def g_bounds(self) -> tuple[int, int]:
        if self.mode == "mixed":
            return 1, self.layout.num_clusters
        return 1, self.config.num_aps

    def _grouping(self, g: int):
        if g not in self._groupings:
            if self.mode == "mixed":
                cg = cluster_top_g(self.stats.beta, self.layout, g)
                self._groupings[g] = (access_grouping(cg, self.config.num_aps),
                                      cg.fronthaul_groups)
            else:
                grouping = top_g_groups(self.stats.beta, g)
                self._groupings[g] = (grouping, grouping.groups)
        return self._groupings[g]

    def access_eval(self, g: int):
        """Equal-SINR max-min access solution at group size g (cached)."""
        if g not in self._access_cache:
            grouping, _ = self._grouping(g)
            result = maxmin_power_bisection(grouping, self.stats,
                                            self.powers.rho_ac,
                                            hi_hint=self._hi_hint)
            if result.gamma_star > 0:
                self._hi_hint = result.gamma_star
            rates = access_rates(result.allocation, self.stats, self.powers.rho_ac)
            self._access_cache[g] = (result, rates)
        return self._access_cache[g]

    def fronthaul_eval(self, g: int) -> np.ndarray:
        """Per-user multicast group rates (bits/s/Hz) at group size g (cached)."""
        if g not in self._beam_cache:
            _, beam_groups = self._grouping(g)
            rates = np.array([
                multicast_beam_heuristic(members, self.fronthaul, self.codebook,
                                         self.powers.rho_fh).group_rate
                for members in beam_groups])
            self._beam_cache[g] = rates
        return self._beam_cache[g]

    def schedule_for(self, g: int, tdma: str,
                     fronthaul_bw_hz: float) -> TdmaSchedule:
        fh_rates = self.fronthaul_eval(g)
        if tdma == "approach1":
            return tdma_equal_rate(fh_rates)
        if tdma != "approach2":
            raise ConfigurationError(f"unknown tdma approach {tdma!r}")
        _, ac_rates = self.access_eval(g)
        # no value in fronthaul time beyond what the access link can drain
        caps = (self.config.access_bw_hz * ac_rates) / (fronthaul_bw_hz * fh_rates)
        return tdma_capped(fh_rates, caps)

    def evaluate(self, g: int, fronthaul_bw_hz: float):
        """Sum access and sum fronthaul rate (bits/s) at group size g.

        The fronthaul side uses the cap-free equal-rate TDMA sum (harmonic
        mean of the group rates); capped schedules can never exceed the
        access sum, which would freeze the group-size walk.
        """
        _, ac_rates = self.access_eval(g)
        fh_rates = self.fronthaul_eval(g)
        schedule = tdma_equal_rate(fh_rates)
        access_sum = float(self.config.access_bw_hz * ac_rates.sum())
        fronthaul_sum = float(fronthaul_bw_hz * (schedule.t * fh_rates).sum())
        return access_sum, fronthaul_sum


def _fiber_result(ctx: RealizationContext, tdma: str) -> RealizationResult:
    _, hi = ctx.g_bounds
    result, ac_rates = ctx.access_eval(hi)
    access_bps = ctx.config.access_bw_hz * ac_rates
    num_ues = ctx.config.num_ues
    grouping, _ = ctx._grouping(hi)
    return RealizationResult(
        seed=ctx.seed, mode="fiber", tdma=tdma, g_star=ctx.config.num_aps,
        gamma_star=result.gamma_star,
        per_user_access_bps=access_bps,
        per_user_fronthaul_bps=np.full(num_ues, FIBER_FRONTHAUL_BPS),
        per_user_end_to_end_bps=access_bps.copy(),
        schedule=None, allocation=result.allocation,
        groups=[g.copy() for g in grouping.groups],
        meta={"maxmin_solves": len(result.meta["solves"]),
              "indeterminate": result.meta["indeterminate"]})


def run_realization(config: SystemConfig, seed: int, mode: str = "separate",
                    tdma: str = "approach2", g: int | None = None,
                    g_init: int | None = None,
                    context: RealizationContext | None = None) -> RealizationResult:
    """Full single-realization chain at one (mode, tdma) operating point.

    With g=None the group size is chosen by the fronthaul/access sum-rate
    iteration; otherwise the given size is used directly.  A prebuilt context
    may be passed to share caches across operating points on the same seed.
    """
    if tdma not in TDMA_APPROACHES:
        raise ConfigurationError(f"unknown tdma approach {tdma!r}")
    ctx = context if context is not None else RealizationContext(config, seed, mode)
    try:
        if mode == "fiber":
            return _fiber_result(ctx, tdma)

        bw = config.fronthaul_bw_hz
        history = []
        if g is None:
            g_star, history = _optimize(ctx, bw, g_init)
        else:
            lo, hi = ctx.g_bounds
            if not lo <= g <= hi:
                raise ConfigurationError(f"group size {g} outside [{lo}, {hi}]")
            g_star = g

        result, ac_rates = ctx.access_eval(g_star)
        fh_rates = ctx.fronthaul_eval(g_star)
        schedule = ctx.schedule_for(g_star, tdma, bw)
        e2e = end_to_end_rates(ac_rates, fh_rates, schedule,
                               config.access_bw_hz, bw)
        grouping, _ = ctx._grouping(g_star)
        return RealizationResult(
            seed=seed, mode=mode, tdma=tdma, g_star=g_star,
            gamma_star=result.gamma_star,
            per_user_access_bps=config.access_bw_hz * ac_rates,
            per_user_fronthaul_bps=schedule.t * bw * fh_rates,
            per_user_end_to_end_bps=e2e,
            schedule=schedule, allocation=result.allocation,
            groups=[members.copy() for members in grouping.groups],
            history=history,
            meta={"maxmin_solves": len(result.meta["solves"]),
                  "indeterminate": result.meta["indeterminate"]})
    except Exception as exc:
        if hasattr(exc, "add_note"):
            exc.add_note(f"realization seed={seed} mode={mode} tdma={tdma}")
        raise


def _optimize(ctx: RealizationContext, fronthaul_bw_hz: float,
              g_init: int | None):
    from .grouping import optimize_group_size

    def evaluate(g):
        return ctx.evaluate(g, fronthaul_bw_hz)

    start = g_init if g_init is not None else _probe_g_init(ctx, evaluate)
    return optimize_group_size(evaluate, start, ctx.g_bounds)


def _probe_g_init(ctx: RealizationContext, evaluate) -> int:
    """Locate the fronthaul/access crossing by bisection on its sign.

    The access sum rate grows and the fronthaul sum rate shrinks with the
    group size, so the up/down step direction of the size iteration is
    monotone in G.  A handful of bisection probes lands the starting size
    next to the fixed point; the probed evaluations stay in the context
    caches, so the subsequent step-by-step iteration revisits them for free.
    """
    lo, hi = ctx.g_bounds

    def steps_up(g):
        access_sum, fronthaul_sum = evaluate(g)
        return fronthaul_sum >= access_sum

    if steps_up(hi):
        return hi
    if not steps_up(lo):
        return lo
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if steps_up(mid):
            lo = mid
        else:
            hi = mid
    return hi


def _result_rows(result: RealizationResult, realization_id: int,
                 config: SystemConfig, fronthaul_bw_hz: float) -> list:
    rows = []
    t = result.schedule.t if result.schedule is not None else np.zeros(config.num_ues)
    for k in range(config.num_ues):
        rows.append({
            "realization_id": realization_id,
            "seed": result.seed,
            "mode": result.mode,
            "tdma": result.tdma,
            "M": config.num_aps,
            "K": config.num_ues,
            "N": config.cpu_antennas,
            "G": result.g_star,
            "fronthaul_bw_hz": fronthaul_bw_hz,
            "user_id": k,
            "access_bps": float(result.per_user_access_bps[k]),
            "fronthaul_bps": float(result.per_user_fronthaul_bps[k]),
            "end_to_end_bps": float(result.per_user_end_to_end_bps[k]),
            "t_k": float(t[k]),
            "gamma_star": result.gamma_star,
        })
    return rows


def _realization_rows(task) -> list:
    """All CSV rows contributed by one (config, realization) pair."""
    (config, realization_id, mode, tdma, bw_values, g_values,
     include_fiber) = task
    seed = derive_seed(config.master_seed, realization_id)
    ctx = RealizationContext(config, seed, mode)
    rows = []
    for bw in bw_values:
        cfg_bw = replace(config, fronthaul_bw_hz=bw)
        for g in g_values:
            result = run_realization(cfg_bw, seed, mode, tdma, g=g,
                                     context=ctx)
            rows.extend(_result_rows(result, realization_id, cfg_bw, bw))
    if include_fiber:
        fiber = _fiber_result(ctx, tdma)
        rows.extend(_result_rows(fiber, realization_id, config,
                                 config.fronthaul_bw_hz))
    return rows


def _aggregate(rows: list, auto_g: bool = False) -> list:
    """Mean sum and min rates per (mode, M, fronthaul bandwidth, G) point.

    Auto-G sweeps pick a per-realization group size, so those points collapse
    the G axis to "auto" and report the mean chosen size.
    """
    points = {}
    per_real = {}
    for row in rows:
        if row["mode"] == "fiber":
            g_key = "fiber"
        else:
            g_key = "auto" if auto_g else row["G"]
        key = (row["mode"], row["M"], row["fronthaul_bw_hz"],
               row["tdma"], g_key)
        per_real.setdefault(key, {}).setdefault(row["realization_id"], []).append(row)
    for key in sorted(per_real, key=str):
        mode, m, bw, tdma, _ = key
        reals = per_real[key]
        sums, mins, ac_sums, fh_sums, gs = [], [], [], [], []
        for rid in sorted(reals):
            user_rows = reals[rid]
            e2e = [r["end_to_end_bps"] for r in user_rows]
            sums.append(sum(e2e))
            mins.append(min(e2e))
            ac_sums.append(sum(r["access_bps"] for r in user_rows))
            fh_sums.append(sum(r["fronthaul_bps"] for r in user_rows))
            gs.append(user_rows[0]["G"])
        points[key] = {
            "mode": mode, "M": m, "fronthaul_bw_hz": bw, "tdma": tdma,
            "G": key[4], "realizations": len(reals),
            "mean_g": float(np.mean(gs)),
            "mean_sum_end_to_end_bps": float(np.mean(sums)),
            "mean_min_end_to_end_bps": float(np.mean(mins)),
            "mean_sum_access_bps": float(np.mean(ac_sums)),
            "mean_sum_fronthaul_bps": float(np.mean(fh_sums)),
        }
    return list(points.values())


def sweep_and_emit(config: SystemConfig, out_dir, mode: str = "separate",
                   tdma: str = "approach2", g_values=None, bw_values=None,
                   m_values=None, realizations: int | None = None,
                   include_fiber: bool = True, workers: int = 1,
                   basename: str = "sweep") -> SweepResult:
    """Run the Monte Carlo sweep and write CSV + JSON summary files.

    g_values of [None] (the default) lets every realization pick its group
    size by the sum-rate iteration.  Rows come out in a fixed (M, realization,
    bandwidth, G, user) order, so reruns are byte-identical for a given
    master seed no matter how many workers execute them.
    """
    if mode not in MODES or mode == "fiber":
        raise ConfigurationError("sweep mode must be 'separate' or 'mixed'")
    out_dir = Path(out_dir) if out_dir is not None else None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        csv_path = out_dir / f"{basename}.csv"
        json_path = out_dir / f"{basename}.json"
        # fail fast on an unwritable destination, before any computation
        with open(csv_path, "w"):
            pass
    else:
        csv_path = json_path = None

    n_real = config.realizations if realizations is None else realizations
    m_list = list(m_values) if m_values else [config.num_aps]
    bw_list = [float(b) for b in bw_values] if bw_values else [config.fronthaul_bw_hz]
    g_list = list(g_values) if g_values else [None]

    tasks = []
    for m in m_list:
        cfg_m = replace(config, num_aps=m)
        for r in range(n_real):
            tasks.append((cfg_m, r, mode, tdma, tuple(bw_list), tuple(g_list),
                          include_fiber))

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            row_blocks = list(pool.map(_realization_rows, tasks))
    else:
        row_blocks = [_realization_rows(t) for t in tasks]
    rows = [row for block in row_blocks for row in block]

    if csv_path is not None:
        with open(csv_path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
            writer.writeheader()
            for row in rows:
                writer.writerow({c: repr(row[c]) if isinstance(row[c], float)
                                 else row[c] for c in CSV_COLUMNS})

    points = _aggregate(rows, auto_g=g_list == [None])
    if json_path is not None:
        with open(json_path, "w") as fh:
            json.dump({"mode": mode, "tdma": tdma, "realizations": n_real,
                       "m_values": m_list, "bw_values": bw_list,
                       "g_values": [g if g is not None else "auto" for g in g_list],
                       "points": points}, fh, indent=2)
    return SweepResult(points=points, rows=rows, csv_path=csv_path,
                       json_path=json_path)
