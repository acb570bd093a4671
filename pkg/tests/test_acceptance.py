"""Figure-level and oracle acceptance checks.

Each test prints one [PASS]/[FAIL] line for its criterion (visible in the
pytest -rA summary). The heavy Monte Carlo sweeps are shared module-scoped
fixtures so the suite stays within a desktop-class runtime budget.
"""

import hashlib

import numpy as np
import pytest

from dualband_cellfree.access_power import maxmin_power_bisection
from dualband_cellfree.beamforming import (make_codebook,
                                           multicast_beam_exhaustive,
                                           multicast_beam_heuristic)
from dualband_cellfree.channel import AccessStats, build_fronthaul_channels, \
    mmse_variance
from dualband_cellfree.fronthaul_sched import tdma_capped, tdma_equal_rate
from dualband_cellfree.grouping import full_grouping
from dualband_cellfree.pipeline import sweep_and_emit
from dualband_cellfree.scenario import SystemConfig, generate_placement

FULL = SystemConfig()  # full-scale defaults: M=100, K=10, N=128


def report(name, ok, detail):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


def point(sweep, **match):
    hits = [p for p in sweep.points
            if all(p[k] == v for k, v in match.items())]
    assert len(hits) == 1, (match, sweep.points)
    return hits[0]


@pytest.fixture(scope="module")
def separate_sweep():
    # separate architecture, Approach 2, auto group size, both bandwidths
    return sweep_and_emit(FULL, None, mode="separate", tdma="approach2",
                          bw_values=[2e9, 480e6], realizations=25)


@pytest.fixture(scope="module")
def mixed_sweep():
    return sweep_and_emit(FULL, None, mode="mixed", tdma="approach2",
                          bw_values=[80e6], realizations=25)


@pytest.fixture(scope="module")
def trend_g_sweep():
    return sweep_and_emit(FULL, None, mode="separate", tdma="approach1",
                          g_values=[2, 6, 10, 14, 18, 22], realizations=10,
                          include_fiber=False)


@pytest.fixture(scope="module")
def trend_m_sweep():
    return sweep_and_emit(FULL, None, mode="separate", tdma="approach2",
                          m_values=[25, 50, 100], realizations=10,
                          include_fiber=False)


def test_separate_full_scale_rates(separate_sweep):
    e2e = point(separate_sweep, mode="separate",
                fronthaul_bw_hz=2e9)["mean_sum_end_to_end_bps"]
    fiber = point(separate_sweep, mode="fiber")["mean_sum_end_to_end_bps"]
    ok = (450e6 <= e2e <= 750e6) and (550e6 <= fiber <= 850e6) \
        and e2e >= 0.75 * fiber
    report("separate full scale 2 GHz", ok,
           f"end-to-end {e2e / 1e6:.1f} Mbps (want [450,750]), "
           f"fiber {fiber / 1e6:.1f} Mbps (want [550,850]), "
           f"ratio {e2e / fiber:.3f} (want >= 0.75)")


def test_reduced_bandwidth_point(separate_sweep):
    e2e = point(separate_sweep, mode="separate",
                fronthaul_bw_hz=480e6)["mean_sum_end_to_end_bps"]
    fiber = point(separate_sweep, mode="fiber")["mean_sum_end_to_end_bps"]
    ok = e2e >= 0.70 * fiber
    report("480 MHz bandwidth point", ok,
           f"end-to-end {e2e / 1e6:.1f} Mbps, fiber {fiber / 1e6:.1f} Mbps, "
           f"ratio {e2e / fiber:.3f} (want >= 0.70)")


def test_mixed_architecture(mixed_sweep):
    e2e = point(mixed_sweep, mode="mixed")["mean_sum_end_to_end_bps"]
    fiber = point(mixed_sweep, mode="fiber")["mean_sum_end_to_end_bps"]
    ok = e2e >= 0.85 * fiber
    report("mixed 80 MHz", ok,
           f"end-to-end {e2e / 1e6:.1f} Mbps, fiber {fiber / 1e6:.1f} Mbps, "
           f"ratio {e2e / fiber:.3f} (want >= 0.85)")


def _grid_oracle(beta, beta_hat, rho, n=50, rounds=4):
    """Refined grid search over per-AP power shares x = p * beta_hat."""
    lo = np.zeros((2, 2))
    hi = np.ones((2, 2))
    best = None
    for _ in range(rounds):
        axes = [np.linspace(lo[m, k], hi[m, k], n)
                for m in range(2) for k in range(2)]
        mesh = np.meshgrid(*axes, indexing="ij")
        x = np.stack([g.ravel() for g in mesh])  # order (0,0),(0,1),(1,0),(1,1)
        ok = (x[0] + x[1] <= 1.0) & (x[2] + x[3] <= 1.0)
        x = x[:, ok]
        p = x / beta_hat.reshape(4, 1)
        sig = np.sqrt(p) * beta_hat.reshape(4, 1)
        s = np.stack([sig[0] + sig[2], sig[1] + sig[3]])
        load = np.stack([x[0] + x[1], x[2] + x[3]])
        interference = beta.T @ load
        sinr = rho * s ** 2 / (1.0 + rho * interference)
        val = sinr.min(axis=0)
        i = int(np.argmax(val))
        best = val[i]
        center = x[:, i].reshape(2, 2)
        span = (hi - lo) / n * 3
        lo = np.clip(center - span, 0, 1)
        hi = np.clip(center + span, 0, 1)
    return best


def test_maxmin_oracle_equivalence():
    rng = np.random.default_rng(7)
    worst_gamma = 0.0
    worst_eq = 0.0
    for _ in range(50):
        beta = 10 ** rng.uniform(-9, -7, size=(2, 2))
        rho = 10 ** rng.uniform(8, 10)
        stats = AccessStats(beta=beta, beta_hat=mmse_variance(beta, rho, 10))
        res = maxmin_power_bisection(full_grouping(2, 2), stats, rho)
        oracle = _grid_oracle(beta, stats.beta_hat, rho)
        worst_gamma = max(worst_gamma,
                          abs(res.gamma_star - oracle) / oracle)
        worst_eq = max(worst_eq,
                       np.max(np.abs(res.sinrs / res.gamma_star - 1.0)))
    ok = worst_gamma <= 0.02 and worst_eq <= 1e-3
    report("max-min grid oracle (50x 2x2)", ok,
           f"worst gamma* error {worst_gamma:.2e} (want <= 2e-2), "
           f"worst equal-SINR deviation {worst_eq:.2e} (want <= 1e-3)")


def test_beamforming_oracle():
    cfg = SystemConfig(num_aps=20, num_ues=4, cpu_antennas=8, phase_bits=2,
                       pilot_length=4)
    channels = build_fronthaul_channels(generate_placement(cfg, 3), cfg)
    codebook = make_codebook(8, 2)
    rng = np.random.default_rng(0)
    below = 0
    worst = 1.0
    for _ in range(200):
        group = rng.choice(20, size=rng.integers(1, 5), replace=False)
        exact = multicast_beam_exhaustive(group, channels, codebook, 1e10)
        heur = multicast_beam_heuristic(group, channels, codebook, 1e10)
        assert heur.group_rate <= exact.group_rate + 1e-9
        ratio = heur.group_rate / exact.group_rate
        worst = min(worst, ratio)
        if ratio < 0.9:
            below += 1

    cfg2 = SystemConfig(num_aps=20, num_ues=4, cpu_antennas=2, phase_bits=1,
                        pilot_length=4)
    ch2 = build_fronthaul_channels(generate_placement(cfg2, 5), cfg2)
    cb2 = make_codebook(2, 1)
    exact_single = all(
        abs(multicast_beam_heuristic([m], ch2, cb2, 1e9).group_rate
            - multicast_beam_exhaustive([m], ch2, cb2, 1e9).group_rate) < 1e-12
        for m in range(20))

    ok = below <= 10 and exact_single
    report("beamforming oracle (200 trials, N=8 q=2)", ok,
           f"{below}/200 below 0.9x exhaustive (want <= 10), worst ratio "
           f"{worst:.3f}; single-AP q=1 N=2 exact: {exact_single}")


def test_tdma_closed_forms():
    rng = np.random.default_rng(100)
    worst_hm = 0.0
    for _ in range(1000):
        rates = 10 ** rng.uniform(-1, 2, size=rng.integers(1, 16))
        sched = tdma_equal_rate(rates)
        hm = len(rates) / np.sum(1.0 / rates)
        worst_hm = max(worst_hm,
                       abs((sched.t * rates).sum() - hm) / hm)

    match_ok = True
    kkt_ok = True
    for _ in range(200):
        k = rng.integers(2, 10)
        rates = 10 ** rng.uniform(-1, 1.5, size=k)
        free = tdma_equal_rate(rates)
        # caps strictly above the cap-free schedule never bind
        loose = tdma_capped(rates, free.t * 1.5 + 0.1)
        match_ok &= bool(np.allclose(loose.t, free.t, rtol=1e-9, atol=1e-12))
        caps = rng.uniform(0.0, 0.5, size=k)
        sched = tdma_capped(rates, caps)
        capped = sched.t >= caps - 1e-9
        if not np.all(capped):
            kkt_ok &= bool(np.allclose(sched.t[~capped] * rates[~capped],
                                       sched.eta, rtol=1e-6))
        kkt_ok &= bool(np.all(sched.t <= caps + 1e-12))

    ok = worst_hm <= 1e-9 and match_ok and kkt_ok
    report("tdma closed forms", ok,
           f"harmonic-mean identity worst error {worst_hm:.1e} (want <= 1e-9), "
           f"cap-free match: {match_ok}, KKT to 1e-6: {kkt_ok}")


def _adjacent_violations(values, direction):
    diffs = np.diff(values) * direction
    return int(np.sum(diffs < 0))


def test_trends_in_group_size(trend_g_sweep):
    pts = sorted(trend_g_sweep.points, key=lambda p: p["G"])
    access = [p["mean_sum_access_bps"] for p in pts]
    fronthaul = [p["mean_sum_fronthaul_bps"] for p in pts]
    v_up = _adjacent_violations(access, +1)
    v_down = _adjacent_violations(fronthaul, -1)
    ok = v_up <= 2 and v_down <= 2
    report("G trends (access up, fronthaul down)", ok,
           f"access sums {[round(a / 1e6, 1) for a in access]} Mbps "
           f"({v_up} violations), fronthaul sums "
           f"{[round(f / 1e6, 1) for f in fronthaul]} Mbps "
           f"({v_down} violations); want <= 2 each")


def test_trend_in_ap_count(trend_m_sweep):
    pts = sorted(trend_m_sweep.points, key=lambda p: p["M"])
    sums = [p["mean_sum_end_to_end_bps"] for p in pts]
    ok = all(b >= a for a, b in zip(sums, sums[1:]))
    report("M trend (end-to-end up with AP count)", ok,
           f"sum rates over M=25/50/100: "
           f"{[round(s / 1e6, 1) for s in sums]} Mbps (want nondecreasing)")


def test_determinism_across_workers(tmp_path):
    cfg = SystemConfig(num_aps=9, num_ues=3, cpu_antennas=8, phase_bits=2,
                       pilot_length=3)
    a = sweep_and_emit(cfg, tmp_path / "a", g_values=[2, 3], realizations=2,
                       workers=1)
    b = sweep_and_emit(cfg, tmp_path / "b", g_values=[2, 3], realizations=2,
                       workers=3)
    ha = hashlib.sha256(a.csv_path.read_bytes()).hexdigest()
    hb = hashlib.sha256(b.csv_path.read_bytes()).hexdigest()
    ok = ha == hb
    report("determinism across worker counts", ok,
           f"sha256 {ha[:12]} vs {hb[:12]} (want identical)")
