"""User-centric AP group selection and group-size iteration."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scenario import ClusterLayout


@dataclass(frozen=True)
class Grouping:
    """Per-user serving AP sets and their inverse map."""

    groups: list        # K int arrays (ascending AP indices)
    served_users: list  # M int arrays: users served by each AP

    @property
    def num_users(self) -> int:
        return len(self.groups)


@dataclass(frozen=True)
class ClusterGrouping:
    """Cluster-level selection plus the derived fronthaul/access AP sets."""

    cluster_groups: list   # K int arrays of cluster indices
    fronthaul_groups: list  # K int arrays: leader APs of the chosen clusters
    access_groups: list    # K int arrays: union of the chosen clusters


def _inverse_map(groups, num_aps: int):
    served = [[] for _ in range(num_aps)]
    for k, members in enumerate(groups):
        for m in members:
            served[m].append(k)
    return [np.array(users, dtype=int) for users in served]


def _top_g_indices(gains: np.ndarray, g: int) -> np.ndarray:
    # stable sort on -gains keeps lower indices first on ties
    order = np.argsort(-gains, kind="stable")
    return np.sort(order[:g])


def top_g_groups(beta: np.ndarray, g: int) -> Grouping:
    """Serve each user by its G strongest APs (ties to the lower AP index)."""
    num_aps, num_ues = beta.shape
    if not 1 <= g <= num_aps:
        raise ValueError(f"group size {g} outside [1, {num_aps}]")
    groups = [_top_g_indices(beta[:, k], g) for k in range(num_ues)]
    return Grouping(groups=groups, served_users=_inverse_map(groups, num_aps))


def full_grouping(num_aps: int, num_ues: int) -> Grouping:
    all_aps = np.arange(num_aps)
    groups = [all_aps.copy() for _ in range(num_ues)]
    return Grouping(groups=groups, served_users=_inverse_map(groups, num_aps))


def cluster_top_g(beta: np.ndarray, layout: ClusterLayout, g: int) -> ClusterGrouping:
    """Pick the G clusters with the largest summed gains per user."""
    num_clusters = layout.num_clusters
    if not 1 <= g <= num_clusters:
        raise ValueError(f"cluster group size {g} outside [1, {num_clusters}]")
    num_ues = beta.shape[1]
    cluster_gain = np.stack([beta[members].sum(axis=0) for members in layout.clusters])

    cluster_groups, fronthaul_groups, access_groups = [], [], []
    for k in range(num_ues):
        chosen = _top_g_indices(cluster_gain[:, k], g)
        cluster_groups.append(chosen)
        fronthaul_groups.append(np.sort(layout.leaders[chosen]))
        access_groups.append(np.sort(np.concatenate(
            [layout.clusters[l] for l in chosen])))
    return ClusterGrouping(cluster_groups=cluster_groups,
                           fronthaul_groups=fronthaul_groups,
                           access_groups=access_groups)


def access_grouping(cluster_grouping: ClusterGrouping, num_aps: int) -> Grouping:
    """Grouping view of the cluster selection for the access-channel solver."""
    groups = [g.copy() for g in cluster_grouping.access_groups]
    return Grouping(groups=groups, served_users=_inverse_map(groups, num_aps))


def optimize_group_size(evaluate, g_init: int, g_bounds: tuple[int, int]):
    """Iterate the group size by comparing sum fronthaul and access rates.

    `evaluate(g)` returns (sum_access_rate, sum_fronthaul_rate).  The size is
    increased while the fronthaul sum dominates and decreased otherwise; the
    walk stops on revisiting an evaluated size (or after 2*(hi-lo+1) steps)
    and returns the visited size maximizing min(sum_access, sum_fronthaul).
    """
    lo, hi = g_bounds
    if lo < 1 or hi < lo:
        raise ValueError(f"invalid group size bounds {g_bounds}")
    g = int(np.clip(g_init, lo, hi))
    history = {}
    order = []
    for _ in range(2 * (hi - lo + 1)):
        if g in history:
            break
        access_sum, fronthaul_sum = evaluate(g)
        history[g] = (access_sum, fronthaul_sum)
        order.append(g)
        step = 1 if fronthaul_sum >= access_sum else -1
        g = int(np.clip(g + step, lo, hi))
    best = max(order, key=lambda gv: (min(history[gv]), -gv))
    records = [{"g": gv, "sum_access": history[gv][0],
                "sum_fronthaul": history[gv][1]} for gv in order]
    return best, records
