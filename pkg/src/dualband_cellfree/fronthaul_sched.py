"""TDMA time-fraction allocation across the per-user fronthaul groups."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGroupError


@dataclass(frozen=True)
class TdmaSchedule:
    t: np.ndarray  # (K,) nonnegative time fractions, sum <= 1
    eta: float     # common time-scaled fronthaul rate (water level), bits/s/Hz


def tdma_equal_rate(group_rates: np.ndarray) -> TdmaSchedule:
    """Equal time-scaled rates: t_k proportional to 1/R_k, summing to 1.

    The resulting sum fronthaul rate K*eta equals the harmonic mean of the
    group rates.
    """
    rates = np.asarray(group_rates, dtype=float)
    if np.any(rates <= 0):
        raise DegenerateGroupError("all group rates must be positive")
    eta = 1.0 / np.sum(1.0 / rates)
    return TdmaSchedule(t=eta / rates, eta=float(eta))


def tdma_capped(group_rates: np.ndarray, caps: np.ndarray) -> TdmaSchedule:
    """Water-filling on the common rate eta with per-user time caps.

    Finds the largest eta with sum_k min(cap_k, eta / R_k) <= 1 by bisection,
    then refines eta exactly on the active linear piece so that uncapped
    users satisfy t_k * R_k = eta and capped users sit at t_k = cap_k.
    """
    rates = np.asarray(group_rates, dtype=float)
    caps = np.asarray(caps, dtype=float)
    if np.any(rates <= 0):
        raise DegenerateGroupError("all group rates must be positive")
    if np.any(caps < 0):
        raise ValueError("caps must be nonnegative")

    def used(eta):
        return np.sum(np.minimum(caps, eta / rates))

    if used(np.max(caps * rates, initial=0.0)) <= 1.0 + 1e-15:
        # every cap binds before the time budget does
        eta = float(np.max(caps * rates, initial=0.0))
        return TdmaSchedule(t=caps.copy(), eta=eta)

    lo, hi = 0.0, float(np.max(caps * rates))
    while hi - lo > 1e-9 * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if used(mid) <= 1.0:
            lo = mid
        else:
            hi = mid
    # exact solve on the piece identified by the bisection point
    capped = caps * rates <= lo
    slack = 1.0 - caps[capped].sum()
    inv_sum = np.sum(1.0 / rates[~capped])
    eta = slack / inv_sum
    t = np.minimum(caps, eta / rates)
    return TdmaSchedule(t=t, eta=float(eta))
