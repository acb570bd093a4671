"""Max-min SINR power allocation for the cell-free access channel."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import AccessStats
from .conic import FeasibilityOutcome, MaxMinSinrProblem
from .grouping import Grouping

DEFAULT_TOL_GAMMA = 1e-4


@dataclass(frozen=True)
class PowerAllocation:
    """Nonnegative power coefficients p[m, k], zero outside the user groups."""

    p: np.ndarray  # (M, K)


@dataclass
class MaxMinResult:
    gamma_star: float
    allocation: PowerAllocation
    sinrs: np.ndarray
    meta: dict = field(default_factory=dict)


def user_sinr(p: np.ndarray | PowerAllocation, stats: AccessStats,
              rho_ac: float) -> np.ndarray:
    """Per-user SINR of the conjugate-beamforming lower bound."""
    if isinstance(p, PowerAllocation):
        p = p.p
    signal = (np.sqrt(p) * stats.beta_hat).sum(axis=0)
    load = (p * stats.beta_hat).sum(axis=1)  # per-AP transmitted power share
    interference = stats.beta.T @ load
    return rho_ac * signal ** 2 / (1.0 + rho_ac * interference)


def access_rates(gamma_or_p, stats: AccessStats | None = None,
                 rho_ac: float | None = None) -> np.ndarray:
    """Per-user access rates log2(1 + SINR), from a target or an allocation."""
    if isinstance(gamma_or_p, (PowerAllocation, np.ndarray)):
        sinrs = user_sinr(gamma_or_p, stats, rho_ac)
    else:
        sinrs = np.full(stats.beta.shape[1], float(gamma_or_p))
    return np.log2(1.0 + sinrs)


def _allocation_from_sigma(problem: MaxMinSinrProblem, stats: AccessStats,
                           sigma: np.ndarray) -> PowerAllocation:
    p = np.zeros_like(stats.beta)
    bh = stats.beta_hat[problem.var_ap, problem.var_user]
    p[problem.var_ap, problem.var_user] = sigma ** 2 / bh
    return PowerAllocation(p=p)


def socp_feasible(gamma: float, grouping: Grouping, stats: AccessStats,
                  rho_ac: float, tol: float = 1e-7):
    """Decide feasibility of a common SINR target under the group constraints.

    Returns a FeasibilityOutcome; outcome.allocation is a PowerAllocation
    when feasible.  An indeterminate solver status is reported as infeasible
    (outcome.feasible False) with status preserved for the caller's logs.
    """
    problem = MaxMinSinrProblem(grouping, stats, rho_ac)
    outcome = problem.solve(gamma, tol=tol, warm_start=False)
    allocation = None
    if outcome.feasible:
        allocation = _allocation_from_sigma(problem, stats, outcome.sigma)
    return FeasibilityResult(outcome, allocation)


@dataclass
class FeasibilityResult:
    outcome: FeasibilityOutcome
    allocation: PowerAllocation | None

    @property
    def feasible(self) -> bool:
        return self.outcome.feasible

    @property
    def residual(self) -> float:
        return self.outcome.residual


def _equalize_sinrs(problem: MaxMinSinrProblem, sigma: np.ndarray,
                    gamma: float, iters: int = 400) -> np.ndarray:
    """Fixed-point per-user power scaling driving every SINR to gamma.

    Started from a point with all SINRs >= gamma the iteration is monotone
    decreasing in the user powers, so the per-AP constraints stay satisfied.
    """
    sigma = sigma.copy()
    for _ in range(iters):
        sinrs = problem.sinrs(sigma)
        ratio = np.sqrt(gamma / np.maximum(sinrs, 1e-300))
        sigma *= ratio[problem.var_user]
        if np.max(np.abs(sinrs / gamma - 1.0)) < 1e-10:
            break
    return sigma


def maxmin_power_bisection(grouping: Grouping, stats: AccessStats, rho_ac: float,
                           tol_gamma: float = DEFAULT_TOL_GAMMA,
                           hi_hint: float | None = None) -> MaxMinResult:
    """Bisection on the common SINR target over the conic feasibility check.

    The returned allocation is the last feasible point, rebalanced so every
    user sits at the common optimum (equal-SINR solution).
    """
    problem = MaxMinSinrProblem(grouping, stats, rho_ac)
    gamma_cap = problem.sinr_upper_bound()
    solves = []

    def feasible(gamma, max_iter=30000):
        out = problem.solve(gamma, max_iter=max_iter)
        solves.append((gamma, out.status, out.iterations))
        return out

    # any certified point lower-bounds gamma*: start from uniform power
    sigma0 = 0.9 / np.sqrt(problem.users_per_ap[problem.var_ap])
    lo = float(np.min(problem.sinrs(sigma0))) * (1.0 - 1e-12)
    lo_sigma = sigma0
    hi = gamma_cap
    if hi_hint is not None and lo < hi_hint < gamma_cap:
        # expand the hinted bracket until it is infeasible-side
        hi = hi_hint
        while True:
            out = feasible(hi)
            if not out.feasible:
                break
            lo, lo_sigma = out.min_sinr * (1.0 - 1e-12), out.sigma
            hi = min(4.0 * hi, gamma_cap)
            if hi == gamma_cap:
                break

    while hi - lo > tol_gamma * max(1.0, lo):
        if lo > 0 and hi > 8.0 * lo:
            mid = float(np.sqrt(lo * hi))
        else:
            mid = 0.5 * (lo + hi)
        # spend full effort only once the bracket is tight; a misclassified
        # wide-bracket probe just tightens the bracket conservatively
        wide = (hi - lo) > 0.05 * max(1.0, lo)
        out = feasible(mid, max_iter=4000 if wide else 30000)
        if out.feasible:
            lo, lo_sigma = max(mid, out.min_sinr * (1.0 - 1e-12)), out.sigma
        else:
            hi = mid

    if lo <= 0.0:
        sigma = lo_sigma
        gamma_star = 0.0
    else:
        sigma = _equalize_sinrs(problem, lo_sigma, lo)
        # balancing ignores the per-AP budgets; pull marginal overshoots
        # (certificate slack amplified near the optimum) back into the ball
        top = float(problem.ap_norms(sigma).max(initial=0.0))
        if top > 1.0:
            sigma = sigma / top
        gamma_star = float(np.min(problem.sinrs(sigma)))
    allocation = _allocation_from_sigma(problem, stats, sigma)
    sinrs = problem.sinrs(sigma)
    meta = {"solves": solves, "gamma_cap": gamma_cap,
            "indeterminate": sum(1 for _, s, _ in solves if s == "indeterminate")}
    return MaxMinResult(gamma_star=gamma_star, allocation=allocation,
                        sinrs=sinrs, meta=meta)
