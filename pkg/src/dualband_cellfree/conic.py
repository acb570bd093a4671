"""First-order conic feasibility solver for the max-min SINR subproblem.

For a SINR target gamma the per-user constraints, written in the amplitude
variables sigma_mk = sqrt(p_mk * beta_hat_mk) >= 0, read

    sum_m sqrt(rho*beta_hat_mk) sigma_mk
        >= sqrt(gamma) * || [ {sqrt(rho*beta_mk) sigma_mk'}_{m,k'} ; 1 ] ||_2

together with the per-AP power constraints ||sigma_{m,:}||_2 <= 1.  The
solver stacks these as z = A x + b with z constrained to a product of a
nonnegative orthant and second-order cones, and runs ADMM splitting:

    x   <- argmin ||A x + b - z + u||^2      (structured normal equations)
    z   <- project_cone(relax(A x + b) + u)
    u   <- u + relax(A x + b) - z

The normal-equation matrix A^T A is block diagonal over users, each block
diagonal plus rank one, so the x-update is O(n) via Sherman-Morrison.  A
candidate x is certified feasible directly from the SINR definition, which
keeps the accept decision independent of solver internals.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import AccessStats
from .errors import DegenerateUserError
from .grouping import Grouping


@dataclass
class FeasibilityOutcome:
    feasible: bool
    sigma: np.ndarray | None  # amplitude variables at the certified point
    residual: float
    status: str               # feasible | infeasible | indeterminate
    iterations: int
    min_sinr: float = 0.0     # certified worst-user SINR of sigma


class MaxMinSinrProblem:
    """Variable layout and solver state shared across SINR targets."""

    def __init__(self, grouping: Grouping, stats: AccessStats, rho_ac: float):
        num_aps, num_ues = stats.beta.shape
        self.num_aps = num_aps
        self.num_ues = num_ues
        self.rho = rho_ac

        var_ap, var_user = [], []
        for k, members in enumerate(grouping.groups):
            usable = [m for m in members if stats.beta_hat[m, k] > 0]
            if not usable:
                raise DegenerateUserError(
                    f"user {k} has no serving AP with a nonzero channel estimate")
            var_ap.extend(usable)
            var_user.extend([k] * len(usable))
        self.var_ap = np.asarray(var_ap, dtype=int)
        self.var_user = np.asarray(var_user, dtype=int)
        self.n_vars = len(var_ap)

        self.chat = np.sqrt(rho_ac * stats.beta_hat[self.var_ap, self.var_user])
        # Dmat[k, j]: interference coupling of variable j into user k
        self.Dmat = np.sqrt(rho_ac * stats.beta[self.var_ap, :]).T.copy()
        self.Dmat2 = self.Dmat ** 2
        self.users_per_ap = np.bincount(self.var_ap, minlength=num_aps)
        self._warm_sigma = None

    # -- direct evaluations in the physical variables ------------------------

    def sinrs(self, sigma: np.ndarray) -> np.ndarray:
        signal = np.bincount(self.var_user, self.chat * sigma, self.num_ues)
        interference = self.Dmat2 @ (sigma ** 2)
        return signal ** 2 / (1.0 + interference)

    def ap_norms(self, sigma: np.ndarray) -> np.ndarray:
        return np.sqrt(np.bincount(self.var_ap, sigma ** 2, self.num_aps))

    def _certify(self, sigma: np.ndarray, gamma: float) -> np.ndarray | None:
        """Clip to the feasible orthant/AP ball and accept if SINRs hold."""
        sigma = np.maximum(sigma, 0.0)
        norms = self.ap_norms(sigma)
        scale = 1.0 / np.maximum(norms, 1.0)
        sigma = sigma * scale[self.var_ap]
        if np.all(self.sinrs(sigma) >= gamma * (1.0 - 5e-6)):
            return sigma
        return None

    def sinr_upper_bound(self) -> float:
        """Interference-free full-power bound on the max-min SINR."""
        # chat already includes sqrt(rho): bound is (sum_m sqrt(rho beta_hat))^2
        best = np.bincount(self.var_user, self.chat, self.num_ues)
        return float(np.min(best ** 2))

    # -- ADMM feasibility ----------------------------------------------------

    def solve(self, gamma: float, tol: float = 1e-7, max_iter: int = 30000,
              warm_start: bool = True, check_every: int = 25,
              alpha: float = 1.7, stall_checks: int = 12) -> FeasibilityOutcome:
        if gamma < 0:
            raise ValueError("gamma must be nonnegative")
        if gamma == 0:
            sigma = np.zeros(self.n_vars)
            return FeasibilityOutcome(True, sigma, 0.0, "feasible", 0)

        n_v, num_ues = self.n_vars, self.num_ues
        user, ap = self.var_user, self.var_ap
        sqg = np.sqrt(gamma)

        # column equilibration: s_j^2 ~ squared column norm of A
        colsum = self.Dmat2.sum(axis=0)
        s = np.sqrt(2.0 + self.chat ** 2 + gamma * colsum)
        o_coef = 1.0 / s                      # orthant rows
        ax_coef = 1.0 / s                     # AP-ball rows
        cuse = self.chat / s                  # per-user signal row
        duse = sqg * self.Dmat / s[None, :]   # per-user norm rows
        # per-user block row scaling
        rn = np.maximum(1.0, np.sqrt(np.bincount(user, cuse ** 2, num_ues)))
        cuse = cuse / rn[user]
        duse = duse / rn[:, None]
        be = sqg / rn                         # constant entry of each user cone

        diag = o_coef ** 2 + ax_coef ** 2 + (duse ** 2).sum(axis=0)
        dinv = 1.0 / diag
        w = cuse * dinv
        denom = 1.0 + np.bincount(user, cuse * w, num_ues)

        def solve_normal(r):
            y = r * dinv
            corr = np.bincount(user, cuse * y, num_ues) / denom
            return y - corr[user] * w

        def apply_a(x):
            return (o_coef * x, ax_coef * x,
                    np.bincount(user, cuse * x, num_ues),
                    duse * x[None, :])

        def apply_at(y0, yax, yut, yuX):
            return (o_coef * y0 + ax_coef * yax + cuse * yut[user]
                    + np.einsum("kj,kj->j", duse, yuX))

        def project(z0, zat, zax, zut, zuX, zue):
            z0 = np.maximum(z0, 0.0)
            # AP second-order cones: (t=zat[m], x=zax over vars of AP m)
            nx = np.sqrt(np.bincount(ap, zax ** 2, self.num_aps))
            t = zat
            inside = nx <= t
            zero = nx <= -t
            mid = ~(inside | zero)
            coef = np.where(mid, 0.5 * (t + nx) / np.maximum(nx, 1e-300), 1.0)
            coef = np.where(zero, 0.0, coef)
            zax = zax * coef[ap]
            zat = np.where(mid, 0.5 * (t + nx), np.where(zero, 0.0, t))
            # user cones: (t=zut[k], x=[zuX row ; zue])
            nxu = np.sqrt((zuX ** 2).sum(axis=1) + zue ** 2)
            t = zut
            inside = nxu <= t
            zero = nxu <= -t
            mid = ~(inside | zero)
            coefu = np.where(mid, 0.5 * (t + nxu) / np.maximum(nxu, 1e-300), 1.0)
            coefu = np.where(zero, 0.0, coefu)
            zuX = zuX * coefu[:, None]
            zue = zue * coefu
            zut = np.where(mid, 0.5 * (t + nxu), np.where(zero, 0.0, t))
            return z0, zat, zax, zut, zuX, zue

        # initial point: spread power uniformly unless warm started
        if warm_start and self._warm_sigma is not None:
            sigma0 = self._warm_sigma
        else:
            sigma0 = 0.9 / np.sqrt(self.users_per_ap[ap])
        x = sigma0 * s

        b = (np.zeros(n_v), np.ones(self.num_aps), np.zeros(n_v),
             np.zeros(num_ues), np.zeros((num_ues, n_v)), be)
        ax_parts = apply_a(x)
        z = project(ax_parts[0] + b[0], b[1], ax_parts[1] + b[2],
                    ax_parts[2] + b[3], ax_parts[3] + b[4], b[5])
        u = tuple(np.zeros_like(p) for p in z)

        b_norm = 1.0 + np.sqrt(float(self.num_aps) + float((be ** 2).sum()))
        resid = np.inf
        best_margin = -np.inf
        stall = 0
        it = 0
        while it < max_iter:
            rhs = apply_at(z[0] - u[0] - b[0], z[2] - u[2] - b[2],
                           z[3] - u[3] - b[3], z[4] - u[4] - b[4])
            x = solve_normal(rhs)
            a0, aax, aut, auX = apply_a(x)
            full = (a0 + b[0], b[1], aax + b[2], aut + b[3], auX + b[4], b[5])
            relaxed = tuple(alpha * f + (1.0 - alpha) * zz
                            for f, zz in zip(full, z))
            z = project(*(r + uu for r, uu in zip(relaxed, u)))
            u = tuple(uu + r - zz for uu, r, zz in zip(u, relaxed, z))
            it += 1

            if it % check_every == 0 or it == max_iter:
                sigma = self._certify(x / s, gamma)
                if sigma is not None:
                    self._warm_sigma = sigma
                    res = self._primal_residual(full, z)
                    return FeasibilityOutcome(True, sigma, res, "feasible", it,
                                              float(np.min(self.sinrs(sigma))))
                resid_new = self._primal_residual(full, z) / b_norm
                margin = float(np.min(self.sinrs(np.maximum(x / s, 0.0)))) / gamma
                if (margin <= best_margin * (1.0 + 1e-7)
                        and resid_new >= resid * (1.0 - 1e-7)):
                    stall += 1
                else:
                    stall = 0
                best_margin = max(best_margin, margin)
                resid = min(resid, resid_new)
                if stall >= stall_checks and resid > 100 * tol:
                    return FeasibilityOutcome(False, None, resid, "infeasible", it)
        status = "indeterminate" if resid <= 100 * tol else "infeasible"
        return FeasibilityOutcome(False, None, resid, status, it)

    @staticmethod
    def _primal_residual(full, z) -> float:
        return float(np.sqrt(sum(np.sum((f - zz) ** 2)
                                 for f, zz in zip(full, z))))
