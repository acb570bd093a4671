"""Path loss, LOS fronthaul channels and access-channel statistics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scenario import Placement, SystemConfig


@dataclass(frozen=True)
class FronthaulChannelSet:
    """CPU-to-AP LOS channels: per-AP gain, azimuth and channel vector."""

    betas: np.ndarray    # (M,) linear large-scale gains
    angles: np.ndarray   # (M,) azimuths seen from the CPU broadside, rad
    vectors: np.ndarray  # (M, N) complex, ||vectors[m]||^2 = N * betas[m]


@dataclass(frozen=True)
class AccessStats:
    """Access-channel large-scale gains and MMSE estimate variances."""

    beta: np.ndarray      # (M, K)
    beta_hat: np.ndarray  # (M, K), 0 <= beta_hat < beta wherever beta > 0


def path_loss_db(distance_m, carrier_ghz):
    """UMi street-canyon LOS path loss: 32.4 + 20 log10 d + 21 log10 fc."""
    distance_m = np.asarray(distance_m, dtype=float)
    if np.any(distance_m <= 0) or carrier_ghz <= 0:
        raise ValueError("distance and carrier frequency must be positive")
    return 32.4 + 20.0 * np.log10(distance_m) + 21.0 * np.log10(carrier_ghz)


def linear_gain(distance_m, carrier_ghz):
    return 10.0 ** (-path_loss_db(distance_m, carrier_ghz) / 10.0)


def steering_vector(theta, num_antennas: int) -> np.ndarray:
    """Unit-norm half-wavelength ULA response, element n phase pi*n*sin(theta).

    Accepts a scalar or an array of angles; returns (..., N).
    """
    theta = np.asarray(theta, dtype=float)
    n = np.arange(num_antennas)
    phase = np.pi * np.multiply.outer(np.sin(theta), n)
    return np.exp(1j * phase) / np.sqrt(num_antennas)


def build_fronthaul_channels(placement: Placement, config: SystemConfig) -> FronthaulChannelSet:
    """LOS channel vectors h_m = sqrt(N * beta_m) * a(theta_m) toward each AP."""
    delta = placement.ap_positions - placement.cpu_position
    dist = np.maximum(np.linalg.norm(delta, axis=1), config.min_distance_m)
    betas = linear_gain(dist, config.fronthaul_carrier_ghz)
    # array axis along y, broadside along +x
    angles = np.arctan2(delta[:, 1], delta[:, 0])
    vectors = (np.sqrt(config.cpu_antennas * betas)[:, None]
               * steering_vector(angles, config.cpu_antennas))
    return FronthaulChannelSet(betas=betas, angles=angles, vectors=vectors)


def access_large_scale(placement: Placement, config: SystemConfig) -> np.ndarray:
    """M x K matrix of linear AP-to-UE gains at the access carrier."""
    diff = placement.ap_positions[:, None, :] - placement.ue_positions[None, :, :]
    dist = np.maximum(np.linalg.norm(diff, axis=2), config.min_distance_m)
    return linear_gain(dist, config.access_carrier_ghz)


def mmse_variance(beta, rho_t: float, pilot_length: int):
    """Variance of the MMSE channel estimate from orthogonal pilots.

    beta_hat = rho_t * L_p * beta^2 / (1 + rho_t * L_p * beta), elementwise.
    """
    beta = np.asarray(beta, dtype=float)
    scale = rho_t * pilot_length
    return scale * beta ** 2 / (1.0 + scale * beta)


def build_access_stats(placement: Placement, config: SystemConfig,
                       rho_t: float) -> AccessStats:
    beta = access_large_scale(placement, config)
    beta_hat = mmse_variance(beta, rho_t, config.pilot_length)
    return AccessStats(beta=beta, beta_hat=beta_hat)
