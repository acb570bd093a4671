"""Quantized analog multicast beamforming for the wireless fronthaul.

Beams live on a phase-shifter codebook: every entry has magnitude 1/sqrt(N)
and a phase drawn from a 2^q-point uniform grid over [0, 2*pi).  The group
objective is the worst per-AP rate, which is monotone in the worst
beamforming gain min_m |h_m^H f|^2, so searches compare gains directly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import FronthaulChannelSet, steering_vector
from .errors import BeamEnumerationError

ENUMERATION_CAP = 2 ** 24
MAX_ASCENT_PASSES = 50


@dataclass(frozen=True)
class PhaseCodebook:
    num_antennas: int
    phase_bits: int
    phase_set: np.ndarray  # (2^q,) radians, uniform over [0, 2*pi)


def make_codebook(num_antennas: int, phase_bits: int) -> PhaseCodebook:
    levels = 2 ** phase_bits
    phases = 2.0 * np.pi * np.arange(levels) / levels
    return PhaseCodebook(num_antennas=num_antennas, phase_bits=phase_bits,
                         phase_set=phases)


@dataclass(frozen=True)
class GroupBeamSolution:
    beam: np.ndarray          # (N,) complex, entries exp(j*phi)/sqrt(N)
    phase_indices: np.ndarray  # (N,) ints into the codebook phase set
    per_ap_rates: np.ndarray  # (|group|,) bits/s/Hz, group member order
    group_rate: float         # min of per_ap_rates


def ap_fronthaul_rate(h: np.ndarray, f: np.ndarray, rho_fh: float) -> float:
    """Achievable CPU-to-AP rate log2(1 + rho * |h^H f|^2)."""
    return float(np.log2(1.0 + rho_fh * np.abs(np.vdot(h, f)) ** 2))


def beam_from_indices(indices: np.ndarray, codebook: PhaseCodebook) -> np.ndarray:
    return np.exp(1j * codebook.phase_set[indices]) / np.sqrt(codebook.num_antennas)


def _solution(indices, channels_h, codebook, rho_fh) -> GroupBeamSolution:
    beam = beam_from_indices(indices, codebook)
    gains = np.abs(channels_h.conj() @ beam) ** 2
    rates = np.log2(1.0 + rho_fh * gains)
    return GroupBeamSolution(beam=beam, phase_indices=np.asarray(indices),
                             per_ap_rates=rates, group_rate=float(rates.min()))


def multicast_beam_exhaustive(group, channels: FronthaulChannelSet,
                              codebook: PhaseCodebook, rho_fh: float,
                              cap: int = ENUMERATION_CAP) -> GroupBeamSolution:
    """Globally optimal beam over the full codebook (small N*q only).

    Ties go to the lexicographically smallest phase-index tuple.
    """
    group = np.asarray(group, dtype=int)
    if group.size == 0:
        raise ValueError("group must be nonempty")
    n, levels = codebook.num_antennas, len(codebook.phase_set)
    total = levels ** n
    if total > cap:
        raise BeamEnumerationError(
            f"codebook size {levels}**{n} exceeds cap {cap}; "
            "use multicast_beam_heuristic")

    h_conj = channels.vectors[group].conj() / np.sqrt(n)
    place = levels ** (n - 1 - np.arange(n))  # antenna 0 most significant
    phasors = np.exp(1j * codebook.phase_set)

    best_gain = -1.0
    best_id = 0
    chunk = 1 << 16
    for start in range(0, total, chunk):
        ids = np.arange(start, min(start + chunk, total))
        digits = (ids[:, None] // place[None, :]) % levels
        beams = phasors[digits]  # (chunk, N), unscaled
        gains = np.abs(h_conj @ beams.T) ** 2  # (|group|, chunk)
        mins = gains.min(axis=0)
        i = int(np.argmax(mins))
        if mins[i] > best_gain:
            best_gain = float(mins[i])
            best_id = start + i
    indices = (best_id // place) % levels
    return _solution(indices, channels.vectors[group], codebook, rho_fh)


def _quantize_phases(angles: np.ndarray, phase_set: np.ndarray) -> np.ndarray:
    """Nearest codebook phase per angle (circular distance, ties to lower index)."""
    diff = np.angle(np.exp(1j * (angles[:, None] - phase_set[None, :])))
    return np.argmin(np.abs(diff), axis=1)


def _coordinate_ascent(indices, h_conj, codebook):
    """Cyclic per-antenna phase updates maximizing the group min gain."""
    n = codebook.num_antennas
    phasors = np.exp(1j * codebook.phase_set)
    indices = np.array(indices, dtype=int)
    inner = h_conj @ phasors[indices]  # (|group|,)
    best = float(np.min(np.abs(inner) ** 2))
    for _ in range(MAX_ASCENT_PASSES):
        improved = False
        for ant in range(n):
            col = h_conj[:, ant]
            base = inner - col * phasors[indices[ant]]
            cand = base[:, None] + col[:, None] * phasors[None, :]
            mins = (np.abs(cand) ** 2).min(axis=0)
            j = int(np.argmax(mins))
            if mins[j] > best:
                best = float(mins[j])
                indices[ant] = j
                inner = base + col * phasors[j]
                improved = True
        if not improved:
            break
    return indices, best


def _reweighted_alignment_starts(vectors, codebook, rounds=60, stride=6):
    """Candidate phase-index vectors from reweighted phase alignment.

    Alternates between (a) quantizing the phase profile of a weighted sum of
    the member channels, with each member rotated so its inner product with
    the current beam is real-positive, and (b) shifting weight toward the
    members with the lowest normalized gain.  Emits every stride-th iterate;
    the downstream min-gain ascent picks whichever start polishes best.
    """
    n = codebook.num_antennas
    rows = vectors / np.linalg.norm(vectors, axis=1, keepdims=True)
    w = np.ones(rows.shape[0])
    agg = rows.sum(axis=0)
    starts = []
    for it in range(rounds):
        indices = _quantize_phases(np.angle(agg), codebook.phase_set)
        if it % stride == 0:
            starts.append(indices)
        f = np.exp(1j * codebook.phase_set[indices]) / np.sqrt(n)
        inner = rows.conj() @ f
        gains = np.abs(inner) ** 2
        w = w * np.sqrt(gains.mean() / np.maximum(gains, 1e-12))
        w = w / w.sum()
        agg = (w[:, None] * rows * np.exp(1j * np.angle(inner))[:, None]).sum(axis=0)
    return starts


def multicast_beam_heuristic(group, channels: FronthaulChannelSet,
                             codebook: PhaseCodebook, rho_fh: float) -> GroupBeamSolution:
    """Deterministic multi-start coordinate-ascent multicast beam search.

    Starting beams: the quantized conjugate of each member channel, the
    quantized conjugate of the gain-weighted mean steering vector, and a
    sequence of reweighted phase-alignment iterates that trade peak gain for
    worst-member gain.  Each start is polished with cyclic per-antenna
    min-gain ascent and the best run wins, so the result never falls below
    any starting objective.
    """
    group = np.asarray(group, dtype=int)
    if group.size == 0:
        raise ValueError("group must be nonempty")
    n = codebook.num_antennas
    vectors = channels.vectors[group]
    h_conj = vectors.conj() / np.sqrt(n)

    # per-member conjugate starts; for large groups an evenly spaced subset
    # keeps the start count (and runtime) bounded while the alignment
    # iterates still see every member
    member_cap = 12
    if group.size <= member_cap:
        picks = np.arange(group.size)
    else:
        picks = np.unique(np.linspace(0, group.size - 1, member_cap).astype(int))
    starts = [_quantize_phases(np.angle(vectors[i]), codebook.phase_set)
              for i in picks]
    mean_steer = (channels.betas[group][:, None]
                  * steering_vector(channels.angles[group], n)).sum(axis=0)
    starts.append(_quantize_phases(np.angle(mean_steer), codebook.phase_set))
    starts.extend(_reweighted_alignment_starts(vectors, codebook))

    best_indices, best_gain = None, -1.0
    for init in starts:
        indices, gain = _coordinate_ascent(init, h_conj, codebook)
        if gain > best_gain:
            best_indices, best_gain = indices, gain
    return _solution(best_indices, channels.vectors[group], codebook, rho_fh)


def beam_gain_map(f: np.ndarray, grid_points: np.ndarray,
                  cpu_position: np.ndarray) -> np.ndarray:
    """Array gain N * |a(theta)^H f|^2 toward each 2-D grid point."""
    n = f.shape[0]
    delta = np.asarray(grid_points) - np.asarray(cpu_position)
    thetas = np.arctan2(delta[:, 1], delta[:, 0])
    a = steering_vector(thetas, n)  # (P, N)
    return n * np.abs(a.conj() @ f) ** 2
