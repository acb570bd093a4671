"""Cell-free massive MIMO with a wireless mmWave fronthaul.

Simulation and optimization chain: placement and channel statistics, quantized
multicast fronthaul beamforming, max-min access power control via an in-repo
conic feasibility solver, TDMA fronthaul scheduling, user-centric grouping and
end-to-end Monte Carlo sweeps.
"""

from .access_power import (MaxMinResult, PowerAllocation, access_rates,
                           maxmin_power_bisection, socp_feasible, user_sinr)
from .beamforming import (GroupBeamSolution, PhaseCodebook, beam_gain_map,
                          make_codebook, multicast_beam_exhaustive,
                          multicast_beam_heuristic)
from .channel import (AccessStats, FronthaulChannelSet, access_large_scale,
                      build_access_stats, build_fronthaul_channels,
                      mmse_variance, path_loss_db, steering_vector)
from .errors import (BeamEnumerationError, ConfigurationError,
                     DegenerateGroupError, DegenerateUserError)
from .fronthaul_sched import TdmaSchedule, tdma_capped, tdma_equal_rate
from .grouping import (ClusterGrouping, Grouping, access_grouping,
                       cluster_top_g, full_grouping, optimize_group_size,
                       top_g_groups)
from .pipeline import (RealizationContext, RealizationResult, SweepResult,
                       end_to_end_rates, run_realization, sweep_and_emit)
from .scenario import (ClusterLayout, NormalizedPowers, Placement,
                       SystemConfig, derive_seed, generate_grid_clusters,
                       generate_placement, load_config, noise_power_w,
                       normalize_powers)

__all__ = [name for name in dir() if not name.startswith("_")]

__version__ = "0.1.0"
