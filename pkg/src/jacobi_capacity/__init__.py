"""Capacity of the soft-handoff cellular uplink through random Hermitian Jacobi matrices.

All rates are in nats per channel use; power offsets are in bits.
"""

from .channel import (ChannelRealization, TridiagonalHermitian, dense_gram, gram_tridiagonal,
                      load_realization, sample_channel, save_realization)
from .closedform import (DetRecursionParams, SnrCharacterization, expected_det_sequence,
                         exp_integral_e1, extreme_low_snr, narula_density, nonfading_extreme_snr,
                         rate_nonfading, rate_tdma_rayleigh, rate_wb_largeK, rate_wb_upper)
from .fading import (Empirical, FadingModel, MaxOrderStat, MomentSummary, NonFading,
                     NonFiniteMomentError, PhaseOnly, Rayleigh, ScaledRayleigh, check_hypotheses,
                     moments, parse_model, sample_gain)
from .logdet import (CapacityEstimate, PivotBreakdownError, Protocol, capacity_bounds_mc,
                     capacity_mc, hadamard_bound, logdet_ldl, logdet_recursion)
from .lyapunov import (lyapunov_estimate, lyapunov_upper_bound, recurrence_logx,
                       recurrence_logx_gains, thouless_capacity, transfer_matrices)
from .markov import (EChainConfig, OffsetBoundLadder, bound_ladder, e_step, e_step_unit,
                     high_snr_offset_tdma, offset_bounds, run_chain, sin_sq, stationary_offset)

__version__ = "0.1.0"
