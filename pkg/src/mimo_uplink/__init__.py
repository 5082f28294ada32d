"""Training-based massive-MIMO uplink without receiver CSI.

Closed-form energy split, MRC/ZF rate bounds, degrees of freedom and power
scaling, each paired with a brute-force or Monte Carlo check.
"""

from .model import (
    DomainError,
    EnergySplit,
    EstimationVariances,
    RateReport,
    SystemParams,
    data_power,
    effective_snr,
    effective_snr_equal_power,
    estimation_variances,
    noise_variance_equiv,
    rate_mrc,
    rate_zf,
    validate_params,
)
from .split import SplitSolution, optimal_split_closed_form, optimal_split_grid
from .dof import DofResult, dof_total, k_star
from .power import PowerSolveResult, required_power_asymptotic, required_power_exact

__version__ = "0.1.0"
