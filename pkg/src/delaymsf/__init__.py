"""Delay master stability analysis of inertial oscillator networks."""

from .blocks import (
    BlockCoefficients,
    DelayType,
    ModelJacobians,
    block_coefficients,
    jacobians_dsgc,
    jacobians_inverter,
    make_model,
    transversal_set,
)
from .estimator import DelayStabilityAnalyzer
from .network import Network, NetworkError, build_star, build_watts_strogatz, read_network, write_network
from .roots import decisive_root_phase, decisive_roots_frequency
from .spectral import eigen_symmetric
from .stability import (
    AnalysisError,
    assess,
    critical_delay,
    dmsf_dsgc,
    dmsf_inverter,
    linearize,
    ws_study,
)
from .steady_state import effective_laplacian, solve_fixed_point

__version__ = "0.1.0"
