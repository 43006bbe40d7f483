"""Sensing a zero-temperature quantum reservoir with N two-level probes.

The package solves the exact single-excitation dynamics of each probe qubit,
locates the probe-reservoir bound state, and evaluates the quantum Fisher
information about the reservoir's spectral parameters for product and GHZ
probe states.
"""
from .dynamics import (
    AmplitudeTrajectory,
    RateSeries,
    TimeGrid,
    amplitude_sensitivity,
    decoherence_rates,
    markovian_amplitude,
    markovian_rates,
    solve_amplitude,
)
from .errors import (
    BracketError,
    ConfigurationError,
    DivergenceError,
    DomainError,
    InvalidStateError,
    QuadratureError,
    RangeError,
    ReservoirError,
    UnsupportedOperationError,
)
from .qfi import (
    QfiSeries,
    TwoLevelBlock,
    asymptote_ghz,
    asymptote_uncorrelated,
    bloch_vector,
    ghz_block,
    ghz_block_derivative,
    qfi_block_sld,
    qfi_ghz,
    qfi_ghz_diagonal,
    qfi_series,
    qfi_uncorrelated,
)
from .spectral import (
    EstimandSelector,
    SpectralDensity,
    bound_state_exists,
    bound_state_threshold,
    evaluate,
    level_shift,
    memory_kernel,
)
from .spectrum import (
    BoundState,
    bound_state_sensitivity,
    continuum_amplitude,
    discretized_spectrum,
    find_bound_state,
    locate_threshold,
    reconstruct_amplitude,
)

__version__ = "0.1.0"
