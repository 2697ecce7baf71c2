"""Path-entangled photon pairs from a resonator with coupled counter-propagating modes.

Modules
-------
model         device, drive and material parameters, device files
pump          steady-state intracavity pump fields and transmission
state         closed-system biphoton state and its evolution
correlations  closed-form pair correlations for the four path configurations
spectral      frequency-domain oracle for the correlations
detection     jitter, binning and Poisson counting
bell          delay-time CHSH analysis
fitting       doublet transmission fits
runner        scenario runner behind the command line
"""

__version__ = "0.1.0"

from .model import (  # noqa: E402
    DeviceParams,
    MaterialParams,
    ModeParams,
    NumericalError,
    ParameterError,
    PumpDrive,
    ResolutionError,
    compute_g,
    load_device,
    paper_device,
    paper_drive,
    power_to_flux,
    rate_from_quality,
)
from .pump import PumpSteadyState, phase_sweep, steady_state, transmission  # noqa: E402
from .correlations import PathConfig, correlation_trace, pair_correlation  # noqa: E402

__all__ = [
    "DeviceParams",
    "MaterialParams",
    "ModeParams",
    "NumericalError",
    "ParameterError",
    "PathConfig",
    "PumpDrive",
    "PumpSteadyState",
    "ResolutionError",
    "compute_g",
    "correlation_trace",
    "load_device",
    "pair_correlation",
    "paper_device",
    "paper_drive",
    "phase_sweep",
    "power_to_flux",
    "rate_from_quality",
    "steady_state",
    "transmission",
]
