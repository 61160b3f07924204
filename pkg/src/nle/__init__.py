"""Displacement-driven nonlocal elasticity toolkit.

Strain-gradient averaging lives in the kinematics: a two-sided weighted
integral of the displacement gradient replaces the pointwise gradient, the
stress law stays local, and the energy stays convex.  The package exposes
the kernel families and the averaging operator, closed-form dispersion of
the 1D solid, and static bending of Timoshenko beams and Mindlin plates on
that kinematics, plus a CSV-emitting command line front end.
"""

from .beam import (
    BeamResult,
    BeamSection,
    CantileverTipLoad,
    SimplySupportedUniformLoad,
    beam_sweep,
    solve_beam,
)
from .config import ConfigError, RunConfig, parse_config
from .dispersion import (
    Material1D,
    dispersion_exponential,
    dispersion_powerlaw,
    numerical_dispersion,
)
from .kernels import (
    ExponentialKernel,
    KernelError,
    LocalDelta,
    PowerLawKernel,
    exponential,
    local,
    make_kernel,
    power_law,
)
from .operator import HorizonSpec, boundary_limit_value, build_operator_matrix, nonlocal_derivative
from .plate import PlateResult, PlateSection, plate_sweep, solve_plate
from .results import ALPHA_FLOOR, KernelSpec, SweepResult

__version__ = "0.1.0"

__all__ = [
    "ALPHA_FLOOR",
    "BeamResult",
    "BeamSection",
    "CantileverTipLoad",
    "ConfigError",
    "ExponentialKernel",
    "HorizonSpec",
    "KernelError",
    "KernelSpec",
    "LocalDelta",
    "Material1D",
    "PlateResult",
    "PlateSection",
    "PowerLawKernel",
    "RunConfig",
    "SimplySupportedUniformLoad",
    "SweepResult",
    "__version__",
    "beam_sweep",
    "boundary_limit_value",
    "build_operator_matrix",
    "dispersion_exponential",
    "dispersion_powerlaw",
    "exponential",
    "local",
    "make_kernel",
    "nonlocal_derivative",
    "numerical_dispersion",
    "parse_config",
    "plate_sweep",
    "power_law",
    "solve_beam",
    "solve_plate",
]
