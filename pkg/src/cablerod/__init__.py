"""Actuation-space energy models for planar cable-driven continuum robots."""
__version__ = "0.1.0"

from ._backend import BACKEND
from .core import (
    DEFAULT_QUADRATURE,
    GAUSS_QUADRATURE,
    ActuationState,
    BackboneShape,
    Mode,
    QuadratureConfig,
    RigidityProfile,
    RobotParams,
    SpacingProfile,
    beta,
    cubic_spacing_params,
    integrate,
    shape_from_theta,
    baseline_params,
    tapered_params,
)
from .discrete import (
    DiscreteOptConfig,
    DiscreteRobotSpec,
    DiscreteSolution,
    PolynomialShape,
    cable_chords,
    convergence_sweep,
    discrete_energy,
    solve_discrete,
)
from .errors import *  # noqa: F401,F403
from .forward import (
    Case,
    ExtensibleCoefficients,
    forward,
    forward_constant,
    forward_extensible,
    forward_nonuniform,
    forward_routing,
    tip_position,
)
from .inverse import (
    InverseConfig,
    InverseLog,
    TrajectorySpec,
    extensible_jacobian,
    inverse_rate_constant,
    inverse_rate_extensible,
    inverse_rate_nonuniform,
    inverse_rate_routing,
    oscillating_trajectory,
    shrinking_circle_trajectory,
    track,
)
from .loading import AdomianSeries, GalerkinConfig, LoadedBVP, solve_adomian, solve_galerkin, solve_shooting
from .oracle import oracle_minimize
