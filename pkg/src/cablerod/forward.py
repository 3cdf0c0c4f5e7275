"""Closed-form forward statics and kinematics.

Each structural case maps an actuation input to the tangent angle along the
backbone; positions follow by quadrature.  Sign convention: ``dl_i`` is the
length of cable ``i`` pulled in at the base, and positive ``dF = F1 - F2``
bends the rod toward positive ``theta``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .core import (
    DEFAULT_QUADRATURE,
    ActuationState,
    BackboneShape,
    Mode,
    QuadratureConfig,
    RobotParams,
    beta,
    integrate,
    shape_from_theta,
)
from .errors import ModeError, PhysicalValidityError, ProfileError

DEFAULT_SAMPLES = 201


class Case(str, enum.Enum):
    CONSTANT = "constant"
    ROUTING = "routing"
    NONUNIFORM = "nonuniform"
    EXTENSIBLE = "extensible"


def check_case(params: RobotParams, case: Case) -> None:
    """Raise :class:`ProfileError` if ``params`` does not fit the structural case."""
    case = Case(case)
    need_w = case in (Case.CONSTANT, Case.NONUNIFORM, Case.EXTENSIBLE)
    need_i = case in (Case.CONSTANT, Case.ROUTING, Case.EXTENSIBLE)
    if need_w and not params.spacing.is_constant:
        raise ProfileError(f"{case.value} case requires constant cable spacing")
    if need_i and not params.rigidity.is_constant:
        raise ProfileError(f"{case.value} case requires constant flexural rigidity")
    if case is Case.EXTENSIBLE and params.A is None:
        raise ProfileError("extensible case requires a cross-section area")


@dataclass(frozen=True)
class ExtensibleCoefficients:
    """Compliances ``B1 = W^2 L / (4 EI)`` and ``B2 = L / (EA)``, in m/N."""

    B1: float
    B2: float

    @classmethod
    def from_params(cls, params: RobotParams) -> "ExtensibleCoefficients":
        check_case(params, Case.EXTENSIBLE)
        W, EI = params.W0, params.EI0
        return cls(B1=W * W * params.L / (4.0 * EI), B2=params.L / params.EA)


class AngleField(NamedTuple):
    """Tangent angle, its arc-length derivative, and the (constant) axial strain."""

    theta: Callable[[np.ndarray], np.ndarray]
    dtheta: Callable[[np.ndarray], np.ndarray]
    u: float


def _const(value: float):
    return lambda s: np.full(np.shape(s), value)


def _require(act: ActuationState, *modes: Mode) -> None:
    if act.mode not in modes:
        allowed = ", ".join(m.value for m in modes)
        raise ModeError(f"actuation mode {act.mode.value!r} not accepted here (expected {allowed})")


def angle_field(params: RobotParams, case: Case, act: ActuationState) -> AngleField:
    """Closed-form tangent angle for the given case and actuation."""
    case = Case(case)
    check_case(params, case)
    L = params.L
    if case is Case.CONSTANT:
        _require(act, Mode.FORCE_DIFFERENTIAL, Mode.DISPLACEMENT_DIFFERENTIAL)
        W, EI = params.W0, params.EI0
        if act.is_force:
            k = W * act.difference / (2.0 * EI)
        else:
            k = 2.0 * act.difference / (W * L)
        return AngleField(lambda s: k * s, _const(k), 0.0)

    if case is Case.ROUTING:
        _require(act, Mode.FORCE_DIFFERENTIAL, Mode.DISPLACEMENT_DIFFERENTIAL)
        if act.is_force:
            scale = act.difference / (2.0 * params.EI0)
        else:
            scale = 2.0 * act.difference / params.spacing.square_integral(L)
        return AngleField(
            lambda s: scale * params.spacing.running_integral(s / L, L),
            lambda s: scale * params.W(s),
            0.0,
        )

    if case is Case.NONUNIFORM:
        _require(act, Mode.FORCE_DIFFERENTIAL, Mode.DISPLACEMENT_DIFFERENTIAL)
        W = params.W0
        if act.is_force:
            scale = W * act.difference / 2.0
        else:
            scale = 2.0 * act.difference / (W * beta(params, L))
        return AngleField(
            lambda s: scale * params.rigidity.compliance_integral(s / L, L, params.E),
            lambda s: scale / params.EI(s),
            0.0,
        )

    _require(act, Mode.FORCE_PAIR, Mode.DISPLACEMENT_PAIR)
    W, EI = params.W0, params.EI0
    if act.is_force:
        u = -act.total / params.EA
        k = W * act.difference / (2.0 * EI)
    else:
        u = -act.total / (2.0 * L)
        k = act.difference / (W * L)
    if u <= -1.0:
        raise PhysicalValidityError(f"axial strain u={u:g} compresses the backbone to nonpositive length")
    return AngleField(lambda s: k * s, _const(k), u)


def forward(params: RobotParams, case: Case, act: ActuationState, n: int = DEFAULT_SAMPLES) -> BackboneShape:
    """Sampled backbone for any of the four closed-form cases."""
    case = Case(case)
    if case is Case.ROUTING and params.spacing.is_constant:
        return forward_constant(params, act, n)
    if case is Case.NONUNIFORM and params.rigidity.is_constant:
        return forward_constant(params, act, n)
    field = angle_field(params, case, act)
    return shape_from_theta(params, field.theta, field.u, n, field.dtheta)


def forward_constant(params: RobotParams, act: ActuationState, n: int = DEFAULT_SAMPLES) -> BackboneShape:
    """Uniform rod with parallel cables: the angle grows linearly, curvature is constant."""
    field = angle_field(params, Case.CONSTANT, act)
    return shape_from_theta(params, field.theta, 0.0, n, field.dtheta)


def forward_routing(params: RobotParams, act: ActuationState, n: int = DEFAULT_SAMPLES) -> BackboneShape:
    """Uniform rod with cable spacing ``W(s)``; curvature is proportional to ``W(s)``."""
    return forward(params, Case.ROUTING, act, n)


def forward_nonuniform(params: RobotParams, act: ActuationState, n: int = DEFAULT_SAMPLES) -> BackboneShape:
    """Parallel cables on a rod of varying rigidity; ``kappa(s) * EI(s)`` is constant."""
    return forward(params, Case.NONUNIFORM, act, n)


def forward_extensible(params: RobotParams, act: ActuationState, n: int = DEFAULT_SAMPLES) -> BackboneShape:
    """Two independent cables: bending from the difference, uniform axial strain from the sum."""
    return forward(params, Case.EXTENSIBLE, act, n)


def tip_position(
    params: RobotParams,
    case: Case,
    act: ActuationState,
    quad: QuadratureConfig = DEFAULT_QUADRATURE,
) -> tuple[float, float]:
    """Tip coordinates by direct quadrature over ``[0, L]`` (no intermediate samples)."""
    field = angle_field(params, case, act)
    stretch = 1.0 + field.u
    x = stretch * integrate(lambda s: np.cos(field.theta(s)), 0.0, params.L, quad)
    y = stretch * integrate(lambda s: np.sin(field.theta(s)), 0.0, params.L, quad)
    return x, y


# ---------------------------------------------------------------------------
# Force <-> displacement maps
# ---------------------------------------------------------------------------


def force_to_displacement_constant(params: RobotParams, dF: float) -> float:
    """``dl = dF W^2 L / (4 EI)``."""
    W, EI = params.W0, params.EI0
    return dF * W * W * params.L / (4.0 * EI)


def displacement_to_force_constant(params: RobotParams, dl: float) -> float:
    W, EI = params.W0, params.EI0
    return 4.0 * EI * dl / (W * W * params.L)


def displacement_compliance(params: RobotParams, case: Case) -> float:
    """``dl / dF`` for the single-input cases (m/N)."""
    case = Case(case)
    check_case(params, case)
    if case is Case.CONSTANT:
        W, EI = params.W0, params.EI0
        return W * W * params.L / (4.0 * EI)
    if case is Case.ROUTING:
        return params.spacing.square_integral(params.L) / (4.0 * params.EI0)
    if case is Case.NONUNIFORM:
        W = params.W0
        return W * W * beta(params, params.L) / 4.0
    raise ModeError("the extensible case maps cable pairs; use pair_force_displacement_map")


def force_to_displacement(params: RobotParams, case: Case, dF: float) -> float:
    if Case(case) is Case.CONSTANT:
        return force_to_displacement_constant(params, dF)
    return dF * displacement_compliance(params, case)


def displacement_to_force(params: RobotParams, case: Case, dl: float) -> float:
    if Case(case) is Case.CONSTANT:
        return displacement_to_force_constant(params, dl)
    return dl / displacement_compliance(params, case)


def pair_force_displacement_map(params: RobotParams, dl1: float, dl2: float) -> tuple[float, float]:
    """Cable forces ``(F1, F2)`` that hold the extensible rod at displacements ``(dl1, dl2)``.

    ``F1 + F2 = (dl1 + dl2) / (2 B2)`` and ``F1 - F2 = (dl1 - dl2) / (2 B1)``.
    """
    B = ExtensibleCoefficients.from_params(params)
    p, m = 1.0 / B.B2, 1.0 / B.B1
    F1 = 0.25 * ((p + m) * dl1 + (p - m) * dl2)
    F2 = 0.25 * ((p - m) * dl1 + (p + m) * dl2)
    return F1, F2


def pair_displacement_force_map(params: RobotParams, F1: float, F2: float) -> tuple[float, float]:
    """Inverse of :func:`pair_force_displacement_map`."""
    B = ExtensibleCoefficients.from_params(params)
    dl1 = (B.B2 + B.B1) * F1 + (B.B2 - B.B1) * F2
    dl2 = (B.B2 - B.B1) * F1 + (B.B2 + B.B1) * F2
    return dl1, dl2


def to_force_input(params: RobotParams, case: Case, act: ActuationState) -> ActuationState:
    """Equivalent force-mode actuation (identity for force inputs)."""
    if act.is_force:
        return act
    if act.mode is Mode.DISPLACEMENT_PAIR:
        return ActuationState.force_pair(*pair_force_displacement_map(params, *act.values))
    return ActuationState.force_difference(displacement_to_force(params, case, act.difference))


def to_displacement_input(params: RobotParams, case: Case, act: ActuationState) -> ActuationState:
    if not act.is_force:
        return act
    if act.mode is Mode.FORCE_PAIR:
        return ActuationState.displacement_pair(*pair_displacement_force_map(params, *act.values))
    return ActuationState.displacement_difference(force_to_displacement(params, case, act.difference))
