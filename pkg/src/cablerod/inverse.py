"""Differential inverse kinematics: integrate actuation rates so the tip follows a target.

For the single-input cases the tip abscissa obeys ``xdot = -d * adot`` where
``d = int_0^L sin(theta) * dtheta/da ds`` and ``a`` is the actuation input.
The rate is ``-xdot / d``; when ``|d|`` falls below ``eps`` a damped
least-squares quotient ``-xdot * d / (d^2 + lambda^2)`` replaces it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import DEFAULT_QUADRATURE, ActuationState, Mode, QuadratureConfig, RobotParams, beta, integrate
from .errors import ConfigurationError, ModeError
from .forward import Case, ExtensibleCoefficients, check_case, tip_position

SERIES_THRESHOLD = 1e-4


@dataclass(frozen=True)
class InverseConfig:
    scheme: str = "euler"
    damping: float = 1e-6
    eps: float = 1e-8
    quad: QuadratureConfig = DEFAULT_QUADRATURE

    def __post_init__(self):
        if self.scheme not in ("euler", "rk4"):
            raise ValueError(f"unknown integration scheme {self.scheme!r}")
        if not self.eps > 0:
            raise ValueError("denominator threshold eps must be positive")
        if self.damping < 0:
            raise ValueError("damping must be nonnegative")


DEFAULT_INVERSE = InverseConfig()


def damped_quotient(xdot: float, d: float, cfg: InverseConfig) -> tuple[float, bool]:
    """Rate solving ``xdot = -d * rate``; returns ``(rate, singular)``."""
    if abs(d) >= cfg.eps:
        return -xdot / d, False
    denom = d * d + cfg.damping**2
    if denom == 0.0:
        # undamped and d**2 underflowed: no usable direction
        return 0.0, True
    return -xdot * d / denom, True


# ---------------------------------------------------------------------------
# Single-input denominators
# ---------------------------------------------------------------------------


def denominator_constant(params: RobotParams, act: ActuationState, quad: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    check_case(params, Case.CONSTANT)
    W, EI, L = params.W0, params.EI0, params.L
    if act.mode is Mode.FORCE_DIFFERENTIAL:
        g = W / (2.0 * EI)
    elif act.mode is Mode.DISPLACEMENT_DIFFERENTIAL:
        g = 2.0 / (W * L)
    else:
        raise ModeError(f"{act.mode.value} is not a single-input mode")
    a = act.difference
    return integrate(lambda s: np.sin(g * a * s) * (g * s), 0.0, L, quad)


def denominator_routing(params: RobotParams, act: ActuationState, quad: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    check_case(params, Case.ROUTING)
    L = params.L
    if act.mode is Mode.FORCE_DIFFERENTIAL:
        scale = 1.0 / (2.0 * params.EI0)
    elif act.mode is Mode.DISPLACEMENT_DIFFERENTIAL:
        scale = 2.0 / params.spacing.square_integral(L)
    else:
        raise ModeError(f"{act.mode.value} is not a single-input mode")
    a = act.difference

    def kernel(s):
        running = params.spacing.running_integral(s / L, L)
        return np.sin(a * scale * running) * running

    return scale * integrate(kernel, 0.0, L, quad)


def denominator_nonuniform(params: RobotParams, act: ActuationState, quad: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    check_case(params, Case.NONUNIFORM)
    W, L = params.W0, params.L
    if act.mode is Mode.FORCE_DIFFERENTIAL:
        scale = W / 2.0
    elif act.mode is Mode.DISPLACEMENT_DIFFERENTIAL:
        scale = 2.0 / (W * beta(params, L))
    else:
        raise ModeError(f"{act.mode.value} is not a single-input mode")
    a = act.difference

    def kernel(s):
        b = beta(params, s)
        return np.sin(a * scale * b) * b

    return scale * integrate(kernel, 0.0, L, quad)


_DENOMINATORS = {
    Case.CONSTANT: denominator_constant,
    Case.ROUTING: denominator_routing,
    Case.NONUNIFORM: denominator_nonuniform,
}


def rate_denominator(params: RobotParams, case: Case, act: ActuationState, quad: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """``-dx(L)/da`` for a single-input case."""
    case = Case(case)
    if case is Case.EXTENSIBLE:
        raise ModeError("the extensible case has a 2x2 Jacobian; use extensible_jacobian")
    return _DENOMINATORS[case](params, act, quad)


def inverse_rate(params: RobotParams, case: Case, act: ActuationState, xdot: float, cfg: InverseConfig = DEFAULT_INVERSE) -> float:
    return damped_quotient(xdot, rate_denominator(params, case, act, cfg.quad), cfg)[0]


def inverse_rate_constant(params, act, xdot, cfg: InverseConfig = DEFAULT_INVERSE) -> float:
    return inverse_rate(params, Case.CONSTANT, act, xdot, cfg)


def inverse_rate_routing(params, act, xdot, cfg: InverseConfig = DEFAULT_INVERSE) -> float:
    return inverse_rate(params, Case.ROUTING, act, xdot, cfg)


def inverse_rate_nonuniform(params, act, xdot, cfg: InverseConfig = DEFAULT_INVERSE) -> float:
    return inverse_rate(params, Case.NONUNIFORM, act, xdot, cfg)


# ---------------------------------------------------------------------------
# Extensible case
# ---------------------------------------------------------------------------


def _a_terms(phi: float, stretch: float, L: float, W: float) -> tuple[float, float, float, float]:
    """Tip sensitivities to the cable-displacement sum and difference.

    ``xdot = A1 * d(sum) + A2 * d(diff)`` and ``ydot = A3 * d(sum) + A4 * d(diff)``
    where ``phi = diff / W`` is the tip angle and ``stretch = 1 + u``.
    """
    r = stretch * L / W
    if abs(phi) < SERIES_THRESHOLD:
        p2 = phi * phi
        A1 = -0.5 * (1.0 - p2 / 6.0 + p2 * p2 / 120.0)
        A2 = r * phi * (-1.0 / 3.0 + p2 / 30.0)
        A3 = -0.5 * phi * (0.5 - p2 / 24.0)
        A4 = r * (0.5 - p2 / 8.0 + p2 * p2 / 144.0)
        return A1, A2, A3, A4
    sn, cs = math.sin(phi), math.cos(phi)
    A1 = -sn / (2.0 * phi)
    A2 = r * (cs / phi - sn / (phi * phi))
    A3 = -(1.0 - cs) / (2.0 * phi)
    A4 = r * (sn / phi - (1.0 - cs) / (phi * phi))
    return A1, A2, A3, A4


def a_coefficients(params: RobotParams, act: ActuationState) -> tuple[float, float, float, float]:
    """Displacement-form coefficients evaluated at the equivalent cable displacements."""
    check_case(params, Case.EXTENSIBLE)
    W, L = params.W0, params.L
    if act.mode is Mode.DISPLACEMENT_PAIR:
        d_sum, d_diff = act.total, act.difference
    elif act.mode is Mode.FORCE_PAIR:
        B = ExtensibleCoefficients.from_params(params)
        d_sum, d_diff = 2.0 * B.B2 * act.total, 2.0 * B.B1 * act.difference
    else:
        raise ModeError("the extensible case takes pair inputs")
    return _a_terms(d_diff / W, 1.0 - d_sum / (2.0 * L), L, W)


def extensible_jacobian(params: RobotParams, act: ActuationState) -> np.ndarray:
    """``d(x_tip, y_tip) / d(input1, input2)`` for a pair input."""
    A1, A2, A3, A4 = a_coefficients(params, act)
    if act.mode is Mode.DISPLACEMENT_PAIR:
        gs, gd = 1.0, 1.0
    else:
        B = ExtensibleCoefficients.from_params(params)
        gs, gd = 2.0 * B.B2, 2.0 * B.B1
    return np.array(
        [
            [gs * A1 + gd * A2, gs * A1 - gd * A2],
            [gs * A3 + gd * A4, gs * A3 - gd * A4],
        ]
    )


def inverse_rate_extensible(
    params: RobotParams,
    act: ActuationState,
    xdot: float,
    ydot: float,
    cfg: InverseConfig = DEFAULT_INVERSE,
) -> tuple[float, float]:
    return _extensible_rate(params, act, xdot, ydot, cfg)[0]


def _extensible_rate(params, act, xdot, ydot, cfg):
    J = extensible_jacobian(params, act)
    v = np.array([xdot, ydot])
    det = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
    # force-mode entries are ~B-sized, so compare the sine of the column angle, not det itself
    scale = np.linalg.norm(J[:, 0]) * np.linalg.norm(J[:, 1])
    if scale > 0 and abs(det) >= cfg.eps * scale:
        rate = np.linalg.solve(J, v)
        singular = False
    else:
        rate = np.linalg.solve(J.T @ J + cfg.damping**2 * np.eye(2), J.T @ v)
        singular = True
    return (float(rate[0]), float(rate[1])), singular


def inverse_rate_extensible_quotient(
    params: RobotParams, act: ActuationState, xdot: float, ydot: float
) -> tuple[float, float]:
    """Explicit quotient formulas for the pair rates (no regularization)."""
    A1, A2, A3, A4 = a_coefficients(params, act)
    if act.mode is Mode.DISPLACEMENT_PAIR:
        den = 2.0 * (A2 * A3 - A1 * A4)
        r1 = ((A3 - A4) * xdot - (A1 - A2) * ydot) / den
        r2 = (-(A3 + A4) * xdot + (A1 + A2) * ydot) / den
        return r1, r2
    B = ExtensibleCoefficients.from_params(params)
    B1, B2 = B.B1, B.B2
    den = B1 * B2 * (A1 * A4 - A2 * A3)
    r1 = 0.25 * (A1 * B2 * ydot - A2 * B1 * ydot - A3 * B2 * xdot + A4 * B1 * xdot) / den
    r2 = 0.25 * (-A1 * B2 * ydot - A2 * B1 * ydot + A3 * B2 * xdot + A4 * B1 * xdot) / den
    return r1, r2


# ---------------------------------------------------------------------------
# Trajectory tracking
# ---------------------------------------------------------------------------


Signal = Callable[[float], float]


@dataclass(frozen=True)
class TrajectorySpec:
    """Tip target with analytic time derivative(s) and the starting actuation."""

    x_target: Signal
    xdot_target: Signal
    initial: ActuationState
    T: float
    dt: float = 1e-3
    y_target: Optional[Signal] = None
    ydot_target: Optional[Signal] = None
    consistency_tol: float = 1e-9
    label: str = ""

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigurationError("time step must be positive")
        if self.T < self.dt:
            raise ConfigurationError("horizon must cover at least one step")
        if (self.y_target is None) != (self.ydot_target is None):
            raise ConfigurationError("y target and its derivative must be given together")

    @property
    def planar(self) -> bool:
        return self.y_target is not None

    @property
    def steps(self) -> int:
        return int(math.floor(self.T / self.dt + 1e-9))


def oscillating_trajectory(
    params: RobotParams,
    case: Case,
    initial: ActuationState,
    amplitude: float = 0.1,
    decay: float = 0.1,
    frequency: float = 1.0,
    T: float = 10.0,
    dt: float = 1e-3,
) -> TrajectorySpec:
    """``x_d(t) = x0 + amplitude * exp(-decay t) * sin(2 pi frequency t)`` around the initial tip."""
    x0 = tip_position(params, case, initial)[0]
    w = 2.0 * math.pi * frequency

    def x_d(t):
        return x0 + amplitude * math.exp(-decay * t) * math.sin(w * t)

    def xdot_d(t):
        return amplitude * math.exp(-decay * t) * (w * math.cos(w * t) - decay * math.sin(w * t))

    return TrajectorySpec(x_d, xdot_d, initial, T, dt, label="oscillating")


def shrinking_circle_trajectory(
    params: RobotParams,
    initial: ActuationState,
    R0: float,
    Re: float,
    T: float = 10.0,
    dt: float = 1e-3,
) -> TrajectorySpec:
    """One loop of a circle whose radius shrinks linearly from ``R0`` to ``Re``, starting at the initial tip."""
    x0, y0 = tip_position(params, Case.EXTENSIBLE, initial)
    w = 2.0 * math.pi / T
    dR = -(R0 - Re) / T

    def R(t):
        return R0 + dR * t

    return TrajectorySpec(
        x_target=lambda t: x0 - R0 + R(t) * math.cos(w * t),
        xdot_target=lambda t: dR * math.cos(w * t) - R(t) * w * math.sin(w * t),
        y_target=lambda t: y0 + R(t) * math.sin(w * t),
        ydot_target=lambda t: dR * math.sin(w * t) + R(t) * w * math.cos(w * t),
        initial=initial,
        T=T,
        dt=dt,
        label="circle",
    )


@dataclass
class InverseLog:
    """Per-step record of a tracking run."""

    inputs: tuple[str, ...]
    t: np.ndarray
    actuation: np.ndarray
    x_tip: np.ndarray
    y_tip: np.ndarray
    x_target: np.ndarray
    y_target: np.ndarray
    err: np.ndarray
    singular: np.ndarray = field(repr=False)

    @property
    def columns(self) -> tuple[str, ...]:
        return ("t",) + self.inputs + ("x_tip", "y_tip", "x_target", "y_target", "err")

    def table(self) -> np.ndarray:
        return np.column_stack([self.t, self.actuation, self.x_tip, self.y_tip, self.x_target, self.y_target, self.err])

    @property
    def max_error(self) -> float:
        return float(np.max(self.err))

    @property
    def rms_error(self) -> float:
        return float(np.sqrt(np.mean(self.err**2)))

    @property
    def singular_steps(self) -> int:
        return int(np.count_nonzero(self.singular))


def track(params: RobotParams, case: Case, traj: TrajectorySpec, cfg: InverseConfig = DEFAULT_INVERSE) -> InverseLog:
    """Step the actuation so the forward tip follows ``traj``; see :class:`InverseLog`."""
    case = Case(case)
    check_case(params, case)
    act0 = traj.initial
    pair = case is Case.EXTENSIBLE
    if pair != act0.is_pair:
        raise ModeError(f"{case.value} case needs {'a pair' if pair else 'a single'} actuation input")
    if pair != traj.planar:
        raise ConfigurationError(f"{case.value} case needs {'x and y' if pair else 'only x'} targets")

    x_start, y_start = tip_position(params, case, act0, cfg.quad)
    gap = abs(x_start - traj.x_target(0.0))
    if pair:
        gap = math.hypot(gap, y_start - traj.y_target(0.0))
    if gap > traj.consistency_tol:
        raise ConfigurationError(
            f"initial actuation puts the tip {gap:.3e} m from the target at t=0 (tolerance {traj.consistency_tol:g})"
        )

    def rate(t, a):
        state = act0.replace(a)
        if pair:
            r, sing = _extensible_rate(params, state, traj.xdot_target(t), traj.ydot_target(t), cfg)
            return np.array(r), sing
        d = _DENOMINATORS[case](params, state, cfg.quad)
        r, sing = damped_quotient(traj.xdot_target(t), d, cfg)
        return np.array([r]), sing

    n = traj.steps
    dt = traj.dt
    k = len(act0.values)
    t = np.arange(n + 1) * dt
    acts = np.empty((n + 1, k))
    tips = np.empty((n + 1, 2))
    flags = np.zeros(n + 1, dtype=bool)
    a = np.array(act0.values)
    acts[0] = a
    tips[0] = x_start, y_start
    for i in range(n):
        ti = t[i]
        k1, s1 = rate(ti, a)
        if cfg.scheme == "euler":
            step = k1
            sing = s1
        else:
            k2, s2 = rate(ti + 0.5 * dt, a + 0.5 * dt * k1)
            k3, s3 = rate(ti + 0.5 * dt, a + 0.5 * dt * k2)
            k4, s4 = rate(ti + dt, a + dt * k3)
            step = (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
            sing = s1 or s2 or s3 or s4
        a = a + dt * step
        acts[i + 1] = a
        tips[i + 1] = tip_position(params, case, act0.replace(a), cfg.quad)
        flags[i] = sing

    xt = np.array([traj.x_target(v) for v in t])
    if pair:
        yt = np.array([traj.y_target(v) for v in t])
        err = np.hypot(tips[:, 0] - xt, tips[:, 1] - yt)
    else:
        yt = np.full(n + 1, np.nan)
        err = np.abs(tips[:, 0] - xt)
    return InverseLog(
        inputs=act0.labels,
        t=t,
        actuation=acts,
        x_tip=tips[:, 0],
        y_tip=tips[:, 1],
        x_target=xt,
        y_target=yt,
        err=err,
        singular=flags,
    )
