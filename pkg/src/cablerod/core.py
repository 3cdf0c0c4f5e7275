"""Domain types, spatial profiles, sampling and quadrature shared by every solver.

Profiles are evaluated in the normalized coordinate ``xi = s / L`` so that
polynomial coefficients can be written exactly in ``(s/L)`` form.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Union

import numpy as np

from .errors import ContractError, DomainError, ModeError, ProfileError, QuadratureError

ArrayLike = Union[float, np.ndarray]
ThetaFn = Callable[[np.ndarray], np.ndarray]

_PROFILE_PROBE = np.linspace(0.0, 1.0, 2001)


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuadratureConfig:
    """Fixed-node quadrature rule.

    ``nodes`` is the panel count for composite Simpson (must be even) and the
    node count for Gauss-Legendre.  ``tol`` is the absolute tolerance used when
    :func:`integrate` is asked to self-check.
    """

    scheme: str = "simpson"
    nodes: int = 256
    tol: float = 1e-10

    def __post_init__(self):
        if self.scheme not in ("simpson", "gauss"):
            raise ValueError(f"unknown quadrature scheme {self.scheme!r}")
        if self.nodes < 16:
            raise ValueError("quadrature needs at least 16 nodes")
        if self.scheme == "simpson" and self.nodes % 2:
            raise ValueError("composite Simpson needs an even panel count")
        if not self.tol > 0:
            raise ValueError("quadrature tolerance must be positive")

    def rule(self, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
        """Abscissae and weights on ``[a, b]``."""
        x01, w01 = _unit_rule(self.scheme, self.nodes)
        return a + (b - a) * x01, (b - a) * w01

    def coarse(self) -> "QuadratureConfig":
        n = self.nodes // 2
        if self.scheme == "simpson":
            n += n % 2
        return QuadratureConfig(self.scheme, max(n, 16), self.tol)


DEFAULT_QUADRATURE = QuadratureConfig()
GAUSS_QUADRATURE = QuadratureConfig("gauss", 64)


@lru_cache(maxsize=32)
def _unit_rule(scheme: str, nodes: int) -> tuple[np.ndarray, np.ndarray]:
    if scheme == "simpson":
        x = np.linspace(0.0, 1.0, nodes + 1)
        w = np.ones(nodes + 1)
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        w *= 1.0 / (3.0 * nodes)
    else:
        g, gw = np.polynomial.legendre.leggauss(nodes)
        x = 0.5 * (g + 1.0)
        w = 0.5 * gw
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def integrate(
    f: Callable[[np.ndarray], ArrayLike],
    a: float,
    b: float,
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
    check: bool = False,
) -> float:
    """Definite integral of a vectorized scalar function over ``[a, b]``.

    With ``check=True`` the result is compared against the same rule at half
    resolution and a :class:`QuadratureError` is raised when they differ by
    more than ``cfg.tol``.
    """
    if a > b:
        raise DomainError(f"integration bounds reversed: a={a!r} > b={b!r}")
    value = _apply_rule(f, a, b, cfg)
    if check:
        coarse = _apply_rule(f, a, b, cfg.coarse())
        if abs(value - coarse) > cfg.tol:
            raise QuadratureError(
                f"quadrature did not reach tol={cfg.tol:g} (refinement changed result by {abs(value - coarse):.3e})"
            )
    return value


def _apply_rule(f, a, b, cfg):
    x, w = cfg.rule(a, b)
    fx = np.broadcast_to(np.asarray(f(x), dtype=float), x.shape)
    bad = ~np.isfinite(fx)
    if bad.any():
        i = int(np.argmax(bad))
        raise QuadratureError(f"integrand is not finite at s={float(x[i])!r} (value {float(fx[i])!r})")
    return float(w @ fx)


# ---------------------------------------------------------------------------
# Profiles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpacingProfile:
    """Cable spacing ``W(xi) = sum_k coeffs[k] * xi**k`` with ``xi = s/L``."""

    kind: str
    coeffs: tuple[float, ...]

    def __post_init__(self):
        if self.kind not in ("constant", "polynomial"):
            raise ValueError(f"unknown spacing profile kind {self.kind!r}")
        if not self.coeffs or (self.kind == "constant" and len(self.coeffs) != 1):
            raise ValueError("constant spacing takes exactly one coefficient")
        values = self(_PROFILE_PROBE)
        if not np.all(np.isfinite(values)) or values.min() <= 0.0:
            raise ProfileError(f"cable spacing must be positive on [0, L]; min sample {values.min():g}")

    @classmethod
    def constant(cls, W: float) -> "SpacingProfile":
        return cls("constant", (float(W),))

    @classmethod
    def polynomial(cls, coeffs) -> "SpacingProfile":
        return cls("polynomial", tuple(float(c) for c in coeffs))

    @property
    def is_constant(self) -> bool:
        return self.kind == "constant"

    def __call__(self, xi: ArrayLike) -> ArrayLike:
        return np.polynomial.polynomial.polyval(xi, self.coeffs)

    def running_integral(self, xi: ArrayLike, L: float) -> ArrayLike:
        """Closed-form ``int_0^{xi L} W(s) ds``."""
        c = np.asarray(self.coeffs)
        antider = np.concatenate(([0.0], c / np.arange(1, c.size + 1)))
        return L * np.polynomial.polynomial.polyval(xi, antider)

    def square_integral(self, L: float) -> float:
        """Closed-form ``int_0^L W(s)^2 ds``."""
        sq = np.polynomial.polynomial.polymul(self.coeffs, self.coeffs)
        return float(L * np.sum(sq / np.arange(1, sq.size + 1)))


@dataclass(frozen=True)
class RigidityProfile:
    """Second moment of area along the backbone.

    ``constant`` holds ``I`` directly.  ``tapered`` describes a circular section
    whose diameter varies linearly from ``D0`` at the base to ``D1`` at the tip.
    """

    kind: str
    I0: float = 0.0
    D0: float = 0.0
    D1: float = 0.0

    def __post_init__(self):
        if self.kind == "constant":
            if not self.I0 > 0:
                raise ProfileError(f"second moment of area must be positive, got {self.I0!r}")
        elif self.kind == "tapered":
            if not (self.D0 > 0 and self.D1 > 0):
                raise ProfileError(f"tapered diameters must be positive, got D0={self.D0!r}, D1={self.D1!r}")
        else:
            raise ValueError(f"unknown rigidity profile kind {self.kind!r}")

    @classmethod
    def constant(cls, I: float) -> "RigidityProfile":
        return cls("constant", I0=float(I))

    @classmethod
    def tapered(cls, D0: float, D1: float) -> "RigidityProfile":
        return cls("tapered", D0=float(D0), D1=float(D1))

    @property
    def is_constant(self) -> bool:
        return self.kind == "constant"

    def __call__(self, xi: ArrayLike) -> ArrayLike:
        if self.kind == "constant":
            return self.I0 * np.ones_like(np.asarray(xi, dtype=float))
        d = self.D0 + (self.D1 - self.D0) * np.asarray(xi, dtype=float)
        return math.pi / 64.0 * d**4

    def compliance_integral(self, xi: ArrayLike, L: float, E: float) -> ArrayLike:
        """Closed-form ``int_0^{xi L} ds / (E I(s))``."""
        xi = np.asarray(xi, dtype=float)
        if self.kind == "constant":
            return xi * L / (E * self.I0)
        dD = self.D1 - self.D0
        scale = 64.0 / (math.pi * E)
        if dD == 0.0:
            return scale * xi * L / self.D0**4
        d = self.D0 + dD * xi
        return scale * (L / dD) * (1.0 / (3.0 * self.D0**3) - 1.0 / (3.0 * d**3))


# ---------------------------------------------------------------------------
# Robot and actuation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RobotParams:
    """Geometry and material of a planar rod with two symmetric cables (SI units)."""

    L: float
    E: float
    spacing: SpacingProfile
    rigidity: RigidityProfile
    A: float | None = None
    D: float | None = None

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError(f"backbone length must be positive, got {self.L!r}")
        if not self.E > 0:
            raise ValueError(f"Young's modulus must be positive, got {self.E!r}")
        if self.A is not None and not self.A > 0:
            raise ValueError(f"cross-section area must be positive, got {self.A!r}")
        if self.D is not None and self.rigidity.is_constant:
            I_circ = math.pi / 64.0 * self.D**4
            if abs(self.rigidity.I0 - I_circ) > 1e-9 * I_circ:
                raise ValueError(f"I={self.rigidity.I0!r} disagrees with a circular section of D={self.D!r}")
            if self.A is not None:
                A_circ = math.pi / 4.0 * self.D**2
                if abs(self.A - A_circ) > 1e-9 * A_circ:
                    raise ValueError(f"A={self.A!r} disagrees with a circular section of D={self.D!r}")

    @classmethod
    def circular(cls, L: float, D: float, E: float, W: float) -> "RobotParams":
        """Uniform circular rod with constant cable spacing."""
        return cls(
            L=L,
            E=E,
            spacing=SpacingProfile.constant(W),
            rigidity=RigidityProfile.constant(math.pi / 64.0 * D**4),
            A=math.pi / 4.0 * D**2,
            D=D,
        )

    def W(self, s: ArrayLike) -> ArrayLike:
        return self.spacing(np.asarray(s, dtype=float) / self.L)

    def I(self, s: ArrayLike) -> ArrayLike:
        return self.rigidity(np.asarray(s, dtype=float) / self.L)

    def EI(self, s: ArrayLike) -> ArrayLike:
        return self.E * self.I(s)

    @property
    def W0(self) -> float:
        """Spacing of a constant profile."""
        if not self.spacing.is_constant:
            raise ProfileError("this operation needs a constant cable spacing")
        return self.spacing.coeffs[0]

    @property
    def EI0(self) -> float:
        """Flexural rigidity of a constant profile."""
        if not self.rigidity.is_constant:
            raise ProfileError("this operation needs a constant flexural rigidity")
        return self.E * self.rigidity.I0

    @property
    def EA(self) -> float:
        if self.A is None:
            raise ValueError("cross-section area A is required for axial strain")
        return self.E * self.A

    def with_spacing(self, spacing: SpacingProfile) -> "RobotParams":
        return RobotParams(self.L, self.E, spacing, self.rigidity, self.A, self.D)

    def with_rigidity(self, rigidity: RigidityProfile) -> "RobotParams":
        D = self.D if rigidity.is_constant else None
        return RobotParams(self.L, self.E, self.spacing, rigidity, self.A, D)


def baseline_params() -> RobotParams:
    """The reference rod: L=0.3 m, D=4 mm, E=2 GPa, W=0.11 m."""
    return RobotParams.circular(L=0.3, D=0.004, E=2e9, W=0.11)


def cubic_spacing_params() -> RobotParams:
    """Reference rod with cable spacing W(s) = 0.04 - 0.03 (s/L)^3."""
    return baseline_params().with_spacing(SpacingProfile.polynomial((0.04, 0.0, 0.0, -0.03)))


def tapered_params() -> RobotParams:
    """Reference rod with a diameter tapering linearly from 6 mm to 5 mm."""
    return baseline_params().with_rigidity(RigidityProfile.tapered(0.006, 0.005))


class Mode(str, enum.Enum):
    FORCE_DIFFERENTIAL = "force_differential"
    DISPLACEMENT_DIFFERENTIAL = "displacement_differential"
    FORCE_PAIR = "force_pair"
    DISPLACEMENT_PAIR = "displacement_pair"


@dataclass(frozen=True)
class ActuationState:
    """Cable input in one of four forms.

    Differential forms carry a single value (``dF`` in N or ``dl`` in m).  Pair
    forms carry both cables; ``difference`` and ``total`` then give
    ``F1 - F2`` / ``F1 + F2`` (or the displacement analogues).
    """

    mode: Mode
    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        want = 2 if self.is_pair else 1
        if len(self.values) != want:
            raise ModeError(f"{self.mode.value} takes {want} value(s), got {len(self.values)}")
        if not all(math.isfinite(v) for v in self.values):
            raise ValueError(f"actuation values must be finite, got {self.values}")

    @classmethod
    def force_difference(cls, dF: float) -> "ActuationState":
        return cls(Mode.FORCE_DIFFERENTIAL, (dF,))

    @classmethod
    def displacement_difference(cls, dl: float) -> "ActuationState":
        return cls(Mode.DISPLACEMENT_DIFFERENTIAL, (dl,))

    @classmethod
    def force_pair(cls, F1: float, F2: float) -> "ActuationState":
        return cls(Mode.FORCE_PAIR, (F1, F2))

    @classmethod
    def displacement_pair(cls, dl1: float, dl2: float) -> "ActuationState":
        return cls(Mode.DISPLACEMENT_PAIR, (dl1, dl2))

    @property
    def is_force(self) -> bool:
        return self.mode in (Mode.FORCE_DIFFERENTIAL, Mode.FORCE_PAIR)

    @property
    def is_pair(self) -> bool:
        return self.mode in (Mode.FORCE_PAIR, Mode.DISPLACEMENT_PAIR)

    @property
    def difference(self) -> float:
        if self.is_pair:
            return self.values[0] - self.values[1]
        return self.values[0]

    @property
    def total(self) -> float:
        if not self.is_pair:
            raise ModeError("only pair inputs define a sum")
        return self.values[0] + self.values[1]

    def replace(self, values) -> "ActuationState":
        return ActuationState(self.mode, tuple(values))

    @property
    def labels(self) -> tuple[str, ...]:
        return {
            Mode.FORCE_DIFFERENTIAL: ("dF",),
            Mode.DISPLACEMENT_DIFFERENTIAL: ("dl",),
            Mode.FORCE_PAIR: ("F1", "F2"),
            Mode.DISPLACEMENT_PAIR: ("dl1", "dl2"),
        }[self.mode]


# ---------------------------------------------------------------------------
# Backbone shape
# ---------------------------------------------------------------------------


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class BackboneShape:
    """Sampled planar backbone: arc length, tangent angle, curvature, axial strain, position."""

    s: np.ndarray
    theta: np.ndarray
    kappa: np.ndarray
    u: np.ndarray
    x: np.ndarray
    y: np.ndarray
    columns: tuple[str, ...] = field(default=("s", "theta", "kappa", "u", "x", "y"), repr=False)

    def __post_init__(self):
        for name in ("s", "theta", "kappa", "u", "x", "y"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        n = self.s.size
        if any(getattr(self, k).shape != (n,) for k in ("theta", "kappa", "u", "x", "y")):
            raise ValueError("all shape samples must share the grid length")
        if n >= 2 and np.any(np.diff(self.s) <= 0):
            raise ValueError("arc-length grid must increase strictly")

    @property
    def tip(self) -> tuple[float, float]:
        return float(self.x[-1]), float(self.y[-1])

    @property
    def tip_angle(self) -> float:
        return float(self.theta[-1])

    @property
    def length(self) -> float:
        return float(self.s[-1])

    def table(self) -> np.ndarray:
        return np.column_stack([self.s, self.theta, self.kappa, self.u, self.x, self.y])


def shape_from_theta(
    params: RobotParams,
    theta: ThetaFn,
    u: float | ThetaFn = 0.0,
    n: int = 201,
    dtheta: ThetaFn | None = None,
    nodes_per_interval: int = 8,
) -> BackboneShape:
    """Sample a backbone from its tangent-angle function.

    Coordinates are ``x = int (1+u) cos(theta)``, ``y = int (1+u) sin(theta)``,
    accumulated interval by interval with a Gauss-Legendre rule.  Curvature is
    ``dtheta`` when supplied; otherwise second-order finite differences of the
    sampled angle.
    """
    if n < 2:
        raise ValueError("a backbone needs at least two samples")
    theta0 = float(np.asarray(theta(np.zeros(1)))[0])
    if abs(theta0) > 1e-12:
        raise ContractError(f"clamped base requires theta(0) = 0, got {theta0!r}")

    ufn = u if callable(u) else (lambda s, _u=float(u): np.full_like(s, _u))
    s = np.linspace(0.0, params.L, n)
    g, gw = np.polynomial.legendre.leggauss(nodes_per_interval)
    h = np.diff(s)
    mid = 0.5 * (s[1:] + s[:-1])
    nodes = mid[:, None] + 0.5 * h[:, None] * g[None, :]
    weights = 0.5 * h[:, None] * gw[None, :]
    th = theta(nodes)
    stretch = 1.0 + ufn(nodes)
    dx = np.sum(weights * stretch * np.cos(th), axis=1)
    dy = np.sum(weights * stretch * np.sin(th), axis=1)
    x = np.concatenate(([0.0], np.cumsum(dx)))
    y = np.concatenate(([0.0], np.cumsum(dy)))

    th_s = np.array(np.broadcast_to(theta(s), s.shape), dtype=float)
    th_s[0] = 0.0
    if dtheta is not None:
        kappa = np.broadcast_to(np.asarray(dtheta(s), dtype=float), s.shape)
    else:
        kappa = np.gradient(th_s, s, edge_order=2 if n >= 3 else 1)
    return BackboneShape(s=s, theta=th_s, kappa=kappa, u=ufn(s), x=x, y=y)


def beta(params: RobotParams, s: ArrayLike) -> ArrayLike:
    """Accumulated bending compliance ``int_0^s dxi / (E I(xi))`` in 1/(N m)."""
    arr = np.asarray(s, dtype=float)
    slack = 1e-12 * params.L
    if np.any(arr < -slack) or np.any(arr > params.L + slack):
        raise DomainError(f"arc length must lie in [0, {params.L}], got {s!r}")
    arr = np.clip(arr, 0.0, params.L)
    out = params.rigidity.compliance_integral(arr / params.L, params.L, params.E)
    return float(out) if np.ndim(out) == 0 else out
