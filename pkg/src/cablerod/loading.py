"""Cable-driven rod under a uniform distributed load.

The tangent angle solves ``EI theta'' = -q_x (L-s) sin(theta) + q_y (L-s) cos(theta)``
with ``theta(0) = 0`` and ``theta'(L) = W dF / (2 EI)``.  Three solvers are
provided: shooting (the reference), Galerkin projection onto a polynomial
basis, and Adomian decomposition.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np
from numpy.polynomial import Chebyshev
from scipy.optimize import brentq

from . import _backend
from .core import BackboneShape, RobotParams, shape_from_theta
from .errors import BracketError, DivergenceError, NonconvergenceError, ProfileError

DEFAULT_SAMPLES = 201
SHOOTING_STEPS = 2000


@dataclass(frozen=True)
class LoadedBVP:
    """Uniform load ``(q_x, q_y)`` in N/m plus a cable force differential ``dF`` in N."""

    params: RobotParams
    qx: float = 0.0
    qy: float = 0.0
    dF: float = 0.0

    def __post_init__(self):
        for name in ("qx", "qy", "dF"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if not (self.params.spacing.is_constant and self.params.rigidity.is_constant):
            raise ProfileError("the loaded rod model needs constant spacing and rigidity")

    @property
    def EI(self) -> float:
        return self.params.EI0

    @property
    def L(self) -> float:
        return self.params.L

    @property
    def tip_curvature(self) -> float:
        """Neumann value ``theta'(L) = W dF / (2 EI)``."""
        return self.params.W0 * self.dF / (2.0 * self.EI)

    @property
    def unloaded(self) -> bool:
        return self.qx == 0.0 and self.qy == 0.0


def strong_form_residual(bvp: LoadedBVP, s, theta, d2theta) -> np.ndarray:
    """Pointwise ``EI theta'' + q_x (L-s) sin(theta) - q_y (L-s) cos(theta)``, in newtons."""
    s = np.asarray(s, dtype=float)
    theta = np.asarray(theta, dtype=float)
    lever = bvp.L - s
    return bvp.EI * np.asarray(d2theta, dtype=float) + lever * (bvp.qx * np.sin(theta) - bvp.qy * np.cos(theta))


def shape_residual(bvp: LoadedBVP, shape: BackboneShape) -> np.ndarray:
    """Residual of a sampled shape, with ``theta''`` from second-order differences of its curvature."""
    d2 = np.gradient(shape.kappa, shape.s, edge_order=2)
    return strong_form_residual(bvp, shape.s, shape.theta, d2)


@dataclass
class LoadingSolution:
    """Shape returned by a loaded-rod solver together with its residual diagnostics."""

    method: str
    shape: BackboneShape
    residual: np.ndarray
    info: dict[str, Any] = field(default_factory=dict)
    series: Optional["AdomianSeries"] = None

    @property
    def tip_angle(self) -> float:
        return self.shape.tip_angle

    @property
    def residual_norm(self) -> float:
        return float(np.max(np.abs(self.residual)))


# ---------------------------------------------------------------------------
# Shooting
# ---------------------------------------------------------------------------


def solve_shooting(
    bvp: LoadedBVP,
    tol: float = 1e-12,
    steps: int = SHOOTING_STEPS,
    n: int = DEFAULT_SAMPLES,
    max_expansions: int = 40,
) -> LoadingSolution:
    """Fixed-step RK4 from the base with a bracketed root-find on ``theta'(0)``."""
    if steps % (n - 1):
        raise ValueError(f"steps ({steps}) must be a multiple of n - 1 ({n - 1})")
    L, EI, qx, qy = bvp.L, bvp.EI, bvp.qx, bvp.qy
    target = bvp.tip_curvature

    def miss(p0):
        return _backend.loaded_rk4_end(p0, L, EI, qx, qy, steps)[1] - target

    # an unloaded rod has theta'' = 0, so the load moment sets the bracket scale
    width = (abs(qx) + abs(qy)) * L * L / (2.0 * EI) + 1.0
    lo, hi = target - width, target + width
    f_lo, f_hi = miss(lo), miss(hi)
    tries = 0
    while f_lo * f_hi > 0:
        if tries >= max_expansions:
            raise BracketError(
                "could not bracket theta'(0); the load may be too large for this bracket",
                bracket=(lo, hi),
                residuals=(f_lo, f_hi),
            )
        width *= 2.0
        lo, hi = target - width, target + width
        f_lo, f_hi = miss(lo), miss(hi)
        tries += 1
    if f_lo == 0.0:
        p0 = lo
    elif f_hi == 0.0:
        p0 = hi
    else:
        p0 = brentq(miss, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=200)

    path = _backend.loaded_rk4_path(p0, L, EI, qx, qy, steps)[:: steps // (n - 1)]
    s = np.linspace(0.0, L, n)
    shape = BackboneShape(s=s, theta=path[:, 0], kappa=path[:, 1], u=np.zeros(n), x=path[:, 2], y=path[:, 3])
    return LoadingSolution(
        method="shooting",
        shape=shape,
        residual=shape_residual(bvp, shape),
        info={"base_curvature": p0, "tip_mismatch": miss(p0), "bracket_expansions": tries},
    )


# ---------------------------------------------------------------------------
# Galerkin
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GalerkinConfig:
    """Basis size, quadrature order and Newton stopping rule for :func:`solve_galerkin`.

    The basis is ``psi_k(s) = L (xi^(k+1) - (k+1) xi)`` with ``xi = s/L``, so
    ``psi_k(0) = 0`` and ``psi_k'(L) = 0``; a linear particular term carries
    the tip curvature.  Weights equal the basis functions.
    """

    K: int = 6
    quad_nodes: int = 64
    tol: float = 1e-12
    max_iter: int = 50

    def __post_init__(self):
        if self.K < 1:
            raise ValueError("Galerkin basis needs K >= 1")
        if self.quad_nodes < self.K + 2:
            raise ValueError("too few quadrature nodes for the basis size")
        if not self.tol > 0 or self.max_iter < 1:
            raise ValueError("tolerance and iteration cap must be positive")


def galerkin_basis(K: int, L: float, s) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Values, first and second derivatives of the K basis functions, shape ``(K,) + shape(s)``."""
    xi = np.asarray(s, dtype=float)[None, ...] / L
    k = np.arange(1, K + 1).reshape((K,) + (1,) * (xi.ndim - 1))
    val = L * (xi ** (k + 1) - (k + 1) * xi)
    d1 = (k + 1) * (xi**k - 1.0)
    d2 = (k + 1) * k * xi ** (k - 1) / L
    return val, d1, d2


def solve_galerkin(bvp: LoadedBVP, cfg: GalerkinConfig = GalerkinConfig(), n: int = DEFAULT_SAMPLES) -> LoadingSolution:
    """Newton iteration on the weighted-residual equations ``int psi_j R ds = 0``."""
    L, EI, qx, qy = bvp.L, bvp.EI, bvp.qx, bvp.qy
    kL = bvp.tip_curvature
    g, w = np.polynomial.legendre.leggauss(cfg.quad_nodes)
    sq = 0.5 * L * (g + 1.0)
    wq = 0.5 * L * w
    P, _, P2 = galerkin_basis(cfg.K, L, sq)
    lever = L - sq

    def angle(c):
        return kL * sq + c @ P

    def projections(c):
        th = angle(c)
        R = EI * (c @ P2) + lever * (qx * np.sin(th) - qy * np.cos(th))
        return P @ (wq * R), th

    c = np.zeros(cfg.K)
    proj, th = projections(c)
    scale = EI * L + (abs(qx) + abs(qy)) * L**3
    history = [float(np.max(np.abs(proj)))]
    for it in range(cfg.max_iter):
        if history[-1] <= cfg.tol * scale:
            break
        dR = EI * P2 + P * (lever * (qx * np.cos(th) + qy * np.sin(th)))
        Jm = (P * wq) @ dR.T
        step = np.linalg.solve(Jm, -proj)
        c = c + step
        proj, th = projections(c)
        history.append(float(np.max(np.abs(proj))))
        if not np.isfinite(history[-1]) or history[-1] > 1e6 * history[0] + scale:
            raise NonconvergenceError("Galerkin Newton iteration diverged", residual=history[-1], iterations=it + 1)
        if np.max(np.abs(step)) <= 1e-15 * (1.0 + np.max(np.abs(c))):
            break
    else:
        if history[-1] > cfg.tol * scale:
            raise NonconvergenceError(
                "Galerkin Newton iteration hit the iteration cap", residual=history[-1], iterations=cfg.max_iter
            )

    def theta(s):
        return kL * s + np.tensordot(c, galerkin_basis(cfg.K, L, s)[0], 1)

    def dtheta(s):
        return kL + np.tensordot(c, galerkin_basis(cfg.K, L, s)[1], 1)

    shape = shape_from_theta(bvp.params, theta, 0.0, n, dtheta)
    d2 = c @ galerkin_basis(cfg.K, L, shape.s)[2]
    return LoadingSolution(
        method="galerkin",
        shape=shape,
        residual=strong_form_residual(bvp, shape.s, shape.theta, d2),
        info={"coefficients": c.copy(), "projection_norm": history[-1], "iterations": len(history) - 1, "K": cfg.K},
    )


# ---------------------------------------------------------------------------
# Adomian decomposition
# ---------------------------------------------------------------------------


def sin_cos_components(components: Sequence, sin0, cos0, order: int) -> tuple[list, list]:
    """Taylor coefficients in ``lam`` of ``sin`` and ``cos`` of ``sum_k components[k] lam^k``.

    ``S_n = (1/n!) d^n/dlam^n sin(...)`` at ``lam = 0``, likewise ``C_n``.  Uses
    ``n S_n = sum_k k c_k C_(n-k)`` and ``n C_n = -sum_k k c_k S_(n-k)``, which
    follow from differentiating ``sin`` and ``cos`` of the series once.  Works on
    anything supporting ``+``, ``*`` and division by an int (floats, arrays,
    polynomial objects, symbols).
    """
    S = [sin0]
    C = [cos0]
    for n in range(1, order + 1):
        s_acc = 0
        c_acc = 0
        for k in range(1, n + 1):
            if k >= len(components):
                break
            s_acc = s_acc + k * components[k] * C[n - k]
            c_acc = c_acc - k * components[k] * S[n - k]
        S.append(s_acc / n if not isinstance(s_acc, int) else 0)
        C.append(c_acc / n if not isinstance(c_acc, int) else 0)
    return S, C


@dataclass
class AdomianSeries:
    """Components ``theta_0 .. theta_M`` and polynomials ``A_0 .. A_(M-1)`` as Chebyshev series on ``[0, L]``."""

    order: int
    components: list[Chebyshev]
    polynomials: list[Chebyshev]

    def partial_sum(self, m: Optional[int] = None) -> Chebyshev:
        m = self.order if m is None else m
        total = self.components[0]
        for comp in self.components[1 : m + 1]:
            total = total + comp
        return total

    def components_on(self, s) -> np.ndarray:
        """Component samples, shape ``(M+1, len(s))``."""
        return np.array([c(np.asarray(s, dtype=float)) for c in self.components])

    def increment_norms(self, s=None) -> np.ndarray:
        """``max |theta_n|`` for ``n = 1..M`` on a sample grid."""
        if s is None:
            s = np.linspace(*self.components[0].domain, 401)
        return np.max(np.abs(self.components_on(s)[1:]), axis=1)


def _truncate(p: Chebyshev, degree: int) -> Chebyshev:
    return p.cutdeg(degree) if p.degree() > degree else p


def solve_adomian(
    bvp: LoadedBVP,
    M: int = 4,
    degree: int = 48,
    n: int = DEFAULT_SAMPLES,
) -> LoadingSolution:
    """Adomian partial sum ``sum_0^M theta_n`` with ``theta_(n+1) = -Linv[A_n]``.

    ``Linv g = int_0^s int_L^tau g`` honours both boundary conditions, and
    ``A_n`` are the Adomian polynomials of ``[q_x (L-s) sin - q_y (L-s) cos] / EI``.
    Components are Chebyshev series of the given degree on ``[0, L]``.
    """
    if M < 1:
        raise ValueError("truncation order must be at least 1")
    L, EI, qx, qy = bvp.L, bvp.EI, bvp.qx, bvp.qy
    dom = [0.0, L]
    kL = bvp.tip_curvature
    theta0 = Chebyshev([0.5 * kL * L, 0.5 * kL * L], domain=dom)
    lever = Chebyshev([0.5 * L, -0.5 * L], domain=dom)
    sin0 = Chebyshev.interpolate(lambda s: np.sin(kL * s), degree, domain=dom)
    cos0 = Chebyshev.interpolate(lambda s: np.cos(kL * s), degree, domain=dom)

    comps = [theta0]
    polys = []
    growth = 0
    probe = np.linspace(0.0, L, 401)
    last = None
    for k in range(M):
        S, C = sin_cos_components(comps, sin0, cos0, k)
        A = _truncate(lever * (qx * S[k] - qy * C[k]) * (1.0 / EI), degree)
        polys.append(A)
        comps.append(_truncate(-A.integ(lbnd=L).integ(lbnd=0.0), degree))
        size = float(np.max(np.abs(comps[-1](probe))))
        if size == 0.0:
            # vanishing orders (odd symmetry of the load) carry no growth information
            continue
        if last is not None and size > last:
            growth += 1
            if growth >= 3:
                raise DivergenceError(
                    "Adomian increments grew over three consecutive orders; use solve_shooting instead",
                    order=k + 1,
                    increment=size,
                )
        else:
            growth = 0
        last = size

    series = AdomianSeries(order=M, components=comps, polynomials=polys)
    total = series.partial_sum()
    d1, d2 = total.deriv(1), total.deriv(2)
    shape = shape_from_theta(bvp.params, lambda s: total(s) - total(0.0), 0.0, n, d1)
    return LoadingSolution(
        method="adomian",
        shape=shape,
        residual=strong_form_residual(bvp, shape.s, shape.theta, d2(shape.s)),
        info={"order": M, "increments": series.increment_norms(probe).tolist()},
        series=series,
    )
