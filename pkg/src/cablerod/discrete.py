"""Disk-discretized robot: cables run as straight chords between consecutive disks.

The backbone angle is a polynomial ``theta(s) = sum_i c_i s^i`` without a
constant term.  Cable displacement is the rod length minus the sum of the
chords, and the equilibrium shape minimizes bending energy minus cable work.
Internally the optimizer works with normalized coefficients ``a_i = c_i L^i``
so all unknowns share the scale of the tip angle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import trapezoid
from scipy.optimize import minimize

from . import _backend
from .core import BackboneShape, RobotParams, shape_from_theta
from .errors import NonconvergenceError, ProfileError, SolverError

DEFAULT_DEGREE = 3
KAPPA_SAMPLES = 1001


@dataclass(frozen=True)
class DiscreteRobotSpec:
    """Rod split into ``n`` equal sections by disks at ``s_j = j L / n``."""

    params: RobotParams
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError("number of sections must be a positive integer")
        if not (self.params.spacing.is_constant and self.params.rigidity.is_constant):
            raise ProfileError("the disk model needs constant spacing and rigidity")

    @property
    def disk_positions(self) -> np.ndarray:
        s = np.linspace(0.0, self.params.L, self.n + 1)
        s[-1] = self.params.L
        return s

    @property
    def edges(self) -> np.ndarray:
        """Disk positions normalized by ``L``."""
        return np.linspace(0.0, 1.0, self.n + 1)


@dataclass(frozen=True)
class PolynomialShape:
    """``theta(s) = sum_{i=1..m} c[i-1] s^i``."""

    coefficients: np.ndarray

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=float).reshape(-1)
        if c.size < 1:
            raise ValueError("polynomial shape needs at least one coefficient")
        if not np.all(np.isfinite(c)):
            raise ValueError("shape coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    @classmethod
    def from_normalized(cls, a, L: float) -> "PolynomialShape":
        a = np.asarray(a, dtype=float)
        return cls(a / L ** np.arange(1, a.size + 1))

    @classmethod
    def linear(cls, kappa: float, degree: int = DEFAULT_DEGREE) -> "PolynomialShape":
        c = np.zeros(degree)
        c[0] = kappa
        return cls(c)

    @property
    def degree(self) -> int:
        return self.coefficients.size

    def normalized(self, L: float) -> np.ndarray:
        return self.coefficients * L ** np.arange(1, self.degree + 1)

    def theta(self, s):
        return np.polynomial.polynomial.polyval(s, np.r_[0.0, self.coefficients])

    def dtheta(self, s):
        return np.polynomial.polynomial.polyval(s, self.coefficients * np.arange(1, self.degree + 1))


@lru_cache(maxsize=8)
def _gauss(nodes: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(nodes)


def _bending_matrix(m: int, EI: float, L: float) -> np.ndarray:
    """``int (EI/2) theta'^2 ds = a^T K a / 2`` for normalized coefficients ``a``."""
    i = np.arange(1, m + 1)
    return (EI / L) * np.outer(i, i) / (i[:, None] + i[None, :] - 1)


def _chords(spec: DiscreteRobotSpec, a: np.ndarray, nodes: int):
    g, w = _gauss(nodes)
    return _backend.chord_terms(a, spec.edges, spec.params.L, spec.params.W0, g, w)


def cable_chords(spec: DiscreteRobotSpec, shape: PolynomialShape, nodes: int = 32) -> tuple[np.ndarray, np.ndarray]:
    """Straight cable lengths across each span, ``(sigma=+1, sigma=-1)``.

    Cable ``+1`` sits at ``+W/2`` on the side toward positive ``theta``.
    """
    cp, cm, _, _ = _chords(spec, shape.normalized(spec.params.L), nodes)
    return cp, cm


def cable_displacements(spec: DiscreteRobotSpec, shape: PolynomialShape, nodes: int = 32) -> tuple[float, float]:
    """``dl_sigma = L - sum_j chord_j^sigma``."""
    cp, cm = cable_chords(spec, shape, nodes)
    L = spec.params.L
    return L - float(np.sum(cp)), L - float(np.sum(cm))


def discrete_energy(spec: DiscreteRobotSpec, shape: PolynomialShape, F1: float, F2: float, nodes: int = 32) -> float:
    """Bending energy minus cable work ``F1 dl1 + F2 dl2``, in joules."""
    return _energy_and_grad(spec, shape.normalized(spec.params.L), F1, F2, nodes)[0]


def _energy_and_grad(spec, a, F1, F2, nodes):
    L = spec.params.L
    K = _bending_matrix(a.size, spec.params.EI0, L)
    cp, cm, dcp, dcm = _chords(spec, a, nodes)
    Ka = K @ a
    energy = 0.5 * a @ Ka - F1 * (L - cp.sum()) - F2 * (L - cm.sum())
    grad = Ka + F1 * dcp.sum(axis=0) + F2 * dcm.sum(axis=0)
    return float(energy), grad


def discrete_energy_gradient(spec: DiscreteRobotSpec, shape: PolynomialShape, F1: float, F2: float, nodes: int = 32) -> np.ndarray:
    """Analytic gradient of :func:`discrete_energy` with respect to the raw coefficients ``c_i``."""
    L = spec.params.L
    g = _energy_and_grad(spec, shape.normalized(L), F1, F2, nodes)[1]
    return g * L ** np.arange(1, shape.degree + 1)


def fd_gradient(spec: DiscreteRobotSpec, shape: PolynomialShape, F1: float, F2: float, rel_step: float = 1e-7, nodes: int = 32) -> np.ndarray:
    """Central-difference gradient in the raw coefficients, step scaled by coefficient magnitude."""
    c = shape.coefficients
    L = spec.params.L
    out = np.empty_like(c)
    for i in range(c.size):
        # floor the step at the size a unit tip-angle change would need
        h = rel_step * max(abs(c[i]), L ** -(i + 1))
        cp, cm = c.copy(), c.copy()
        cp[i] += h
        cm[i] -= h
        out[i] = (
            discrete_energy(spec, PolynomialShape(cp), F1, F2, nodes) - discrete_energy(spec, PolynomialShape(cm), F1, F2, nodes)
        ) / (2.0 * h)
    return out


@dataclass(frozen=True)
class DiscreteOptConfig:
    """Stopping rule for :func:`solve_discrete`; ``gtol`` bounds the raw-coefficient gradient norm.

    BFGS stops at ``bfgs_gtol`` (normalized coefficients) and Newton steps
    take the gradient the rest of the way; pushing BFGS itself to round-off
    only makes its line search thrash.
    """

    gtol: float = 1e-9
    max_iter: int = 500
    newton_steps: int = 8
    quad_nodes: int = 32
    bfgs_gtol: float = 1e-6

    def __post_init__(self):
        if not (self.gtol > 0 and self.bfgs_gtol > 0) or self.max_iter < 1 or self.quad_nodes < 2 or self.newton_steps < 0:
            raise ValueError("invalid optimizer configuration")


@dataclass
class DiscreteSolution:
    shape: PolynomialShape
    energy: float
    initial_energy: float
    dl1: float
    dl2: float
    chords_plus: np.ndarray
    chords_minus: np.ndarray
    kappa_min: float
    kappa_max: float
    kappa_avg: float
    grad_norm: float
    iterations: int
    F1: float
    F2: float
    spec: DiscreteRobotSpec = field(repr=False)

    def backbone(self, n: int = 201) -> BackboneShape:
        return shape_from_theta(self.spec.params, self.shape.theta, 0.0, n, self.shape.dtheta)

    @property
    def kappa_range(self) -> float:
        return self.kappa_max - self.kappa_min


def curvature_stats(shape: PolynomialShape, L: float, samples: int = KAPPA_SAMPLES) -> tuple[float, float, float]:
    """``(min, max, mean)`` of the analytic curvature on a uniform grid over ``[0, L]``."""
    k = shape.dtheta(np.linspace(0.0, L, samples))
    return float(k.min()), float(k.max()), float(trapezoid(k, dx=1.0 / (samples - 1)))


def _hessian(fun_grad, a, h=1e-6):
    m = a.size
    H = np.empty((m, m))
    for i in range(m):
        e = np.zeros(m)
        e[i] = h
        H[:, i] = (fun_grad(a + e)[1] - fun_grad(a - e)[1]) / (2.0 * h)
    return 0.5 * (H + H.T)


def solve_discrete(
    spec: DiscreteRobotSpec,
    F1: float,
    F2: float = 0.0,
    degree: int = DEFAULT_DEGREE,
    cfg: DiscreteOptConfig = DiscreteOptConfig(),
) -> DiscreteSolution:
    """Minimize the discrete energy over polynomial shapes of the given degree.

    Starts from the constant-curvature shape for ``dF = F1 - F2``, runs BFGS
    with the analytic gradient, then polishes with Newton steps on a
    finite-difference Hessian, accepting only steps that lower the energy.
    """
    if degree < 1:
        raise ValueError("polynomial degree must be at least 1")
    params = spec.params
    L = params.L
    kappa0 = params.W0 * (F1 - F2) / (2.0 * params.EI0)
    a0 = PolynomialShape.linear(kappa0, degree).normalized(L)
    scale = L ** np.arange(1, degree + 1)

    def fun_grad(a):
        return _energy_and_grad(spec, a, F1, F2, cfg.quad_nodes)

    e0 = fun_grad(a0)[0]
    res = minimize(fun_grad, a0, jac=True, method="BFGS", options={"gtol": cfg.bfgs_gtol, "maxiter": cfg.max_iter})
    a = res.x
    e, g = fun_grad(a)
    iters = int(res.nit)
    for _ in range(cfg.newton_steps):
        if np.linalg.norm(g * scale) < cfg.gtol * 1e-2:
            break
        try:
            step = np.linalg.solve(_hessian(fun_grad, a), -g)
        except np.linalg.LinAlgError:
            break
        e_new, g_new = fun_grad(a + step)
        if not (e_new <= e and np.linalg.norm(g_new) < np.linalg.norm(g)):
            break
        a, e, g = a + step, e_new, g_new
        iters += 1
    if e > e0:
        a, (e, g) = a0, fun_grad(a0)
    grad_norm = float(np.linalg.norm(g * scale))
    cp, cm, _, _ = _chords(spec, a, cfg.quad_nodes)
    if not math.isfinite(grad_norm) or grad_norm > cfg.gtol:
        min_chord = float(min(cp.min(), cm.min()))
        message = "discrete energy minimization did not reach the stationarity tolerance"
        if min_chord < 1e-9 * L:
            # chord norms have a kink at zero, so no smooth minimizer exists there
            message += "; a cable chord collapsed (curvature reached 2/W)"
        raise NonconvergenceError(message, grad_norm=grad_norm, iterations=iters, min_chord=min_chord)

    shape = PolynomialShape.from_normalized(a, L)
    kmin, kmax, kavg = curvature_stats(shape, L)
    return DiscreteSolution(
        shape=shape,
        energy=e,
        initial_energy=e0,
        dl1=L - float(cp.sum()),
        dl2=L - float(cm.sum()),
        chords_plus=cp,
        chords_minus=cm,
        kappa_min=kmin,
        kappa_max=kmax,
        kappa_avg=kavg,
        grad_norm=grad_norm,
        iterations=iters,
        F1=F1,
        F2=F2,
        spec=spec,
    )


SWEEP_COLUMNS = ("dF", "n", "kappa_min", "kappa_max", "kappa_avg", "energy", "grad_norm", "iterations")


@dataclass
class SweepRow:
    dF: float
    n: int
    solution: Optional[DiscreteSolution] = None
    error: Optional[str] = None

    def values(self) -> tuple:
        s = self.solution
        if s is None:
            nan = float("nan")
            return (self.dF, self.n, nan, nan, nan, nan, nan, -1)
        return (self.dF, self.n, s.kappa_min, s.kappa_max, s.kappa_avg, s.energy, s.grad_norm, s.iterations)


def convergence_sweep(
    params: RobotParams,
    dF_values: Sequence[float],
    n_values: Sequence[int],
    degree: int = DEFAULT_DEGREE,
    cfg: DiscreteOptConfig = DiscreteOptConfig(),
) -> list[SweepRow]:
    """One row per ``(dF, n)`` with ``F1 = dF, F2 = 0``; a failed solve is recorded, not raised."""
    if len(dF_values) == 0 or len(n_values) == 0:
        raise ValueError("sweep needs at least one force and one section count")
    rows = []
    for dF in dF_values:
        for n in n_values:
            try:
                sol = solve_discrete(DiscreteRobotSpec(params, int(n)), float(dF), 0.0, degree, cfg)
                rows.append(SweepRow(float(dF), int(n), sol))
            except SolverError as exc:
                rows.append(SweepRow(float(dF), int(n), None, str(exc)))
    return rows
