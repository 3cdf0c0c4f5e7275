"""Direct numeric minimization of the continuous rod energy, independent of the closed forms.

The unknowns are nodal tangent angles on a uniform mesh (plus a constant axial
strain for the extensible case).  Each element uses the stiffness
``1 / int_e (1/EI)``, the smallest bending energy compatible with its end
angles, so the discrete minimizer is exact at the nodes.  Used by the test
suite as the oracle for every closed-form forward model.
"""
from __future__ import annotations

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.optimize import minimize

from .core import GAUSS_QUADRATURE, ActuationState, BackboneShape, QuadratureConfig, RobotParams, integrate
from .errors import OracleError
from .forward import Case, check_case, to_force_input


def _element_integrals(f, mesh: np.ndarray, quad: QuadratureConfig) -> np.ndarray:
    return np.array([integrate(f, a, b, quad) for a, b in zip(mesh[:-1], mesh[1:])])


def oracle_minimize(
    params: RobotParams,
    case: Case,
    act: ActuationState,
    grid_size: int = 201,
    gtol: float = 1e-10,
    quad: QuadratureConfig = GAUSS_QUADRATURE,
) -> BackboneShape:
    """Minimizing backbone on a ``grid_size``-node mesh; displacement inputs are mapped to forces first."""
    case = Case(case)
    check_case(params, case)
    if grid_size < 3:
        raise ValueError("oracle mesh needs at least three nodes")
    act = to_force_input(params, case, act)
    L = params.L
    s = np.linspace(0.0, L, grid_size)
    h = np.diff(s)
    k = 1.0 / _element_integrals(lambda t: 1.0 / params.EI(t), s, quad)
    N = grid_size - 1

    # linear work term g . theta_full plus, for the extensible case, an axial block
    g_full = np.zeros(grid_size)
    if case is Case.ROUTING:
        Wint = _element_integrals(params.W, s, quad)
        slope = 0.5 * act.difference * Wint / h
        g_full[1:] += slope
        g_full[:-1] -= slope
    else:
        g_full[-1] = 0.5 * params.W0 * act.difference
    g = g_full[1:]
    extensible = case is Case.EXTENSIBLE
    if extensible:
        axial_k = params.EA * L
        axial_g = -L * act.total
        g = np.r_[g, axial_g]

    def split(z):
        th = np.r_[0.0, z[:N]]
        return th, (z[N] if extensible else 0.0)

    def hess_theta(v):
        full = np.r_[0.0, v]
        d = k * np.diff(full)
        out = np.zeros(grid_size)
        out[1:] += d
        out[:-1] -= d
        return out[1:]

    def hessp(z, v):
        out = hess_theta(v[:N])
        if extensible:
            out = np.r_[out, axial_k * v[N]]
        return out

    def fun(z):
        Hz = hessp(z, z)
        return 0.5 * z @ Hz - g @ z, Hz - g

    z0 = np.zeros(N + (1 if extensible else 0))
    res = minimize(
        fun,
        z0,
        jac=True,
        hessp=hessp,
        method="trust-ncg",
        options={"gtol": gtol * max(1.0, float(np.max(np.abs(g)))), "maxiter": 200},
    )
    grad_norm = float(np.max(np.abs(res.jac)))
    if not res.success and grad_norm > gtol * max(1.0, float(np.max(np.abs(g)))):
        raise OracleError("oracle minimization did not converge", grad_norm=grad_norm, status=res.message)

    theta, u = split(res.x)
    stretch = 1.0 + u
    x = stretch * cumulative_trapezoid(np.cos(theta), s, initial=0.0)
    y = stretch * cumulative_trapezoid(np.sin(theta), s, initial=0.0)
    kappa = np.gradient(theta, s, edge_order=2)
    return BackboneShape(s=s, theta=theta, kappa=kappa, u=np.full(grid_size, u), x=x, y=y)
