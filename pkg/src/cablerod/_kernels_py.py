"""Reference implementations of the hot kernels (numpy / plain Python).

Signatures match the compiled ``_kernels`` module exactly.
"""
import math

import numpy as np


def _rhs(s, th, om, L, EI, qx, qy):
    lever = L - s
    return om, (-qx * lever * math.sin(th) + qy * lever * math.cos(th)) / EI, math.cos(th), math.sin(th)


def loaded_rk4_end(p0, L, EI, qx, qy, steps):
    """Integrate the loaded rod from the base; return ``(theta(L), theta'(L))``."""
    h = L / steps
    th, om, x, y = 0.0, float(p0), 0.0, 0.0
    for i in range(steps):
        s = i * h
        k1 = _rhs(s, th, om, L, EI, qx, qy)
        k2 = _rhs(s + 0.5 * h, th + 0.5 * h * k1[0], om + 0.5 * h * k1[1], L, EI, qx, qy)
        k3 = _rhs(s + 0.5 * h, th + 0.5 * h * k2[0], om + 0.5 * h * k2[1], L, EI, qx, qy)
        k4 = _rhs(s + h, th + h * k3[0], om + h * k3[1], L, EI, qx, qy)
        th += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
        om += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
    return th, om


def loaded_rk4_path(p0, L, EI, qx, qy, steps):
    """Same integration, returning ``(steps+1, 4)`` rows of ``theta, theta', x, y``."""
    h = L / steps
    out = np.empty((steps + 1, 4))
    th, om, x, y = 0.0, float(p0), 0.0, 0.0
    out[0] = th, om, x, y
    for i in range(steps):
        s = i * h
        k1 = _rhs(s, th, om, L, EI, qx, qy)
        k2 = _rhs(s + 0.5 * h, th + 0.5 * h * k1[0], om + 0.5 * h * k1[1], L, EI, qx, qy)
        k3 = _rhs(s + 0.5 * h, th + 0.5 * h * k2[0], om + 0.5 * h * k2[1], L, EI, qx, qy)
        k4 = _rhs(s + h, th + h * k3[0], om + h * k3[1], L, EI, qx, qy)
        th += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
        om += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
        x += h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
        y += h / 6.0 * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3])
        out[i + 1] = th, om, x, y
    return out


def chord_terms(a, edges, L, W, xg, wg):
    """Span-wise cable chords and their gradients for ``theta(xi) = sum_i a[i] xi**(i+1)``.

    ``edges`` are the normalized disk positions, ``xg, wg`` a Gauss-Legendre
    rule on [-1, 1].  Returns ``(c_plus, c_minus, dc_plus, dc_minus)`` with
    gradients of shape ``(n_spans, len(a))``.
    """
    a = np.asarray(a, dtype=float)
    edges = np.asarray(edges, dtype=float)
    m = a.size
    powers = np.arange(1, m + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    xi = mid[:, None] + half[:, None] * xg[None, :]
    w = (L * half)[:, None] * wg[None, :]
    xp = xi[..., None] ** powers
    th = xp @ a
    c, s = np.cos(th), np.sin(th)
    Ic = np.sum(w * c, axis=1)
    Is = np.sum(w * s, axis=1)
    dIc = -np.einsum("jq,jqi->ji", w * s, xp)
    dIs = np.einsum("jq,jqi->ji", w * c, xp)

    ep = edges[:, None] ** powers
    te = ep @ a
    ce, se = np.cos(te), np.sin(te)
    dsin = se[1:] - se[:-1]
    dcos = ce[1:] - ce[:-1]
    d_dsin = ce[1:, None] * ep[1:] - ce[:-1, None] * ep[:-1]
    d_dcos = -(se[1:, None] * ep[1:] - se[:-1, None] * ep[:-1])

    out = []
    for sigma in (1.0, -1.0):
        A = Ic - sigma * 0.5 * W * dsin
        B = Is + sigma * 0.5 * W * dcos
        C = np.hypot(A, B)
        dA = dIc - sigma * 0.5 * W * d_dsin
        dB = dIs + sigma * 0.5 * W * d_dcos
        out.append((C, (A[:, None] * dA + B[:, None] * dB) / C[:, None]))
    (cp, dcp), (cm, dcm) = out
    return cp, cm, dcp, dcm
