"""Conserved functionals E and Q, the action S_c, gradients, Hessian and flow field.

Conventions, fixed once for the whole package:

    E(u)   = 1/2 int u^2 + 1/(p+2) int |u|^{p+2}
    Q(u)   = 1/2 int (u^2 + u_x^2)
    S_c(u) = E(u) - c Q(u)

    E'(u)  = u + |u|^p u
    Q'(u)  = u - u_xx
    S_c'(u) = c u_xx + (1-c) u + |u|^p u

    hessian_apply(gs, f) = c f_xx + (1-c) f + (p+1) phi_c^p f

The Hessian here is the literal second variation of S_c at phi_c; it equals
-c times the Weinstein operator handled in the spectral module. Quadratic
forms reported by the structure module use this literal convention.

The flow is the Hamiltonian form u_t = -(1 - d_xx)^{-1} d_x (u + |u|^p u).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .grid import Field, derivative, quadrature
from .ground_state import GroundState


@dataclass(frozen=True)
class FunctionalValue:
    E: float
    Q: float
    S_c: float


def _nonlinear(u: np.ndarray, p: float) -> np.ndarray:
    # |u|^p u, well-defined for sign-changing u and non-integer p
    return np.sign(u) * np.abs(u) ** (p + 1.0)


def energy(u: Field, p: float) -> float:
    v = u.values
    dens = 0.5 * v * v + np.abs(v) ** (p + 2.0) / (p + 2.0)
    return quadrature(Field(u.grid, dens))


def momentum(u: Field) -> float:
    ux = derivative(u, 1).values
    v = u.values
    return quadrature(Field(u.grid, 0.5 * (v * v + ux * ux)))


def action(u: Field, p: float, c: float) -> FunctionalValue:
    E = energy(u, p)
    Q = momentum(u)
    return FunctionalValue(E, Q, E - c * Q)


def gradients(u: Field, p: float, c: float) -> tuple[Field, Field, Field]:
    """(E'(u), Q'(u), S_c'(u)) as sampled fields."""
    v = u.values
    uxx = derivative(u, 2).values
    e_grad = v + _nonlinear(v, p)
    q_grad = v - uxx
    s_grad = e_grad - c * q_grad
    g = u.grid
    return Field(g, e_grad), Field(g, q_grad), Field(g, s_grad)


def hessian_apply(gs: GroundState, f: Field) -> Field:
    """Action Hessian at the ground state applied to f (literal sign convention)."""
    fxx = derivative(f, 2).values
    pot = gs.profile_pow_p(f.grid).values
    vals = gs.c * fxx + (1.0 - gs.c) * f.values + (gs.p + 1.0) * pot * f.values
    return Field(f.grid, vals)


@lru_cache(maxsize=8)
def _flow_symbol(grid) -> np.ndarray:
    k = grid.wavenumbers
    sym = -1j * k / (1.0 + k * k)
    sym[-1] = 0.0  # odd symbol: no Nyquist sine on the grid
    return sym


def evolution_rhs(u: Field, p: float, dealias: bool = True) -> Field:
    """u_t = -(1 - d_xx)^{-1} d_x (u + |u|^p u) on a periodic grid."""
    g = u.grid
    w = u.values + _nonlinear(u.values, p)
    wh = np.fft.rfft(w)
    if dealias:
        wh = wh * g.dealias_mask
    out = np.fft.irfft(_flow_symbol(g) * wh, n=g.points)
    return Field(g, out)
