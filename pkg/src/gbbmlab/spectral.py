"""Discretized eigen-analysis of the linearization around the ground state.

Everything here works with the Weinstein-sign operator

    L f = -f_xx + (1 - omega^2) f - (p+1) psi_omega^p f,
    psi_omega^p = phi_c^p / c,

which is bounded below, has exactly one negative eigenvalue, a kernel spanned
by the translation mode phi_c', and essential spectrum starting at
(c-1)/c. The literal action Hessian of the functionals module is -c times
this operator; results are reported in the Weinstein sign so that eigenvalue
counts are meaningful, and callers translate when they need the literal form.

Discretization: Dirichlet truncation, second-order central differences. The
matrix is symmetric tridiagonal, so the unconstrained eigenproblem is solved
directly in tridiagonal form. Constrained minima project the dense matrix
onto the orthogonal complement of the constraints and use a dense symmetric
eigensolve; robustness over speed, at desk scale (interior size <= 4097).

A discretization footnote that matters: the discrete image of the kernel mode
sits O(h^2) below zero (Dirichlet truncation pushes it negative), so a raw
count of negative matrix eigenvalues is one too high at every practical
resolution. SpectrumReport therefore identifies the kernel candidate (the
eigenvalue nearest zero) and excludes it from negative_count.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh, eigh_tridiagonal, qr, solve_banded

from .grid import DIRICHLET, Field, Grid, inner
from .ground_state import GroundState, normalized_profile_norm_sq
from .functionals import hessian_apply

DENSE_LIMIT = 4097


class EigenSolveError(RuntimeError):
    """Eigen-solver did not converge; never returns silent garbage."""


def _interior(grid: Grid) -> np.ndarray:
    if grid.boundary != DIRICHLET:
        raise ValueError("Weinstein discretization requires a dirichlet_truncated grid")
    return grid.nodes[1:-1]


def discretize_weinstein(gs: GroundState, grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """Symmetric tridiagonal (diagonal, off-diagonal) on the interior nodes."""
    x = _interior(grid)
    h = grid.h
    pot_profile = gs.profile_pow_p(grid).values[1:-1] / gs.c
    diag = 2.0 / h ** 2 + (1.0 - gs.omega ** 2) - (gs.p + 1.0) * pot_profile
    off = np.full(x.size - 1, -1.0 / h ** 2)
    return diag, off


def weinstein_matrix(gs: GroundState, grid: Grid) -> np.ndarray:
    diag, off = discretize_weinstein(gs, grid)
    return np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)


def weinstein_quadratic_form(gs: GroundState, f: Field) -> float:
    """<L f, f> through the literal Hessian: <L f, f> = -<hessian(f), f>/c."""
    return -inner(hessian_apply(gs, f), f) / gs.c


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: np.ndarray
    negative_count: int
    kernel_candidate: Field
    kernel_eigenvalue: float
    kernel_overlap: float

    def to_json(self) -> str:
        return json.dumps(
            {
                "eigenvalues": list(map(float, self.eigenvalues)),
                "negative_count": self.negative_count,
                "kernel_eigenvalue": self.kernel_eigenvalue,
                "kernel_overlap": self.kernel_overlap,
            },
            indent=2,
        )


def eigenpairs(gs: GroundState, grid: Grid, m: int = 6) -> SpectrumReport:
    """Lowest m eigenpairs of the Weinstein operator, with kernel bookkeeping.

    negative_count excludes the kernel candidate (eigenvalue nearest zero),
    whose discrete image sits O(h^2) below zero; kernel_overlap is its
    normalized projection onto the sampled translation mode.
    """
    if m < 3:
        raise ValueError(f"need at least 3 eigenpairs, got m={m!r}")
    diag, off = discretize_weinstein(gs, grid)
    try:
        w, v = eigh_tridiagonal(diag, off, select="i", select_range=(0, m - 1))
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise EigenSolveError(f"tridiagonal eigensolve failed: {exc}") from exc
    if not np.all(np.isfinite(w)):  # pragma: no cover
        raise EigenSolveError("eigensolve produced non-finite eigenvalues")

    kernel_idx = int(np.argmin(np.abs(w)))
    dphi = gs.profile_dx(grid).values[1:-1]
    vec = v[:, kernel_idx]
    overlap = abs(float(vec @ dphi)) / (
        float(np.linalg.norm(vec)) * float(np.linalg.norm(dphi))
    )
    neg = int(np.sum((w < 0.0) & (np.arange(w.size) != kernel_idx)))
    kernel_field = Field(grid, np.pad(vec, 1))
    return SpectrumReport(w, neg, kernel_field, float(w[kernel_idx]), overlap)


@dataclass(frozen=True)
class CoercivityReport:
    constrained_min: float
    constraints_used: tuple
    raw_min: float

    def to_json(self) -> str:
        return json.dumps(
            {
                "constrained_min": self.constrained_min,
                "constraints_used": list(self.constraints_used),
                "raw_min": self.raw_min,
            },
            indent=2,
        )


def constrained_form_minimum(gs: GroundState, grid: Grid, constraints) -> CoercivityReport:
    """Minimum of <L xi, xi>/<xi, xi> over the complement of the constraints.

    constraints maps names to Fields (or interior arrays). The minimum is the
    lowest eigenvalue of the dense matrix projected onto the orthogonal
    complement; an empty mapping returns the unconstrained minimum.
    """
    diag, off = discretize_weinstein(gs, grid)
    n = diag.size
    if n > DENSE_LIMIT:
        raise ValueError(
            f"dense projected eigensolve capped at {DENSE_LIMIT} interior nodes, got {n}"
        )
    raw = float(eigh_tridiagonal(diag, off, select="i", select_range=(0, 0))[0][0])

    names = tuple(constraints.keys())
    if not names:
        return CoercivityReport(raw, (), raw)

    cols = []
    for name in names:
        c = constraints[name]
        vec = c.values[1:-1] if isinstance(c, Field) else np.asarray(c, dtype=float)
        if vec.shape != (n,):
            raise ValueError(f"constraint {name!r} has wrong length {vec.shape}")
        cols.append(vec)
    C = np.stack(cols, axis=1)
    # orthonormalize and reject rank-deficient constraint sets
    s = np.linalg.svd(C, compute_uv=False)
    if s[-1] <= 1e-10 * s[0]:
        raise ValueError(f"constraints {names} are (numerically) linearly dependent")

    Qfull, _ = qr(np.concatenate([C, np.eye(n)], axis=1), mode="economic")
    Z = Qfull[:, C.shape[1]:n]
    T = np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)
    reduced = Z.T @ (T @ Z)
    try:
        wmin = float(eigh(reduced, eigvals_only=True, subset_by_index=[0, 0])[0])
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise EigenSolveError(f"projected eigensolve failed: {exc}") from exc
    return CoercivityReport(wmin, names, raw)


def inverse_pairing(gs: GroundState, grid: Grid, f: Field) -> float:
    """<L^{-1} f, f> by a banded solve; sign decides constrained positivity.

    For a constraint direction f orthogonal to the kernel, the form minimum on
    {xi : <xi, f> = 0} is nonnegative exactly when this pairing is <= 0.
    """
    diag, off = discretize_weinstein(gs, grid)
    n = diag.size
    ab = np.zeros((3, n))
    ab[0, 1:] = off
    ab[1] = diag
    ab[2, :-1] = off
    rhs = f.values[1:-1]
    sol = solve_banded((1, 1), ab, rhs)
    return float(grid.h * np.dot(sol, rhs))


@dataclass(frozen=True)
class NegativeDirectionReport:
    closed_form: float
    quadrature_value: float

    @property
    def rel_error(self) -> float:
        return abs(self.closed_form - self.quadrature_value) / abs(self.closed_form)


def negative_direction_check(
    gs: GroundState, grid: Grid, fd_step: float = 1e-5
) -> NegativeDirectionReport:
    """Quadratic form of the literal Hessian on the omega-derivative direction.

    Closed form: 2 (2/p - 1/2) (1 - omega^2)^{2/p - 3/2} ||psi_0||^2, negative
    for p > 4. The quadrature path builds d/d_omega psi_omega by central
    differences in omega and applies the Hessian directly.
    """
    p = gs.p
    if p <= 4:
        raise ValueError(f"negative-direction check requires p > 4, got p={p!r}")
    omega = gs.omega
    psi0 = normalized_profile_norm_sq(p)
    closed = 2.0 * (2.0 / p - 0.5) * (1.0 - omega ** 2) ** (2.0 / p - 1.5) * psi0

    dw = fd_step
    plus = GroundState(p, (omega + dw) ** -2).scaled_profile(grid).values
    minus = GroundState(p, (omega - dw) ** -2).scaled_profile(grid).values
    direction = Field(grid, (plus - minus) / (2.0 * dw))
    quad = inner(hessian_apply(gs, direction), direction)
    return NegativeDirectionReport(closed, quad)


def essential_spectrum_edge(gs: GroundState) -> float:
    return (gs.c - 1.0) / gs.c
