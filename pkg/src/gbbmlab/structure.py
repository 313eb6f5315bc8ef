"""Structural directions Gamma_c and kappa_c and the negativity quadratic form.

With B(c) = 3/2 ||x phi||^2 + 9/2 ||x phi_x||^2 - 3 ||phi||^2 and
D(c) = -(4pc + 4c - 3p) / (2(p+4)) * ||phi||^2, the direction

    Gamma_c = B(c) [c^2 Psi_c + (c/2) x phi_x + c phi] + D(c) (3x^2 phi + x^3 phi_x)

has Hessian image kappa_c = hessian(Gamma_c) available in closed form:

    kappa_c = [B(p+1)c^2 - Bpc + 6cD] phi + B(1-p)c^2 phi_xx + 18cD x phi_x
              + (6c - 3pc) D x^2 phi_xx + 3p(c-1) D x^2 phi.

The headline quantity is <kappa_c, Gamma_c> = <hessian(Gamma_c), Gamma_c> at the
critical speed, tabulated over p. Table rows are only accepted when the closed
form and a direct operator application of the Hessian agree to 1e-6 in relative
sup-norm and in the scalar; that forces a p-dependent resolution floor, since
the finite-difference second derivative carries an O((k h)^4) error with
k = p/2 sqrt((c-1)/c) the inner length scale of the profile.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .grid import DIRICHLET, Field, Grid, inner, make_grid, quadrature
from .ground_state import GroundState, critical_speed
from .functionals import hessian_apply

DEFAULT_HALF_WIDTH = 50.0 * math.pi
DEFAULT_POINTS = 8192
TABLE_MIN_POINTS = 16384
TABLE_KH_LIMIT = 0.02
DUAL_PATH_TOL = 1e-6


class DualPathError(RuntimeError):
    """Closed-form and operator-applied kappa disagree beyond tolerance."""


def coefficients(gs: GroundState, grid: Grid) -> tuple[float, float]:
    """(B(c), D(c)) by quadrature of the analytic profile."""
    x = grid.nodes
    phi = gs.profile(grid).values
    dphi = gs.profile_dx(grid).values
    n2 = quadrature(Field(grid, phi ** 2))
    xn2 = quadrature(Field(grid, (x * phi) ** 2))
    xdn2 = quadrature(Field(grid, (x * dphi) ** 2))
    B = 1.5 * xn2 + 4.5 * xdn2 - 3.0 * n2
    D = -(4.0 * gs.p * gs.c + 4.0 * gs.c - 3.0 * gs.p) / (2.0 * (gs.p + 4.0)) * n2
    return B, D


def gamma_direction(gs: GroundState, grid: Grid) -> Field:
    B, D = coefficients(gs, grid)
    x = grid.nodes
    c = gs.c
    phi = gs.profile(grid).values
    dphi = gs.profile_dx(grid).values
    psi = gs.psi_direction(grid).values
    vals = B * (c * c * psi + 0.5 * c * x * dphi + c * phi) + D * (
        3.0 * x * x * phi + x * x * x * dphi
    )
    return Field(grid, vals)


def kappa_closed_form(gs: GroundState, grid: Grid) -> Field:
    B, D = coefficients(gs, grid)
    p, c = gs.p, gs.c
    x = grid.nodes
    phi = gs.profile(grid).values
    dphi = gs.profile_dx(grid).values
    ddphi = gs.profile_dxx(grid).values
    vals = (
        (B * (p + 1.0) * c * c - B * p * c + 6.0 * c * D) * phi
        + B * (1.0 - p) * c * c * ddphi
        + 18.0 * c * D * x * dphi
        + (6.0 * c - 3.0 * p * c) * D * x * x * ddphi
        + 3.0 * p * (c - 1.0) * D * x * x * phi
    )
    return Field(grid, vals)


def kappa_operator(gs: GroundState, grid: Grid) -> Field:
    """kappa via direct Hessian application to the sampled Gamma (independent path)."""
    return hessian_apply(gs, gamma_direction(gs, grid))


def cubic_pair_image(gs: GroundState, grid: Grid) -> Field:
    """Hessian image of d_x(x^3 phi) = 3x^2 phi + x^3 phi_x, in closed form.

    Equals 6c phi + 18c x phi_x + (6c - 3pc) x^2 phi_xx + 3p(c-1) x^2 phi.
    """
    p, c = gs.p, gs.c
    x = grid.nodes
    phi = gs.profile(grid).values
    dphi = gs.profile_dx(grid).values
    ddphi = gs.profile_dxx(grid).values
    vals = (
        6.0 * c * phi
        + 18.0 * c * x * dphi
        + (6.0 * c - 3.0 * p * c) * x * x * ddphi
        + 3.0 * p * (c - 1.0) * x * x * phi
    )
    return Field(grid, vals)


@dataclass(frozen=True)
class StructureSet:
    gs: GroundState
    B: float
    D: float
    Gamma: Field
    kappa_closed: Field
    kappa_operator: Field

    @property
    def dual_path_sup_error(self) -> float:
        scale = float(np.max(np.abs(self.kappa_closed.values)))
        diff = float(np.max(np.abs(self.kappa_closed.values - self.kappa_operator.values)))
        return diff / scale


def build_structure(gs: GroundState, grid: Grid) -> StructureSet:
    B, D = coefficients(gs, grid)
    return StructureSet(
        gs,
        B,
        D,
        gamma_direction(gs, grid),
        kappa_closed_form(gs, grid),
        kappa_operator(gs, grid),
    )


def table_points(p: float, c: float, L: float, n_request: int) -> int:
    """Resolution floor so quadrature and the FD Hessian both reach ~1e-8.

    Keeps k*h <= 0.02 for the sech-argument rate k, never below 16384.
    """
    k = 0.5 * p * math.sqrt((c - 1.0) / c)
    need = 2.0 * L * k / TABLE_KH_LIMIT
    n = max(int(n_request), TABLE_MIN_POINTS, 1 << max(int(need - 1e-12), 1).bit_length())
    return n


def negativity_form(
    gs: GroundState,
    grid: Grid | None = None,
    L: float = DEFAULT_HALF_WIDTH,
    n_request: int = DEFAULT_POINTS,
) -> tuple[float, float, float]:
    """(<kappa, Gamma> closed-form path, operator path, dual-path sup error).

    When no grid is given, a Dirichlet grid on [-L, L] with the table
    resolution floor is built.
    """
    if grid is None:
        n = table_points(gs.p, gs.c, L, n_request)
        grid = make_grid(L, n, DIRICHLET)
    st = build_structure(gs, grid)
    v_closed = inner(st.kappa_closed, st.Gamma)
    v_operator = inner(st.kappa_operator, st.Gamma)
    return v_closed, v_operator, st.dual_path_sup_error


@dataclass(frozen=True)
class TableRow:
    p: float
    c0: float
    form_value: float
    operator_value: float
    dual_sup_error: float
    points: int

    @property
    def negative(self) -> bool:
        return self.form_value < 0.0

    @property
    def dual_scalar_error(self) -> float:
        return abs(self.form_value - self.operator_value) / abs(self.form_value)


@dataclass(frozen=True)
class TableReport:
    rows: tuple
    half_width: float

    def all_negative(self) -> bool:
        return all(r.negative for r in self.rows)

    def consistent(self, tol: float = DUAL_PATH_TOL) -> bool:
        return all(
            r.dual_sup_error <= tol and r.dual_scalar_error <= tol for r in self.rows
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["p", "c0", "form_value", "negative"])
        for r in self.rows:
            w.writerow([r.p, repr(r.c0), repr(r.form_value), str(r.negative).lower()])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(
            [
                {
                    "p": r.p,
                    "c0": r.c0,
                    "form_value": r.form_value,
                    "operator_value": r.operator_value,
                    "dual_sup_error": r.dual_sup_error,
                    "points": r.points,
                    "negative": r.negative,
                }
                for r in self.rows
            ],
            indent=2,
        )


def _table_row(args) -> TableRow:
    p, L, n_request = args
    c0 = critical_speed(p)
    gs = GroundState(p, c0)
    n = table_points(p, c0, L, n_request)
    grid = make_grid(L, n, DIRICHLET)
    v_closed, v_operator, sup_err = negativity_form(gs, grid)
    return TableRow(p, c0, v_closed, v_operator, sup_err, n)


def negativity_table(
    p_list,
    L: float = DEFAULT_HALF_WIDTH,
    n_request: int = DEFAULT_POINTS,
    workers: int = 1,
    strict: bool = True,
) -> TableReport:
    """Tabulate <hessian(Gamma), Gamma> at c0(p) over p_list.

    Rows are independent and may fan out to a process pool; output order
    follows p_list regardless of worker count. With strict=True a dual-path
    discrepancy above 1e-6 aborts the table.
    """
    p_list = list(p_list)
    if not p_list:
        raise ValueError("p_list must not be empty")
    for p in p_list:
        if p <= 4:
            raise ValueError(f"table entries require p > 4, got {p!r}")
    jobs = [(float(p), float(L), int(n_request)) for p in p_list]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = tuple(pool.map(_table_row, jobs))
    else:
        rows = tuple(_table_row(j) for j in jobs)
    report = TableReport(rows, L)
    if strict and not report.consistent():
        worst = max(rows, key=lambda r: max(r.dual_sup_error, r.dual_scalar_error))
        raise DualPathError(
            f"dual-path disagreement at p={worst.p}: sup {worst.dual_sup_error:.2e}, "
            f"scalar {worst.dual_scalar_error:.2e} (tol {DUAL_PATH_TOL:.0e})"
        )
    return report


def modulation_pairing(
    gs: GroundState, grid: Grid, fd_step_rel: float = 1e-5
) -> tuple[float, float]:
    """(<d_c phi_c, kappa_c> by central differences in c, closed form).

    The closed form is the exact identity c^2 B(c) dQ/dc(phi_c): the pairing
    is proportional to the momentum slope and therefore vanishes at the
    critical speed. Both values are returned so callers can see how far from
    degeneracy a given (p, c) sits.
    """
    p, c = gs.p, gs.c
    dc = fd_step_rel * c
    phi_plus = GroundState(p, c + dc).profile(grid).values
    phi_minus = GroundState(p, c - dc).profile(grid).values
    dcphi = Field(grid, (phi_plus - phi_minus) / (2.0 * dc))
    fd_value = inner(dcphi, kappa_closed_form(gs, grid))

    B, _ = coefficients(gs, grid)
    n2 = quadrature(Field(grid, gs.profile(grid).values ** 2))
    dq = (
        (8.0 * (p + 2.0) * c ** 2 - 8.0 * p * c - p ** 2)
        / (4.0 * p * (p + 4.0) * c ** 2 * (c - 1.0))
        * n2
    )
    return fd_value, c * c * B * dq
