"""Modulation decomposition u(t, . + y) = phi_lambda + xi and virial diagnostics.

Two orthogonality pairs are implemented for the 2-D Newton solve:

* mode="kappa": xi is orthogonal to {d_x phi_lambda, kappa_lambda}. This is
  the pair the instability analysis is built around. Its Jacobian entry
  d/d_lambda <xi, kappa_lambda> at xi=0 equals c^2 B(c) dQ/dc(phi_c)
  (see structure.modulation_pairing), which vanishes AT the critical speed:
  the system is degenerate there, and for data of the form (1-a) phi_c the
  second equation has no root at all (the residual <xi, kappa> stays bounded
  away from zero for every lambda). The solver detects this and reports it
  rather than returning garbage.

* mode="fit": xi is orthogonal to {d_x phi_lambda, d_lambda phi_lambda},
  i.e. (lambda, y) is the least-squares closest profile. The Jacobian is
  dominated by -||d_lambda phi||^2, uniformly nonsingular in the tube, so
  trajectory monitors use this pair and report the kappa residual per frame.

The virial functional is I = I1 + I2 with a localized momentum-flux I1
(odd plateau cutoff) and the profile-weighted correction I2; each frame also
carries beta(u0), gamma(lambda) and the increment budget term
<xi, kappa_lambda>/B(lambda) so the sign structure of dI/dt is auditable.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .grid import Field, Grid, derivative, inner, norm_h1, norm_l2, quadrature, translate
from .ground_state import GroundState, critical_speed, normalized_profile_norm_sq
from .structure import coefficients, cubic_pair_image, kappa_closed_form
from .dynamics import SimulationConfig, Trajectory, evolve

MODE_KAPPA = "kappa"
MODE_FIT = "fit"

FD_LAMBDA_REL = 1e-5


class ModulationError(RuntimeError):
    def __init__(self, message: str, state: "ModulationState"):
        super().__init__(message)
        self.state = state


@dataclass(frozen=True)
class ModulationState:
    lam: float
    y: float
    xi: Field
    newton_iters: int
    residuals: tuple
    mode: str
    converged: bool
    jacobian_det: float


def _second_direction(p: float, lam: float, grid: Grid, mode: str) -> Field:
    gs = GroundState(p, lam)
    if mode == MODE_KAPPA:
        return kappa_closed_form(gs, grid)
    if mode == MODE_FIT:
        d = FD_LAMBDA_REL * lam
        plus = GroundState(p, lam + d).profile(grid).values
        minus = GroundState(p, lam - d).profile(grid).values
        return Field(grid, (plus - minus) / (2.0 * d))
    raise ValueError(f"unknown modulation mode {mode!r}")


def decompose(
    u: Field,
    p: float,
    guess: tuple[float, float],
    mode: str = MODE_KAPPA,
    tol: float = 1e-10,
    max_iter: int = 50,
) -> ModulationState:
    """Solve <xi, d_x phi_lam> = <xi, dir2(lam)> = 0 for (lam, y) by Newton.

    xi(x) = u(x + y) - phi_lam(x). Lambda derivatives of the profile and the
    second direction are central differences (relative step 1e-5); the
    y-derivative uses the spectral derivative of the shifted state. Steps are
    clamped so lam - 1 changes by at most a factor of 2 per iteration.

    Raises ModulationError (with the partial state attached) on a singular
    Jacobian or when the residuals cannot be driven below tolerance, which is
    the generic outcome for mode="kappa" at the critical speed.
    """
    lam, y = float(guess[0]), float(guess[1])
    if lam <= 1.0:
        raise ValueError(f"lambda guess must exceed 1, got {lam!r}")
    u_norm = norm_l2(u)
    grid = u.grid
    r1 = r2 = float("inf")
    det_scaled = float("nan")
    xi = u

    prev_res = float("inf")
    stall = 0
    for it in range(max_iter + 1):
        gs = GroundState(p, lam)
        uy = translate(u, y)
        phi = gs.profile(grid)
        dphi = gs.profile_dx(grid)
        dir2 = _second_direction(p, lam, grid, mode)
        xi = Field(grid, uy.values - phi.values)
        F1 = inner(xi, dphi)
        F2 = inner(xi, dir2)
        r1 = abs(F1) / (u_norm * norm_l2(dphi))
        r2 = abs(F2) / (u_norm * norm_l2(dir2))
        if max(r1, r2) < tol:
            return ModulationState(lam, y, xi, it, (r1, r2), mode, True, det_scaled)
        if it == max_iter:
            break

        d = FD_LAMBDA_REL * lam
        phi_p = GroundState(p, lam + d).profile(grid).values
        phi_m = GroundState(p, lam - d).profile(grid).values
        dphi_p = GroundState(p, lam + d).profile_dx(grid).values
        dphi_m = GroundState(p, lam - d).profile_dx(grid).values
        dir2_p = _second_direction(p, lam + d, grid, mode).values
        dir2_m = _second_direction(p, lam - d, grid, mode).values
        h = grid.h
        uyv = uy.values
        duy = derivative(uy, 1).values

        J11 = h * (uyv @ (dphi_p - dphi_m) - (phi_p @ dphi_p - phi_m @ dphi_m)) / (2.0 * d)
        J21 = h * (uyv @ (dir2_p - dir2_m) - (phi_p @ dir2_p - phi_m @ dir2_m)) / (2.0 * d)
        J12 = h * (duy @ dphi.values)
        J22 = h * (duy @ dir2.values)
        det = J11 * J22 - J12 * J21
        scale = max(abs(J11 * J22), abs(J12 * J21), 1e-300)
        det_scaled = det / scale
        if abs(det) < 1e-12 * scale:
            state = ModulationState(lam, y, xi, it, (r1, r2), mode, False, det_scaled)
            raise ModulationError(
                f"singular modulation Jacobian (scaled det {det_scaled:.2e}) "
                f"at lam={lam:.6g}, y={y:.6g}, residuals ({r1:.2e}, {r2:.2e})",
                state,
            )
        dlam = (-F1 * J22 + F2 * J12) / det
        dy = (-F2 * J11 + F1 * J21) / det
        m = lam - 1.0
        dlam = float(np.clip(dlam, -0.5 * m, m))
        dy = float(np.clip(dy, -3.0, 3.0))
        lam += dlam
        y += dy
        if abs(dlam) < 1e-13 * lam and abs(dy) < 1e-13 * max(1.0, abs(y)):
            # stationary point of the iteration; accept only if residuals pass
            gs = GroundState(p, lam)
            uy = translate(u, y)
            xi = Field(grid, uy.values - gs.profile(grid).values)
            F1 = inner(xi, gs.profile_dx(grid))
            F2 = inner(xi, _second_direction(p, lam, grid, mode))
            r1 = abs(F1) / (u_norm * norm_l2(gs.profile_dx(grid)))
            r2 = abs(F2) / (u_norm * norm_l2(_second_direction(p, lam, grid, mode)))
            if max(r1, r2) < tol:
                return ModulationState(lam, y, xi, it + 1, (r1, r2), mode, True, det_scaled)
            break
        res = max(r1, r2)
        stall = stall + 1 if res >= 0.9 * prev_res else 0
        prev_res = res
        if stall >= 8:
            break

    state = ModulationState(lam, y, xi, max_iter, (r1, r2), mode, False, det_scaled)
    raise ModulationError(
        f"modulation did not converge (mode={mode}): residuals ({r1:.2e}, {r2:.2e}) "
        f"at lam={lam:.6g}, y={y:.6g}; the second orthogonality has no nearby root "
        f"when this residual plateaus",
        state,
    )


def cutoff_profile(R: float, grid: Grid) -> Field:
    """Odd C^3 cutoff: identity on [-R, R], quintic-smoothstep ramp on [R, 2R],
    constant 3R/2 beyond; slope stays in [0, 1] everywhere."""
    if 2.0 * R >= grid.half_width:
        raise ValueError(
            f"cutoff needs 2R < L, got R={R!r} on half-width {grid.half_width!r}"
        )
    x = grid.nodes
    ax = np.abs(x)
    t = np.clip((ax - R) / R, 0.0, 1.0)
    ramp = R + R * (t - (t ** 6 - 3.0 * t ** 5 + 2.5 * t ** 4))
    mag = np.where(ax <= R, ax, np.where(ax >= 2.0 * R, 1.5 * R, ramp))
    return Field(grid, np.sign(x) * mag)


@lru_cache(maxsize=32)
def _psi0_norm_sq(p: float) -> float:
    return normalized_profile_norm_sq(p)


def profile_norm_sq_closed(p: float, lam: float) -> float:
    """||phi_lam||^2 = lam^(1/2) (lam-1)^(2/p - 1/2) ||psi_0||^2."""
    return lam ** 0.5 * (lam - 1.0) ** (2.0 / p - 0.5) * _psi0_norm_sq(p)


def gamma_of_lambda(p: float, c: float, lam: float) -> float:
    """gamma(lam) = -lam E(phi_c) + lam^2/2 (||phi_lam||^2 - ||d_x phi_lam||^2),
    all norms in closed form. Vanishes to second order at lam = c."""
    n2c = profile_norm_sq_closed(p, c)
    e_c = (4.0 * c + p) / (2.0 * (p + 4.0)) * n2c
    n2l = profile_norm_sq_closed(p, lam)
    diff = (1.0 - p * (lam - 1.0) / ((p + 4.0) * lam)) * n2l
    return -lam * e_c + 0.5 * lam * lam * diff


def gamma_curvature_closed(p: float, c: float) -> float:
    """Closed-form gamma''(c) = (p - 4c) / (2p (c-1)^2) ||phi_c||^2."""
    return (p - 4.0 * c) / (2.0 * p * (c - 1.0) ** 2) * profile_norm_sq_closed(p, c)


@dataclass(frozen=True)
class VirialReport:
    t: float
    I1: float
    I2: float
    I: float
    beta: float
    gamma_of_lambda: float
    lam: float
    tube_distance: float
    kappa_residual: float
    mode: str
    y: float = 0.0


def _virial_frame(
    u: Field,
    t: float,
    p: float,
    c: float,
    R: float,
    E0: float,
    state: ModulationState,
) -> VirialReport:
    grid = u.grid
    lam, y = state.lam, state.y
    gs = GroundState(p, lam)
    xi = state.xi
    x = grid.nodes

    # cutoff recentered on the soliton, with periodic wrap of the offset
    offs = ((x - y + grid.half_width) % (2.0 * grid.half_width)) - grid.half_width
    axo = np.abs(offs)
    tpar = np.clip((axo - R) / R, 0.0, 1.0)
    ramp = R + R * (tpar - (tpar ** 6 - 3.0 * tpar ** 5 + 2.5 * tpar ** 4))
    cutv = np.sign(offs) * np.where(axo <= R, axo, np.where(axo >= 2.0 * R, 1.5 * R, ramp))

    dens = 0.5 * u.values ** 2 + np.abs(u.values) ** (p + 2.0) / (p + 2.0)
    I1 = quadrature(Field(grid, cutv * dens))

    B, D = coefficients(gs, grid)
    phi = gs.profile(grid).values
    dphi = gs.profile_dx(grid).values
    ddphi = gs.profile_dxx(grid).values
    helm = x * x * x * phi - (6.0 * x * phi + 6.0 * x * x * dphi + x * x * x * ddphi)
    I2 = D / B * inner(xi, Field(grid, helm))

    n2c = profile_norm_sq_closed(p, c)
    e_c = (4.0 * c + p) / (2.0 * (p + 4.0)) * n2c
    beta = -lam * (E0 - e_c)
    kres = inner(xi, kappa_closed_form(gs, grid)) / B
    return VirialReport(
        t, I1, I2, I1 + I2, beta, gamma_of_lambda(p, c, lam), lam,
        norm_h1(xi), kres, state.mode, y,
    )


def virial_monitor(
    traj: Trajectory,
    p: float,
    c: float,
    R: float,
    mode: str = MODE_FIT,
) -> list[VirialReport]:
    """Per-frame virial reports along a trajectory (modulation warm-started)."""
    E0 = float(traj.E_series[0])
    lam, y = c, 0.0
    out = []
    for t, u in zip(traj.times, traj.states):
        state = decompose(u, p, (lam, y), mode=mode)
        lam, y = state.lam, state.y
        out.append(_virial_frame(u, float(t), p, c, R, E0, state))
    return out


@dataclass(frozen=True)
class ResidualRecord:
    t: float
    lam: float
    y: float
    xi_h1: float
    y_dot: float
    lam_dot: float
    ratio_y: float
    ratio_lam: float
    cor_rhs: float
    defect: float


def parameter_residuals(
    traj: Trajectory, p: float, c: float, mode: str = MODE_FIT
) -> list[ResidualRecord]:
    """Finite-difference dynamics of (lam, y) with the translation-speed identity.

    The identity checked: y_dot - lam equals
    (1/B)<xi, hessian(d_x(x^3 phi_lam))> - (1/B) d/dt <xi, (1-d_xx)(x^3 phi_lam)>
    up to O(||xi||^2); both sides are assembled per frame.
    """
    states = []
    lam, y = c, 0.0
    for u in traj.states:
        st = decompose(u, p, (lam, y), mode=mode)
        lam, y = st.lam, st.y
        states.append(st)

    times = traj.times
    grid = traj.states[0].grid
    x = grid.nodes

    def pairing(st: ModulationState) -> float:
        gs = GroundState(p, st.lam)
        phi = gs.profile(grid).values
        dphi = gs.profile_dx(grid).values
        ddphi = gs.profile_dxx(grid).values
        helm = x * x * x * phi - (6.0 * x * phi + 6.0 * x * x * dphi + x * x * x * ddphi)
        return inner(st.xi, Field(grid, helm))

    g_series = [pairing(st) for st in states]
    out = []
    for i in range(1, len(states) - 1):
        dt2 = float(times[i + 1] - times[i - 1])
        y_dot = (states[i + 1].y - states[i - 1].y) / dt2
        lam_dot = (states[i + 1].lam - states[i - 1].lam) / dt2
        dgdt = (g_series[i + 1] - g_series[i - 1]) / dt2
        st = states[i]
        gs = GroundState(p, st.lam)
        B, _ = coefficients(gs, grid)
        rhs = (inner(st.xi, cubic_pair_image(gs, grid)) - dgdt) / B
        xin = norm_h1(st.xi)
        out.append(
            ResidualRecord(
                float(times[i]), st.lam, st.y, xin, y_dot, lam_dot,
                abs(y_dot - st.lam) / xin if xin > 0 else 0.0,
                abs(lam_dot) / xin if xin > 0 else 0.0,
                rhs, abs((y_dot - st.lam) - rhs),
            )
        )
    return out


@dataclass(frozen=True)
class ExperimentReport:
    p: float
    a: float
    c0: float
    frames: tuple
    tube_exit_time: float | None
    verdict: str
    mode: str
    positive_fraction: float
    negative_fraction: float
    lambda_shift_at_end: float
    beta_initial: float
    beta_linear_prediction: float

    def to_json(self) -> str:
        return json.dumps(
            {
                "p": self.p,
                "a": self.a,
                "c0": self.c0,
                "tube_exit_time": self.tube_exit_time,
                "verdict": self.verdict,
                "mode": self.mode,
                "positive_fraction": self.positive_fraction,
                "negative_fraction": self.negative_fraction,
                "lambda_shift_at_end": self.lambda_shift_at_end,
                "beta_initial": self.beta_initial,
                "beta_linear_prediction": self.beta_linear_prediction,
                "frames": [
                    {
                        "t": f.t, "I1": f.I1, "I2": f.I2, "I": f.I,
                        "beta": f.beta, "gamma": f.gamma_of_lambda,
                        "lambda": f.lam, "tube_distance": f.tube_distance,
                        "kappa_residual": f.kappa_residual,
                    }
                    for f in self.frames
                ],
            },
            indent=2,
        )

    def frames_csv(self) -> str:
        lines = ["t,lambda,y,xi_h1,I,I1,I2"]
        for f in self.frames:
            lines.append(
                f"{f.t!r},{f.lam!r},{f.y!r},{f.tube_distance!r},{f.I!r},{f.I1!r},{f.I2!r}"
            )
        return "\n".join(lines) + "\n"


def instability_experiment(
    p: float,
    a: float,
    grid: Grid,
    dt: float = 2e-3,
    t_end: float = 60.0,
    record_interval: float = 0.5,
    R: float | None = None,
    tube_fraction: float = 0.1,
) -> ExperimentReport:
    """Evolve u0 = (1-a) phi_c at the critical speed and monitor the virial budget.

    The specified kappa-orthogonal modulation is attempted on the initial
    frame; since it generically has no root for this data, the monitor falls
    back to the least-squares pair and says so in the report. The verdict
    states whether the increments of I have a definite sign over the in-tube
    frames (>= 95% one-signed).
    """
    if not 0.0 <= a <= 0.05:
        raise ValueError(f"perturbation size must lie in [0, 0.05], got {a!r}")
    if p <= 4:
        raise ValueError(f"experiment requires p > 4, got {p!r}")
    c = critical_speed(p)
    gs = GroundState(p, c)
    phi = gs.profile(grid)
    if R is None:
        R = 10.0 / gs.tail_rate
    u0 = Field(grid, (1.0 - a) * phi.values)
    record_every = max(1, int(round(record_interval / dt)))
    traj = evolve(u0, SimulationConfig(grid, p, dt, t_end, record_every, True))

    mode = MODE_KAPPA
    try:
        decompose(traj.states[0], p, (c, 0.0), mode=MODE_KAPPA)
    except ModulationError:
        mode = MODE_FIT

    E0 = float(traj.E_series[0])
    eps = tube_fraction * norm_h1(phi)
    frames = []
    lam, y = c, 0.0
    failed_at = None
    for t, u in zip(traj.times, traj.states):
        try:
            st = decompose(u, p, (lam, y), mode=mode)
        except ModulationError:
            failed_at = float(t)
            break
        lam, y = st.lam, st.y
        frames.append(_virial_frame(u, float(t), p, c, R, E0, st))

    if not frames:
        return ExperimentReport(
            p, a, c, (), None, "modulation-failed", mode, 0.0, 0.0, 0.0,
            float("nan"), float("nan"),
        )

    tube_exit = None
    in_tube_end = len(frames)
    for i, f in enumerate(frames):
        if f.tube_distance > eps:
            tube_exit = f.t
            in_tube_end = i
            break

    I_vals = np.array([f.I for f in frames[: max(in_tube_end, 2)]])
    dI = np.diff(I_vals)
    pos = float(np.mean(dI > 0)) if dI.size else 0.0
    neg = float(np.mean(dI < 0)) if dI.size else 0.0
    if failed_at is not None and len(frames) < 3:
        verdict = "modulation-failed"
    elif pos >= 0.95:
        verdict = "monotone-increasing"
    elif neg >= 0.95:
        verdict = "monotone-decreasing"
    else:
        verdict = "inconclusive"

    end_idx = in_tube_end - 1 if tube_exit is not None else len(frames) - 1
    n2c = quadrature(Field(grid, phi.values ** 2))
    beta_lin = a * c * (2.0 * (p + 2.0) * c - p) / (p + 4.0) * n2c
    return ExperimentReport(
        p, a, c, tuple(frames), tube_exit, verdict, mode, pos, neg,
        abs(frames[end_idx].lam - c), frames[0].beta, beta_lin,
    )
