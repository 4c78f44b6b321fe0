"""Steady incompressible flow and heat transport on the staggered grid.

Pressure-velocity coupling follows the classic predictor/corrector scheme:
momentum equations are relaxed implicitly and swept with alternating-line
tridiagonal solves, the pressure-correction Poisson system is solved with
a sparse LU that is refactorized only when the momentum diagonals drift,
and temperature rides on the corrected velocities.  Convection is
first-order upwind, diffusion central, buoyancy enters the vertical
momentum balance through a linear density defect.

All equations are kinematic (divided by density); cells are square with
side ``h`` and unit depth, so face areas equal ``h`` and the diffusion
conductance per face is just the diffusivity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .cases import DiscretizedCase


class SolverError(RuntimeError):
    """Diverged or numerically broken run, with iteration diagnostics."""


@dataclass
class FlowState:
    """Converged (or last-iterate) fields of one case.

    ``u``/``v`` are the staggered face velocities; cell-centered versions
    and the speed magnitude are derived on demand.  Row j = 0 is the floor.
    """

    u: np.ndarray            # (ny, nx+1)
    v: np.ndarray            # (ny+1, nx)
    p: np.ndarray            # (ny, nx)
    temperature: np.ndarray  # (ny, nx)
    h: float
    iterations: int
    converged: bool
    residuals: dict[str, float]
    history: dict[str, list] = field(default_factory=dict, repr=False)

    @property
    def u_center(self) -> np.ndarray:
        return 0.5 * (self.u[:, :-1] + self.u[:, 1:])

    @property
    def v_center(self) -> np.ndarray:
        return 0.5 * (self.v[:-1, :] + self.v[1:, :])

    @property
    def magnitude(self) -> np.ndarray:
        return np.hypot(self.u_center, self.v_center)

    @property
    def final_residual(self) -> float:
        return max(self.residuals.values())


def _tdma(low: np.ndarray, diag: np.ndarray, up: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Thomas algorithm along the last axis, batched over the leading axes."""
    n = diag.shape[-1]
    cp = np.empty_like(diag)
    dp = np.empty_like(diag)
    cp[..., 0] = up[..., 0] / diag[..., 0]
    dp[..., 0] = rhs[..., 0] / diag[..., 0]
    for k in range(1, n):
        m = diag[..., k] - low[..., k] * cp[..., k - 1]
        cp[..., k] = up[..., k] / m
        dp[..., k] = (rhs[..., k] - low[..., k] * dp[..., k - 1]) / m
    x = np.empty_like(diag)
    x[..., -1] = dp[..., -1]
    for k in range(n - 2, -1, -1):
        x[..., k] = dp[..., k] - cp[..., k] * x[..., k + 1]
    return x


def _shift(phi: np.ndarray, axis: int, direction: int) -> np.ndarray:
    """Neighbor values along axis with zero fill where the link was folded out."""
    out = np.zeros_like(phi)
    if axis == 0:
        if direction > 0:
            out[:-1, :] = phi[1:, :]
        else:
            out[1:, :] = phi[:-1, :]
    else:
        if direction > 0:
            out[:, :-1] = phi[:, 1:]
        else:
            out[:, 1:] = phi[:, :-1]
    return out


def _line_solve(aP_r, aE, aW, aN, aS, b_r, phi, sweeps=2):
    """Alternating x/y line sweeps of aP_r*phi = sum(a_nb*phi_nb) + b_r."""
    for _ in range(sweeps):
        rhs = b_r + aN * _shift(phi, 0, +1) + aS * _shift(phi, 0, -1)
        phi = _tdma(-aW, aP_r, -aE, rhs)
        rhs = b_r + aE * _shift(phi, 1, +1) + aW * _shift(phi, 1, -1)
        phi = _tdma(-aS.T, aP_r.T, -aN.T, rhs.T).T
    return phi


def _residual(aP, aE, aW, aN, aS, b, phi) -> float:
    r = (
        aP * phi
        - aE * _shift(phi, 1, +1)
        - aW * _shift(phi, 1, -1)
        - aN * _shift(phi, 0, +1)
        - aS * _shift(phi, 0, -1)
        - b
    )
    return float(np.sum(np.abs(r)))


def _assemble_u(case: DiscretizedCase, u, v, p):
    """Coefficients for horizontal momentum at interior u nodes (ny, nx-1)."""
    h, nu = case.h, case.props.nu_eff
    nx = case.nx
    Fe = 0.5 * (u[:, 1:nx] + u[:, 2 : nx + 1]) * h
    Fw = 0.5 * (u[:, 0 : nx - 1] + u[:, 1:nx]) * h
    Fn = 0.5 * (v[1:, 0 : nx - 1] + v[1:, 1:nx]) * h
    Fs = 0.5 * (v[:-1, 0 : nx - 1] + v[:-1, 1:nx]) * h

    aE = nu + np.maximum(-Fe, 0.0)
    aW = nu + np.maximum(Fw, 0.0)
    aN = nu + np.maximum(-Fn, 0.0)
    aS = nu + np.maximum(Fs, 0.0)
    aP = (
        4.0 * nu
        + np.maximum(Fe, 0.0)
        + np.maximum(-Fw, 0.0)
        + np.maximum(Fn, 0.0)
        + np.maximum(-Fs, 0.0)
    )
    b = (p[:, 0 : nx - 1] - p[:, 1:nx]) * h

    # floor / ceiling: drop the phantom neighbor; wall shear acts at h/2
    floor_shear = case.noslip_floor[:-1] & case.noslip_floor[1:]
    aP[0, :] += np.where(floor_shear, 2.0 * nu, 0.0) - nu
    aS[0, :] = 0.0
    ceil_shear = case.noslip_ceiling[:-1] & case.noslip_ceiling[1:]
    aP[-1, :] += np.where(ceil_shear, 2.0 * nu, 0.0) - nu
    aN[-1, :] = 0.0

    # side columns: the neighbor is a prescribed boundary face velocity
    b[:, 0] += aW[:, 0] * u[:, 0]
    aW[:, 0] = 0.0
    b[:, -1] += aE[:, -1] * u[:, nx]
    aE[:, -1] = 0.0
    return aP, aE, aW, aN, aS, b


def _assemble_v(case: DiscretizedCase, u, v, p, t):
    """Coefficients for vertical momentum at interior v nodes (ny-1, nx)."""
    h, nu = case.h, case.props.nu_eff
    ny = case.ny
    Fe = 0.5 * (u[0 : ny - 1, 1:] + u[1:ny, 1:]) * h
    Fw = 0.5 * (u[0 : ny - 1, :-1] + u[1:ny, :-1]) * h
    Fn = 0.5 * (v[1:ny, :] + v[2 : ny + 1, :]) * h
    Fs = 0.5 * (v[0 : ny - 1, :] + v[1:ny, :]) * h

    aE = nu + np.maximum(-Fe, 0.0)
    aW = nu + np.maximum(Fw, 0.0)
    aN = nu + np.maximum(-Fn, 0.0)
    aS = nu + np.maximum(Fs, 0.0)
    aP = (
        4.0 * nu
        + np.maximum(Fe, 0.0)
        + np.maximum(-Fw, 0.0)
        + np.maximum(Fn, 0.0)
        + np.maximum(-Fs, 0.0)
    )
    b = (p[0 : ny - 1, :] - p[1:ny, :]) * h
    if case.buoyant:
        pr = case.props
        t_face = 0.5 * (t[0 : ny - 1, :] + t[1:ny, :])
        b += pr.g * pr.beta * (t_face - pr.t_ref) * h * h

    left_shear = case.noslip_left[:-1] & case.noslip_left[1:]
    aP[:, 0] += np.where(left_shear, 2.0 * nu, 0.0) - nu
    aW[:, 0] = 0.0
    right_shear = case.noslip_right[:-1] & case.noslip_right[1:]
    aP[:, -1] += np.where(right_shear, 2.0 * nu, 0.0) - nu
    aE[:, -1] = 0.0

    b[0, :] += aS[0, :] * v[0, :]
    aS[0, :] = 0.0
    b[-1, :] += aN[-1, :] * v[ny, :]
    aN[-1, :] = 0.0
    return aP, aE, aW, aN, aS, b


def _assemble_t(case: DiscretizedCase, u, v, t):
    """Coefficients for the temperature equation at cells (ny, nx)."""
    h, al = case.h, case.props.alpha_eff
    Fe = u[:, 1:] * h
    Fw = u[:, :-1] * h
    Fn = v[1:, :] * h
    Fs = v[:-1, :] * h

    aE = al + np.maximum(-Fe, 0.0)
    aW = al + np.maximum(Fw, 0.0)
    aN = al + np.maximum(-Fn, 0.0)
    aS = al + np.maximum(Fs, 0.0)
    aP = (
        4.0 * al
        + np.maximum(Fe, 0.0)
        + np.maximum(-Fw, 0.0)
        + np.maximum(Fn, 0.0)
        + np.maximum(-Fs, 0.0)
    )
    b = np.zeros((case.ny, case.nx))
    tw = case.wall_temperature
    tin = case.inflow_temperature

    # west wall: glazing is Dirichlet at h/2, an open slot advects supply air in
    aP[:, 0] += np.where(case.window_left, 2.0 * al, 0.0) - al
    b[:, 0] += np.where(case.window_left, 2.0 * al * tw, 0.0)
    b[:, 0] += np.maximum(Fw[:, 0], 0.0) * tin
    aW[:, 0] = 0.0

    aP[:, -1] += np.where(case.window_right, 2.0 * al, 0.0) - al
    b[:, -1] += np.where(case.window_right, 2.0 * al * tw, 0.0)
    b[:, -1] += np.maximum(-Fe[:, -1], 0.0) * tin
    aE[:, -1] = 0.0

    # floor / ceiling: prescribed heat flux on solid cells, advection at openings
    aP[0, :] -= al
    b[0, :] += case.floor_source + np.maximum(Fs[0, :], 0.0) * tin
    aS[0, :] = 0.0
    aP[-1, :] -= al
    b[-1, :] += case.ceiling_source + np.maximum(-Fn[-1, :], 0.0) * tin
    aN[-1, :] = 0.0
    return aP, aE, aW, aN, aS, b


class _PressureSolver:
    """Sparse LU for the correction Poisson system, refactored lazily.

    The matrix coefficients are face mobilities h/aP; a stale factorization
    still yields a valid correction direction (the corrector vanishes at
    convergence), so refactorization only happens when mobilities drift
    more than ``drift_tol`` since the last factorization.
    """

    def __init__(self, ny: int, nx: int, h: float, drift_tol: float = 0.02):
        self.ny, self.nx = ny, nx
        self.h = h
        self.drift_tol = drift_tol
        self._lu = None
        self._du_ref = None
        self._dv_ref = None

    def _needs_refactor(self, du, dv) -> bool:
        if self._lu is None:
            return True
        rel_u = np.max(np.abs(du - self._du_ref) / (np.abs(self._du_ref) + 1e-300))
        rel_v = np.max(np.abs(dv - self._dv_ref) / (np.abs(self._dv_ref) + 1e-300))
        return max(rel_u, rel_v) > self.drift_tol

    def solve(self, du: np.ndarray, dv: np.ndarray, rhs: np.ndarray) -> np.ndarray:
        ny, nx = self.ny, self.nx
        if self._needs_refactor(du, dv):
            h_e = np.zeros((ny, nx))
            h_w = np.zeros((ny, nx))
            h_n = np.zeros((ny, nx))
            h_s = np.zeros((ny, nx))
            h_e[:, : nx - 1] = self.h * du
            h_w[:, 1:] = self.h * du
            h_n[: ny - 1, :] = self.h * dv
            h_s[1:, :] = self.h * dv
            diag = h_e + h_w + h_n + h_s
            # gauge: pin the corner cell's correction to zero
            diag.flat[0] = 1.0
            h_e.flat[0] = 0.0
            h_n.flat[0] = 0.0
            mat = sp.diags(
                [
                    diag.ravel(),
                    -h_e.ravel()[:-1],
                    -h_w.ravel()[1:],
                    -h_n.ravel()[:-nx],
                    -h_s.ravel()[nx:],
                ],
                [0, 1, -1, nx, -nx],
                format="csc",
            )
            self._lu = splu(mat)
            self._du_ref = du.copy()
            self._dv_ref = dv.copy()
        r = rhs.copy()
        r.flat[0] = 0.0
        return self._lu.solve(r.ravel()).reshape(ny, nx)


def solve_steady(
    case: DiscretizedCase,
    tolerance: float = 1e-5,
    max_iterations: int = 20000,
    relax_velocity: float = 0.7,
    relax_pressure: float = 0.3,
    relax_temperature: float = 0.8,
    keep_history: bool = False,
    raise_on_limit: bool = False,
) -> FlowState:
    """Iterate the segregated solver to a steady state.

    Convergence requires every scaled residual (mass, both momentum
    components, energy for buoyant cases) to drop below ``tolerance``.
    Non-finite fields raise :class:`SolverError` immediately; hitting
    ``max_iterations`` returns the unconverged state unless
    ``raise_on_limit`` is set.
    """
    nx, ny, h = case.nx, case.ny, case.h
    u = np.zeros((ny, nx + 1))
    v = np.zeros((ny + 1, nx))
    u[:, 0] = case.u_left
    u[:, nx] = case.u_right
    v[0, :] = case.v_bottom
    v[ny, :] = case.v_top
    p = np.zeros((ny, nx))
    t = np.full((ny, nx), case.props.t_ref if case.buoyant else case.inflow_temperature)

    q_in = case.total_inflow
    if q_in <= 0:
        raise SolverError("case has no inflow")
    u_ref = max(
        float(np.max(np.abs(case.u_left))),
        float(np.max(np.abs(case.u_right))),
        float(np.max(np.abs(case.v_bottom))),
        float(np.max(np.abs(case.v_top))),
    )
    scale_mom = q_in * u_ref
    pr = case.props
    scale_t = q_in * max(abs(case.wall_temperature - case.inflow_temperature), 1.0) + (
        abs(np.sum(case.floor_source)) + abs(np.sum(case.ceiling_source))
    )

    psolver = _PressureSolver(ny, nx, h)
    a_uv = relax_velocity
    history: dict[str, list] = {"mass": [], "u": [], "v": [], "t": []}
    residuals = {"mass": np.inf, "u": np.inf, "v": np.inf, "t": np.inf}

    for it in range(1, max_iterations + 1):
        # horizontal momentum predictor
        aP, aE, aW, aN, aS, b = _assemble_u(case, u, v, p)
        residuals["u"] = _residual(aP, aE, aW, aN, aS, b, u[:, 1:nx]) / scale_mom
        aP_r = aP / a_uv
        b_r = b + (aP_r - aP) * u[:, 1:nx]
        u[:, 1:nx] = _line_solve(aP_r, aE, aW, aN, aS, b_r, u[:, 1:nx])
        du = h / aP_r

        # vertical momentum predictor
        aP, aE, aW, aN, aS, b = _assemble_v(case, u, v, p, t)
        residuals["v"] = _residual(aP, aE, aW, aN, aS, b, v[1:ny, :]) / scale_mom
        aP_r = aP / a_uv
        b_r = b + (aP_r - aP) * v[1:ny, :]
        v[1:ny, :] = _line_solve(aP_r, aE, aW, aN, aS, b_r, v[1:ny, :])
        dv = h / aP_r

        # pressure correction from the continuity defect of the predictor
        m_out = (u[:, 1:] - u[:, :-1] + v[1:, :] - v[:-1, :]) * h
        residuals["mass"] = float(np.sum(np.abs(m_out))) / q_in
        pc = psolver.solve(du, dv, -m_out)
        u[:, 1:nx] += du * (pc[:, : nx - 1] - pc[:, 1:])
        v[1:ny, :] += dv * (pc[: ny - 1, :] - pc[1:, :])
        p += relax_pressure * pc

        # energy transport on the corrected velocities
        if case.buoyant:
            aP, aE, aW, aN, aS, b = _assemble_t(case, u, v, t)
            residuals["t"] = _residual(aP, aE, aW, aN, aS, b, t) / scale_t
            aP_r = aP / relax_temperature
            b_r = b + (aP_r - aP) * t
            t = _line_solve(aP_r, aE, aW, aN, aS, b_r, t)
        else:
            residuals["t"] = 0.0

        if keep_history:
            for k in history:
                history[k].append(residuals[k])

        worst = max(residuals.values())
        if not np.isfinite(worst):
            raise SolverError(f"diverged at iteration {it}: residuals {residuals}")
        if it >= 3 and worst < tolerance:
            return FlowState(u, v, p, t, h, it, True, dict(residuals), history)

    if raise_on_limit:
        raise SolverError(
            f"did not converge in {max_iterations} iterations; residuals {residuals}"
        )
    return FlowState(u, v, p, t, h, max_iterations, False, dict(residuals), history)
