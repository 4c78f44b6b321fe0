"""Post-processing of converged flow fields."""

from __future__ import annotations

import numpy as np

from .cases import DiscretizedCase
from .simple import FlowState


def extract_profile(state: FlowState, x: float) -> tuple[np.ndarray, np.ndarray]:
    """Vertical profile of the horizontal velocity at the cell-center column
    nearest to ``x`` (ties resolve to the lower index; ``x=0`` gives the
    leftmost column).  Returns (y_centers, u_values), floor first."""
    uc = state.u_center
    ny, nx = uc.shape
    centers = (np.arange(nx) + 0.5) * state.h
    col = int(np.argmin(np.abs(centers - x)))
    y = (np.arange(ny) + 0.5) * state.h
    return y, uc[:, col].copy()


def mass_imbalance(state: FlowState, case: DiscretizedCase) -> float:
    """Net boundary volume flux relative to the total inflow."""
    h = state.h
    net = (
        np.sum(state.u[:, 0]) - np.sum(state.u[:, -1])
        + np.sum(state.v[0, :]) - np.sum(state.v[-1, :])
    ) * h
    return float(abs(net) / case.total_inflow)


def energy_balance(state: FlowState, case: DiscretizedCase) -> dict[str, float]:
    """Wall/opening heat budget in watts per meter depth.

    Datum is the supply temperature, so the supply stream carries zero
    enthalpy and the extract stream carries the whole surplus.  At discrete
    convergence the glazing gain plus the surface fluxes equals the
    advected extract term; ``relative_imbalance`` is the defect scaled by
    the largest single term.
    """
    pr = case.props
    rho_cp = pr.rho * pr.cp
    al = pr.alpha_eff
    t = state.temperature
    tw = case.wall_temperature
    tin = case.inflow_temperature

    q_win = 2.0 * al * np.sum(np.where(case.window_left, tw - t[:, 0], 0.0))
    q_win += 2.0 * al * np.sum(np.where(case.window_right, tw - t[:, -1], 0.0))
    q_win *= rho_cp

    q_surf = rho_cp * (float(np.sum(case.floor_source)) + float(np.sum(case.ceiling_source)))

    h = state.h
    out_flux = np.maximum(-state.v[0, :], 0.0) * h          # volumetric, per floor cell
    q_out = rho_cp * float(np.sum(out_flux * (t[0, :] - tin)))
    out_flux_top = np.maximum(state.v[-1, :], 0.0) * h
    q_out += rho_cp * float(np.sum(out_flux_top * (t[-1, :] - tin)))
    q_out += rho_cp * float(np.sum(np.maximum(-state.u[:, 0], 0.0) * h * (t[:, 0] - tin)))
    q_out += rho_cp * float(np.sum(np.maximum(state.u[:, -1], 0.0) * h * (t[:, -1] - tin)))

    defect = q_win + q_surf - q_out
    scale = max(abs(q_win), abs(q_surf), abs(q_out), 1e-12)
    return {
        "windows_w": float(q_win),
        "surfaces_w": float(q_surf),
        "extract_w": float(q_out),
        "defect_w": float(defect),
        "relative_imbalance": float(abs(defect) / scale),
    }
