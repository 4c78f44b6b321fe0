"""Case descriptions and their lowering onto the staggered grid."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import AirProperties, RoomGeometry

VELOCITY_RANGE = (0.05, 1.0)  # admissible supply speeds for an enabled slot, m/s

_CONFIG_CODES = {"left": 0, "right": 1, "dual": 2}


@dataclass(frozen=True)
class CaseSpec:
    """One boundary-condition scenario for the heated room.

    A slot velocity of exactly 0 disables that inlet (plain adiabatic wall);
    an enabled slot must lie in ``VELOCITY_RANGE``.
    """

    left_velocity: float
    right_velocity: float
    inlet_temperature: float = 10.0
    window_temperature: float = 35.0
    surface_heat: float = -200.0  # W per meter depth, per surface (floor, ceiling)

    def __post_init__(self):
        lo, hi = VELOCITY_RANGE
        for side, vel in (("left", self.left_velocity), ("right", self.right_velocity)):
            if vel != 0.0 and not (lo <= vel <= hi):
                raise ValueError(
                    f"{side} inlet velocity {vel} outside [{lo}, {hi}] (0 disables the slot)"
                )
        if self.left_velocity == 0.0 and self.right_velocity == 0.0:
            raise ValueError("at least one inlet must be enabled")

    @property
    def config(self) -> str:
        if self.left_velocity > 0.0 and self.right_velocity > 0.0:
            return "dual"
        return "left" if self.left_velocity > 0.0 else "right"

    @property
    def config_code(self) -> int:
        return _CONFIG_CODES[self.config]

    def label(self) -> str:
        return f"{self.config}_L{self.left_velocity:.2f}_R{self.right_velocity:.2f}"


@dataclass
class DiscretizedCase:
    """Boundary arrays and coefficients ready for the pressure-velocity solver.

    Velocity boundary arrays hold the prescribed normal component on each
    boundary face; tangential slip masks mark orifice segments where wall
    shear is dropped.  Temperature boundary handling is encoded per wall
    row/column: Dirichlet window segments, inflow temperatures, adiabatic
    elsewhere, plus a prescribed per-cell heat source on floor and ceiling.
    """

    nx: int
    ny: int
    h: float
    props: AirProperties
    buoyant: bool
    u_left: np.ndarray      # (ny,)  u at x=0 faces
    u_right: np.ndarray     # (ny,)  u at x=width faces
    v_bottom: np.ndarray    # (nx,)  v at y=0 faces
    v_top: np.ndarray       # (nx,)  v at y=height faces
    noslip_floor: np.ndarray    # (nx,) bool, shear for u along the floor
    noslip_ceiling: np.ndarray  # (nx,) bool
    noslip_left: np.ndarray     # (ny,) bool, shear for v along the left wall
    noslip_right: np.ndarray    # (ny,) bool
    window_left: np.ndarray     # (ny,) bool, Dirichlet T on left wall cells
    window_right: np.ndarray    # (ny,) bool
    wall_temperature: float
    inflow_temperature: float
    floor_source: np.ndarray    # (nx,) kinematic heat source per floor cell, K m^2/s
    ceiling_source: np.ndarray  # (nx,)
    spec: CaseSpec | None = None

    @property
    def total_inflow(self) -> float:
        """Volumetric inflow per meter depth, m^2/s."""
        q = float(np.sum(np.maximum(self.u_left, 0.0)) * self.h)
        q += float(np.sum(np.maximum(-self.u_right, 0.0)) * self.h)
        q += float(np.sum(np.maximum(self.v_bottom, 0.0)) * self.h)
        q += float(np.sum(np.maximum(-self.v_top, 0.0)) * self.h)
        return q


def build_case(
    spec: CaseSpec,
    geometry: RoomGeometry | None = None,
    props: AirProperties | None = None,
) -> DiscretizedCase:
    """Lower a heated-room scenario onto the staggered grid."""
    geo = geometry or RoomGeometry()
    pr = props or AirProperties()
    nx, ny, h = geo.nx, geo.ny, geo.h

    u_left = np.zeros(ny)
    u_right = np.zeros(ny)
    v_bottom = np.zeros(nx)
    v_top = np.zeros(nx)

    inlet = list(geo.inlet_rows())
    if spec.left_velocity > 0.0:
        u_left[inlet] = spec.left_velocity
    if spec.right_velocity > 0.0:
        u_right[inlet] = -spec.right_velocity

    # uniform extraction through the floor opening, balancing inflow exactly
    outlet = list(geo.outlet_cols())
    inflow = (spec.left_velocity + spec.right_velocity) * geo.inlet_height
    v_bottom[outlet] = -inflow / (len(outlet) * h)

    noslip_floor = np.ones(nx, dtype=bool)
    noslip_floor[outlet] = False
    noslip_left = np.ones(ny, dtype=bool)
    noslip_right = np.ones(ny, dtype=bool)
    if spec.left_velocity > 0.0:
        noslip_left[inlet] = False
    if spec.right_velocity > 0.0:
        noslip_right[inlet] = False

    window = np.zeros(ny, dtype=bool)
    window[list(geo.window_rows())] = True

    # -200 W per surface spread over its solid cells, in kinematic units
    floor_source = np.zeros(nx)
    solid = noslip_floor
    floor_source[solid] = spec.surface_heat / (pr.rho * pr.cp) / int(solid.sum())
    ceiling_source = np.full(nx, spec.surface_heat / (pr.rho * pr.cp) / nx)

    return DiscretizedCase(
        nx=nx, ny=ny, h=h, props=pr, buoyant=True,
        u_left=u_left, u_right=u_right, v_bottom=v_bottom, v_top=v_top,
        noslip_floor=noslip_floor, noslip_ceiling=np.ones(nx, dtype=bool),
        noslip_left=noslip_left, noslip_right=noslip_right,
        window_left=window, window_right=window.copy(),
        wall_temperature=spec.window_temperature,
        inflow_temperature=spec.inlet_temperature,
        floor_source=floor_source, ceiling_source=ceiling_source,
        spec=spec,
    )


def build_validation_case(
    inflow_velocity: float = 0.5,
    geometry: RoomGeometry | None = None,
    props: AirProperties | None = None,
) -> DiscretizedCase:
    """Isothermal wall-jet check case: top-left inlet, bottom-right outlet.

    Same enclosure, no windows, no heat sources, buoyancy off.  The supply
    jet attaches to the ceiling and a single large recirculation forms; the
    vertical profile of horizontal velocity is the quantity of interest.
    """
    geo = geometry or RoomGeometry()
    pr = props or AirProperties()
    nx, ny, h = geo.nx, geo.ny, geo.h

    u_left = np.zeros(ny)
    u_right = np.zeros(ny)
    inlet = list(geo.inlet_rows())
    u_left[inlet] = inflow_velocity

    n_out = len(inlet)
    u_right[:n_out] = inflow_velocity * len(inlet) / n_out  # bottom rows, outflow

    noslip_left = np.ones(ny, dtype=bool)
    noslip_left[inlet] = False
    noslip_right = np.ones(ny, dtype=bool)
    noslip_right[:n_out] = False

    return DiscretizedCase(
        nx=nx, ny=ny, h=h, props=pr, buoyant=False,
        u_left=u_left, u_right=u_right,
        v_bottom=np.zeros(nx), v_top=np.zeros(nx),
        noslip_floor=np.ones(nx, dtype=bool), noslip_ceiling=np.ones(nx, dtype=bool),
        noslip_left=noslip_left, noslip_right=noslip_right,
        window_left=np.zeros(ny, dtype=bool), window_right=np.zeros(ny, dtype=bool),
        wall_temperature=0.0, inflow_temperature=20.0,
        floor_source=np.zeros(nx), ceiling_source=np.zeros(nx),
        spec=None,
    )
