"""Room layout and boundary segments on the uniform cell grid.

The room is ``width`` x ``height`` meters, discretized into ``nx`` x ``ny``
square cells.  Cell (j, i) spans x in [i*h, (i+1)*h), y in [j*h, (j+1)*h),
with row j = 0 at the floor.  Scalar fields live at cell centers; the
normal velocity components live on the cell faces (staggered).

Boundary layout of the heated-room configuration:

- supply slots: the top ``inlet_height`` of the left and right walls,
  blowing horizontally into the room; a disabled slot is a plain wall
- glazing: ``window_height`` of each side wall below the slot, held at a
  fixed surface temperature
- extract opening: ``outlet_width`` on the floor, centered at
  ``outlet_center_x``; the outflow velocity is scaled so mass leaves at
  exactly the rate it enters
- floor and ceiling: no-slip surfaces with a prescribed total heat flux
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class RoomGeometry:
    width: float = 1.5
    height: float = 1.0
    nx: int = 150
    ny: int = 100
    inlet_height: float = 0.1
    window_height: float = 0.9
    outlet_width: float = 0.1
    outlet_center_x: float = 0.75

    def __post_init__(self):
        hx = self.width / self.nx
        hy = self.height / self.ny
        if abs(hx - hy) > 1e-12:
            raise ValueError(f"cells must be square, got {hx} x {hy}")
        if self.inlet_height + self.window_height > self.height + 1e-12:
            raise ValueError("inlet slot and window overflow the wall height")
        for name in ("inlet_height", "window_height", "outlet_width"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def h(self) -> float:
        return self.width / self.nx

    # --- index ranges (half-open) of the boundary segments

    def inlet_rows(self) -> range:
        j0 = round((self.height - self.inlet_height) / self.h)
        return range(j0, self.ny)

    def window_rows(self) -> range:
        return range(0, round(self.window_height / self.h))

    def outlet_cols(self) -> range:
        i0 = round((self.outlet_center_x - self.outlet_width / 2) / self.h)
        return range(i0, i0 + round(self.outlet_width / self.h))


@dataclass(frozen=True)
class AirProperties:
    """Working-fluid constants (dry air near 20 C) and effective transport.

    The turbulent exchange is modeled with constant effective diffusivities,
    a fixed multiple of the molecular values for momentum and heat alike.
    """

    nu: float = 1.516e-5        # kinematic viscosity, m^2/s
    alpha: float = 2.122e-5     # thermal diffusivity, m^2/s
    rho: float = 1.204          # density, kg/m^3
    cp: float = 1006.0          # specific heat, J/(kg K)
    beta: float = 3.4e-3        # thermal expansion, 1/K
    g: float = 9.81             # gravity, m/s^2
    eddy_factor: float = 50.0   # effective / molecular diffusivity
    t_ref: float = 22.5         # buoyancy reference temperature, C

    @property
    def nu_eff(self) -> float:
        return self.eddy_factor * self.nu

    @property
    def alpha_eff(self) -> float:
        return self.eddy_factor * self.alpha
