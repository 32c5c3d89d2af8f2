"""Domain types, grids, and initial states for the 1-D two-phase flow solver.

All fields live at cell centers of a uniform grid in the Lagrangian mass
coordinate, truncated to [-L, L] with two ghost layers per side holding the
far-field state (v, u, theta) = (1, 0, 1) and phi = +-1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

N_GHOST = 2
FARFIELD_V = 1.0
FARFIELD_U = 0.0
FARFIELD_THETA = 1.0

# closed-form initial fields must be this close to the far-field constants
# at |x| = L, so the Dirichlet ghost values introduce no visible kink
FARFIELD_REACH_TOL = 1e-12


class PositivityError(RuntimeError):
    """Specific volume or temperature at or below the positivity floor.

    Raised instead of clamping: a violation means the run is under-resolved
    or the scheme misbehaves, and has to be surfaced.
    """

    def __init__(self, field, cell, value, t, floor):
        self.field = field
        self.cell = cell
        self.value = float(value)
        self.t = float(t)
        self.floor = float(floor)
        super().__init__(
            f"{field} = {self.value:.6e} at cell {cell} (t = {self.t:.6e}) "
            f"is at or below the positivity floor {self.floor:.1e}"
        )


@dataclass(frozen=True)
class SimParams:
    """Physical and numerical constants.

    The defaults nu = gas_R = c_v = kappa_tilde = 1 are the normalized
    coefficients the governing equations are written in; epsilon is the
    interface-thickness parameter and beta the conductivity exponent in
    kappa(theta) = kappa_tilde * theta**beta.
    """

    epsilon: float = 1.0
    beta: float = 1.0
    nu: float = 1.0
    gas_R: float = 1.0
    c_v: float = 1.0
    kappa_tilde: float = 1.0
    cfl: float = 0.4
    t_final: float = 1.0
    positivity_floor: float = 1e-10

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        if self.beta <= 0:
            raise ValueError(f"beta must be > 0, got {self.beta}")
        for name in ("nu", "gas_R", "c_v", "kappa_tilde"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        if not 0.0 < self.cfl < 1.0:
            raise ValueError(f"cfl must be in (0, 1), got {self.cfl}")
        if self.positivity_floor <= 0:
            raise ValueError(f"positivity_floor must be > 0, got {self.positivity_floor}")


@dataclass(frozen=True)
class MassGrid:
    """Uniform cell-centered grid on [-L, L] in the mass coordinate."""

    half_width: float
    n_cells: int
    dx: float
    n_ghost: int = N_GHOST

    @property
    def n_total(self):
        return self.n_cells + 2 * self.n_ghost

    @property
    def interior(self):
        """Slice selecting the interior cells of a ghost-padded array."""
        return slice(self.n_ghost, self.n_ghost + self.n_cells)

    @cached_property
    def x(self):
        """Interior cell centers x_i = -L + (i + 1/2) dx."""
        i = np.arange(self.n_cells)
        return -self.half_width + (i + 0.5) * self.dx

    @cached_property
    def x_with_ghosts(self):
        i = np.arange(-self.n_ghost, self.n_cells + self.n_ghost)
        return -self.half_width + (i + 0.5) * self.dx


def make_grid(half_width, n_cells):
    """Build a uniform MassGrid; rejects n_cells odd or < 8 and L <= 0."""
    if half_width <= 0:
        raise ValueError(f"half_width must be > 0, got {half_width}")
    if n_cells < 8 or n_cells % 2 != 0:
        raise ValueError(f"n_cells must be even and >= 8, got {n_cells}")
    return MassGrid(half_width=float(half_width), n_cells=int(n_cells),
                    dx=2.0 * half_width / n_cells)


@dataclass(frozen=True)
class BoundaryConfig:
    """Far-field phase values; each must be exactly +1 or -1."""

    phi_left: float
    phi_right: float

    def __post_init__(self):
        for name in ("phi_left", "phi_right"):
            if abs(getattr(self, name)) != 1.0:
                raise ValueError(f"{name} must be +1 or -1, got {getattr(self, name)}")


@dataclass
class FlowState:
    """Cell-centered fields at one time level, ghost layers included.

    G accumulates the per-cell time integral of theta/v + (eps/2)(phi_x/v)^2
    from the start of the run; its far-field value is t, which apply_bc
    maintains in the ghost cells.
    """

    grid: MassGrid
    t: float
    v: np.ndarray
    u: np.ndarray
    theta: np.ndarray
    phi: np.ndarray
    G: np.ndarray

    def copy(self):
        return FlowState(self.grid, self.t, self.v.copy(), self.u.copy(),
                         self.theta.copy(), self.phi.copy(), self.G.copy())

    def interior(self, name):
        return getattr(self, name)[self.grid.interior]


def apply_bc(state, bc):
    """Write the far-field values into both ghost layers, in place."""
    g = state.grid.n_ghost
    for arr, val in ((state.v, FARFIELD_V), (state.u, FARFIELD_U),
                     (state.theta, FARFIELD_THETA)):
        arr[:g] = val
        arr[-g:] = val
    state.phi[:g] = bc.phi_left
    state.phi[-g:] = bc.phi_right
    state.G[:g] = state.t
    state.G[-g:] = state.t
    return state


def _blank_state(grid, t=0.0):
    m = grid.n_total
    return FlowState(grid, float(t), np.empty(m), np.empty(m), np.empty(m),
                     np.empty(m), np.zeros(m))


def state_from_fields(grid, bc, v, u, theta, phi, t=0.0, params=None):
    """Assemble a FlowState from interior field arrays; G starts at zero.

    Positivity of v and theta is checked when params is given.
    """
    state = _blank_state(grid, t)
    s = grid.interior
    for name, arr in (("v", v), ("u", u), ("theta", theta), ("phi", phi)):
        arr = np.asarray(arr, dtype=float)
        if arr.shape != (grid.n_cells,):
            raise ValueError(f"{name} must have {grid.n_cells} interior values, "
                             f"got shape {arr.shape}")
        getattr(state, name)[s] = arr
    apply_bc(state, bc)
    if params is not None:
        for name in ("v", "theta"):
            vals = state.interior(name)
            j = int(np.argmin(vals))
            if vals[j] <= params.positivity_floor:
                raise PositivityError(name, j, vals[j], t, params.positivity_floor)
    return state


def equilibrium_state(grid, bc):
    """The constant far-field state; requires phi_left == phi_right."""
    if bc.phi_left != bc.phi_right:
        raise ValueError("equilibrium needs phi_left == phi_right; "
                         f"got {bc.phi_left} and {bc.phi_right}")
    state = _blank_state(grid)
    state.v[:] = FARFIELD_V
    state.u[:] = FARFIELD_U
    state.theta[:] = FARFIELD_THETA
    state.phi[:] = bc.phi_left
    return state


def _check_reach(name, gap):
    if gap > FARFIELD_REACH_TOL:
        raise ValueError(
            f"{name} misses its far-field value by {gap:.3e} at |x| = L "
            f"(limit {FARFIELD_REACH_TOL:.0e}); narrow the profile or enlarge L")


def _gaussian_bump(x, amp, width, center):
    return amp * np.exp(-(((x - center) / width) ** 2))


def interface_initial_state(grid, params, bc, phi_width=1.0,
                            v_amp=0.0, v_width=2.0, v_center=0.0,
                            u_amp=0.0, u_width=2.0, u_center=0.0,
                            theta_amp=0.0, theta_width=2.0, theta_center=0.0):
    """Smooth initial data: tanh phase profile plus optional Gaussian bumps.

    phi0 connects phi_left to phi_right over the given width; v0, u0, theta0
    are the far-field constants plus bumps amp * exp(-((x-c)/w)^2).  Every
    profile must come back to its far-field value at |x| = L to within 1e-12,
    and v0, theta0 must stay above the positivity floor.
    """
    if phi_width <= 0:
        raise ValueError(f"phi_width must be > 0, got {phi_width}")
    for name, w in (("v", v_width), ("u", u_width), ("theta", theta_width)):
        if w <= 0:
            raise ValueError(f"{name}_width must be > 0, got {w}")

    L = grid.half_width
    x = grid.x
    mid = 0.5 * (bc.phi_right + bc.phi_left)
    dphi = 0.5 * (bc.phi_right - bc.phi_left)
    phi = mid + dphi * np.tanh(x / phi_width)
    v = FARFIELD_V + _gaussian_bump(x, v_amp, v_width, v_center)
    u = FARFIELD_U + _gaussian_bump(x, u_amp, u_width, u_center)
    theta = FARFIELD_THETA + _gaussian_bump(x, theta_amp, theta_width, theta_center)

    if dphi != 0.0:
        _check_reach("phi", abs(dphi) * (1.0 - math.tanh(L / phi_width)))
    for name, amp, w, c in (("v", v_amp, v_width, v_center),
                            ("u", u_amp, u_width, u_center),
                            ("theta", theta_amp, theta_width, theta_center)):
        if amp != 0.0:
            gap = abs(amp) * math.exp(-(((L - abs(c)) / w) ** 2))
            _check_reach(name, gap)

    return state_from_fields(grid, bc, v, u, theta, phi, t=0.0, params=params)
