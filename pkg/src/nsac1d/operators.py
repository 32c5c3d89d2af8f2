"""Second-order spatial discretization of the governing system.

Grouping of the momentum flux: the capillary stress joins the thermal
pressure in a single effective pressure p_eff = R*theta/v + (eps/2)(phi_x/v)^2
which is differenced once, so the discrete momentum sum telescopes to the
two outer faces.  All stencils assume populated ghost layers; outputs are
full-length arrays whose outermost entry on each side is zero-filled and
must not be read.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import PositivityError, apply_bc


def d1_center(f, dx):
    """Central first derivative (f_{i+1} - f_{i-1}) / (2 dx).

    Identical to the divided difference of face averages, so interior sums
    telescope to the outer face values.
    """
    out = np.zeros_like(f)
    out[1:-1] = (f[2:] - f[:-2]) / (2.0 * dx)
    return out


def face_average(c):
    """Arithmetic mean of adjacent cell values; entry k sits between cells k, k+1."""
    return 0.5 * (c[:-1] + c[1:])


def diffusion_flux(a_face, f, dx):
    """Conservative flux form of (a f_x)_x with face coefficients a_face."""
    out = np.zeros_like(f)
    out[1:-1] = (a_face[1:] * (f[2:] - f[1:-1])
                 - a_face[:-1] * (f[1:-1] - f[:-2])) / dx**2
    return out


def chemical_potential(state, params):
    """mu = (1/eps)(phi^3 - phi) - eps ((phi_x / v)_x), flux-form laplacian.

    Shares the diffusion stencil with the phase equation so phi_t = -v mu
    holds exactly at the discrete level.
    """
    eps = params.epsilon
    lap = diffusion_flux(face_average(1.0 / state.v), state.phi, state.grid.dx)
    return (state.phi**3 - state.phi) / eps - eps * lap


def effective_pressure(state, params):
    """p_eff = R*theta/v + (eps/2)(phi_x/v)^2 on the ghost-padded array."""
    phi_x = d1_center(state.phi, state.grid.dx)
    return (params.gas_R * state.theta / state.v
            + 0.5 * params.epsilon * (phi_x / state.v) ** 2)


def check_positive(state, params):
    """Hard error naming cell and field if v or theta is at/below the floor."""
    for name in ("v", "theta"):
        vals = state.interior(name)
        j = int(np.argmin(vals))
        if vals[j] <= params.positivity_floor:
            raise PositivityError(name, j, vals[j], state.t, params.positivity_floor)


@dataclass
class DerivedFields:
    """Per-state derived quantities on the interior cells (faces: N+1 values)."""

    mu: np.ndarray
    p_eff: np.ndarray
    phi_x_over_v: np.ndarray
    kappa_face: np.ndarray
    visc_face: np.ndarray
    u_x: np.ndarray


def derived_fields(state, params):
    grid = state.grid
    s = grid.interior
    faces = slice(grid.n_ghost - 1, grid.n_ghost + grid.n_cells)
    phi_x = d1_center(state.phi, grid.dx)
    kappa = params.kappa_tilde * state.theta**params.beta / state.v
    return DerivedFields(
        mu=chemical_potential(state, params)[s],
        p_eff=effective_pressure(state, params)[s],
        phi_x_over_v=(phi_x / state.v)[s],
        kappa_face=face_average(kappa)[faces],
        visc_face=face_average(params.nu / state.v)[faces],
        u_x=d1_center(state.u, grid.dx)[s],
    )


@dataclass
class Rhs:
    """Interior time derivatives of (v, u, theta, phi) and the G accumulator."""

    dv: np.ndarray
    du: np.ndarray
    dtheta: np.ndarray
    dphi: np.ndarray
    dG: np.ndarray


def semi_discrete_rhs(state, params, bc):
    """Full second-order semi-discrete right-hand side.

    dv     = u_x
    du     = -(p_eff)_x + nu (u_x / v)_x
    dphi   = -v mu
    dtheta = (-R theta/v u_x + kappa_tilde (theta^beta theta_x / v)_x
              + nu u_x^2 / v + v mu^2) / c_v
    dG     = theta/v + (eps/2)(phi_x/v)^2

    Refreshes the ghost layers from bc first, then fails hard on any
    positivity violation.  With the defaults nu = R = c_v = kappa_tilde = 1
    these are exactly the normalized equations.
    """
    apply_bc(state, bc)
    check_positive(state, params)

    grid = state.grid
    dx = grid.dx
    s = grid.interior
    v, u, theta, phi = state.v, state.u, state.theta, state.phi
    eps = params.epsilon

    u_x = d1_center(u, dx)
    phi_x = d1_center(phi, dx)
    mu = chemical_potential(state, params)
    p_eff = params.gas_R * theta / v + 0.5 * eps * (phi_x / v) ** 2

    visc = diffusion_flux(face_average(params.nu / v), u, dx)
    conduct = diffusion_flux(
        face_average(params.kappa_tilde * theta**params.beta / v), theta, dx)

    dv = u_x[s]
    du = -d1_center(p_eff, dx)[s] + visc[s]
    dphi = -(v * mu)[s]
    dtheta = (-(params.gas_R * theta / v)[s] * u_x[s] + conduct[s]
              + params.nu * u_x[s] ** 2 / v[s] + (v * mu**2)[s]) / params.c_v
    dG = (theta / v)[s] + 0.5 * eps * (phi_x[s] / v[s]) ** 2
    return Rhs(dv=dv, du=du, dtheta=dtheta, dphi=dphi, dG=dG)
