"""Point-mass 3-DOF aircraft model integrated with fixed-step RK4.

State is position (x, y, z), speed v, flight-path angle gamma and heading
phi.  Controls are a tangential load factor nx, a normal load factor nz and
a bank angle mu.  The model is deliberately scalar (math module, no arrays):
a single integration step is a few microseconds, which is what keeps
search-in-the-loop training affordable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

G = 9.8
"""Gravitational acceleration in m/s^2, shared by every model in the package."""

PHYSICS_DT = 0.02
"""Fixed integration step in seconds."""

V_FLOOR = 100.0
GAMMA_LIMIT = math.pi / 2 - 1e-6

NX_MIN, NX_MAX = -2.0, 2.0
NZ_MIN, NZ_MAX = 0.0, 8.0
MU_MIN, MU_MAX = -math.pi, math.pi


class DegenerateStateError(ValueError):
    """State lies outside the region where the equations of motion are defined."""


@dataclass(frozen=True, slots=True)
class AircraftState:
    """Aircraft state, or componentwise time derivatives of one."""

    x: float
    y: float
    z: float
    v: float
    gamma: float
    phi: float


@dataclass(frozen=True, slots=True)
class ControlInput:
    """Clamped control triple; build through :func:`clamp_controls`."""

    nx: float
    nz: float
    mu: float


def wrap_angle(a: float) -> float:
    """Reduce an angle to the interval (-pi, pi]."""
    r = math.remainder(a, math.tau)
    return math.pi if r == -math.pi else r


def clamp_controls(nx: float, nz: float, mu: float) -> ControlInput:
    """Clamp raw control values into the flight envelope.

    nx is limited to [-2, 2], nz to [0, 8] and mu to [-pi, pi].  Each
    component is clamped independently, so the mapping is idempotent and
    order preserving.  Non-finite inputs are rejected.
    """
    if not (math.isfinite(nx) and math.isfinite(nz) and math.isfinite(mu)):
        raise ValueError(f"non-finite control input ({nx}, {nz}, {mu})")
    return ControlInput(
        min(max(nx, NX_MIN), NX_MAX),
        min(max(nz, NZ_MIN), NZ_MAX),
        min(max(mu, MU_MIN), MU_MAX),
    )


def aircraft_derivatives(s: AircraftState, c: ControlInput) -> AircraftState:
    """Time derivatives of the aircraft state under constant controls.

    Raises DegenerateStateError when v is not positive or gamma is within
    numerical range of +-pi/2, where the heading equation blows up.
    """
    d = _derivatives(s.x, s.y, s.z, s.v, s.gamma, s.phi, c.nx, c.nz, c.mu)
    return AircraftState(*d)


def _derivatives(x, y, z, v, gamma, phi, nx, nz, mu):
    if v < 1e-6:
        raise DegenerateStateError(f"non-positive speed {v}")
    cg = math.cos(gamma)
    if abs(cg) < 1e-9:
        raise DegenerateStateError(f"flight-path angle {gamma} too close to vertical")
    sg = math.sin(gamma)
    dx = v * cg * math.cos(phi)
    dy = v * cg * math.sin(phi)
    dz = v * sg
    dv = G * (nx - sg)
    dgamma = (G / v) * (nz * math.cos(mu) - cg)
    dphi = (G / (v * cg)) * nz * math.sin(mu)
    return dx, dy, dz, dv, dgamma, dphi


def _stage_gamma(g: float) -> float:
    # RK4 stage states can poke past the vertical limit that the integrators
    # clip their OUTPUT to; stages are evaluated at the clipped angle so the
    # heading equation stays defined.  In-envelope stages pass through
    # untouched, bit for bit.
    if g > GAMMA_LIMIT:
        return GAMMA_LIMIT
    if g < -GAMMA_LIMIT:
        return -GAMMA_LIMIT
    return g


def rk4_step(s: AircraftState, c: ControlInput, dt: float = PHYSICS_DT) -> AircraftState:
    """Advance the state by one RK4 step with controls held constant.

    After integration the speed is floored at 100 m/s, gamma is clipped just
    inside +-pi/2 and phi is wrapped to (-pi, pi], so the returned state is
    always valid input for the next step.
    """
    if not dt > 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    nx, nz, mu = c.nx, c.nz, c.mu
    x, y, z, v, gamma, phi = s.x, s.y, s.z, s.v, s.gamma, s.phi

    k1 = _derivatives(x, y, z, v, gamma, phi, nx, nz, mu)
    h = dt / 2.0
    k2 = _derivatives(x + h * k1[0], y + h * k1[1], z + h * k1[2],
                      v + h * k1[3], _stage_gamma(gamma + h * k1[4]),
                      phi + h * k1[5], nx, nz, mu)
    k3 = _derivatives(x + h * k2[0], y + h * k2[1], z + h * k2[2],
                      v + h * k2[3], _stage_gamma(gamma + h * k2[4]),
                      phi + h * k2[5], nx, nz, mu)
    k4 = _derivatives(x + dt * k3[0], y + dt * k3[1], z + dt * k3[2],
                      v + dt * k3[3], _stage_gamma(gamma + dt * k3[4]),
                      phi + dt * k3[5], nx, nz, mu)

    sixth = dt / 6.0
    x += sixth * (k1[0] + 2.0 * (k2[0] + k3[0]) + k4[0])
    y += sixth * (k1[1] + 2.0 * (k2[1] + k3[1]) + k4[1])
    z += sixth * (k1[2] + 2.0 * (k2[2] + k3[2]) + k4[2])
    v += sixth * (k1[3] + 2.0 * (k2[3] + k3[3]) + k4[3])
    gamma += sixth * (k1[4] + 2.0 * (k2[4] + k3[4]) + k4[4])
    phi += sixth * (k1[5] + 2.0 * (k2[5] + k3[5]) + k4[5])

    if v < V_FLOOR:
        v = V_FLOOR
    if gamma > GAMMA_LIMIT:
        gamma = GAMMA_LIMIT
    elif gamma < -GAMMA_LIMIT:
        gamma = -GAMMA_LIMIT
    return AircraftState(x, y, z, v, gamma, wrap_angle(phi))


def velocity_vector(s: AircraftState) -> tuple[float, float, float]:
    """Inertial velocity components implied by (v, gamma, phi)."""
    cg = math.cos(s.gamma)
    return (s.v * cg * math.cos(s.phi),
            s.v * cg * math.sin(s.phi),
            s.v * math.sin(s.gamma))
