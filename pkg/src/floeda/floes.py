"""Free-drifting floe dynamics on the doubly periodic square domain.

Floes are cylinders (radius r, thickness h, mass rho*pi*r^2*h) pushed by
quadratic ocean drag; there is no floe-floe interaction, so the state is a
plain struct-of-arrays advanced with data-parallel updates.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from floeda import _kernels
from floeda.fields import TWO_PI
from floeda.ocean import ModeState, ou_step_factors

__all__ = [
    "FloeState",
    "floe_mass",
    "drag_force",
    "step_floes",
    "sample_radii",
    "wrap_positions",
    "wrap_diff",
]


def wrap_positions(x: np.ndarray) -> np.ndarray:
    return np.mod(x, TWO_PI)


def wrap_diff(d: np.ndarray) -> np.ndarray:
    """Minimum-image difference on the torus, wrapped into (-pi, pi]."""
    w = np.mod(np.asarray(d, dtype=np.float64) + np.pi, TWO_PI) - np.pi
    return np.where(w == -np.pi, np.pi, w)


@dataclass
class FloeState:
    """Positions, velocities, radii, masses and drag coefficients of L floes."""

    x: np.ndarray  # (L, 2), wrapped into [0, 2pi)
    v: np.ndarray  # (L, 2)
    r: np.ndarray  # (L,)
    m: np.ndarray  # (L,)
    alpha: np.ndarray  # (L,)
    time: float = 0.0

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=np.float64)
        self.v = np.asarray(self.v, dtype=np.float64)
        self.r = np.asarray(self.r, dtype=np.float64)
        self.m = np.asarray(self.m, dtype=np.float64)
        self.alpha = np.asarray(self.alpha, dtype=np.float64)
        L = self.x.shape[0]
        if self.x.shape != (L, 2) or self.v.shape != (L, 2):
            raise ValueError("x and v must be (L, 2) arrays")
        for name in ("r", "m", "alpha"):
            if getattr(self, name).shape != (L,):
                raise ValueError(f"{name} must be an (L,) array")
        if np.any(self.r <= 0) or np.any(self.m <= 0):
            raise ValueError("radii and masses must be positive")

    @property
    def count(self) -> int:
        return self.x.shape[0]


def floe_mass(rho, r, h):
    """Cylinder mass rho * pi * r^2 * h (scalars or arrays)."""
    rho, r, h = np.asarray(rho, float), np.asarray(r, float), np.asarray(h, float)
    if np.any(rho <= 0) or np.any(r <= 0) or np.any(h <= 0):
        raise ValueError("density, radius and thickness must be positive")
    return rho * np.pi * r**2 * h


def drag_force(u_o: np.ndarray, v: np.ndarray, alpha) -> np.ndarray:
    """Quadratic ocean drag alpha * (u_o - v) * |u_o - v|."""
    du = np.asarray(u_o, float) - np.asarray(v, float)
    speed = np.linalg.norm(du, axis=-1, keepdims=True)
    alpha = np.asarray(alpha, float)
    if alpha.ndim:
        alpha = alpha[..., None]
    return alpha * du * speed


def _rk4_step(state: FloeState, ocean: ModeState, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """Classical RK4 with the ocean frozen over the step (for convergence checks)."""
    aom = (state.alpha / state.m)[:, None]

    def accel(x, v):
        du = _eval_ocean(ocean, x) - v
        return aom * du * np.linalg.norm(du, axis=-1, keepdims=True)

    x0, v0 = state.x, state.v
    k1x, k1v = v0, accel(x0, v0)
    k2x, k2v = v0 + 0.5 * dt * k1v, accel(x0 + 0.5 * dt * k1x, v0 + 0.5 * dt * k1v)
    k3x, k3v = v0 + 0.5 * dt * k2v, accel(x0 + 0.5 * dt * k2x, v0 + 0.5 * dt * k2v)
    k4x, k4v = v0 + dt * k3v, accel(x0 + dt * k3x, v0 + dt * k3v)
    x = x0 + dt / 6 * (k1x + 2 * k2x + 2 * k3x + k4x)
    v = v0 + dt / 6 * (k1v + 2 * k2v + 2 * k3v + k4v)
    return x, v


def _eval_ocean(ocean: ModeState, pts: np.ndarray) -> np.ndarray:
    m = ocean.modes
    return _kernels.eval_point_velocity(
        ocean.rep_coeffs, m.rep_k[:, 0], m.rep_k[:, 1], m.rep_g[:, 0], m.rep_g[:, 1], pts
    )


def step_floes(state: FloeState, ocean: ModeState, dt: float,
               method: str = "semi_implicit") -> FloeState:
    """One explicit drag step: velocity by forward Euler on the drag force,
    position by the updated velocity, wrapped periodically.

    The ocean is evaluated spectrally at the current floe positions.
    method="rk4" substitutes a classical RK4 step (ocean frozen over dt).
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if method == "semi_implicit":
        du = _eval_ocean(ocean, state.x) - state.v
        speed = np.linalg.norm(du, axis=-1, keepdims=True)
        v = state.v + dt * (state.alpha / state.m)[:, None] * du * speed
        x = state.x + dt * v
    elif method == "rk4":
        x, v = _rk4_step(state, ocean, dt)
    else:
        raise ValueError(f"unknown integrator {method!r}")
    return replace(state, x=wrap_positions(x), v=v, time=state.time + dt)


def advance_floes_and_modes(state: FloeState, ocean: ModeState, params, dt: float,
                            n_steps: int, noise: np.ndarray) -> tuple[FloeState, ModeState]:
    """Co-advance floes and ocean over n_steps model steps via the fused kernel.

    Equivalent to alternating step_floes(state, ocean, dt) and
    step_modes(ocean, params, dt, noise[t]) but without per-step Python
    overhead.  `noise` has shape (n_steps, n_pairs).
    """
    m = ocean.modes
    decay, forcing, noise_scale = ou_step_factors(params, m.n_pairs, dt)
    pos = state.x[None].copy()
    vel = state.v[None].copy()
    reps = ocean.rep_coeffs[None].copy()
    _kernels.advance_system(
        pos, vel, reps, state.alpha / state.m,
        m.rep_k[:, 0], m.rep_k[:, 1], m.rep_g[:, 0], m.rep_g[:, 1],
        decay, forcing, noise_scale, np.ascontiguousarray(noise[None]),
        dt, n_steps, True,
    )
    new_state = replace(state, x=pos[0], v=vel[0], time=state.time + n_steps * dt)
    new_ocean = ModeState.from_pairs(m, reps[0], ocean.time + n_steps * dt)
    return new_state, new_ocean


def sample_radii(count: int, alpha_exp: float, r_min: float, r_max: float,
                 rng: np.random.Generator) -> np.ndarray:
    """Inverse-CDF samples of the truncated power law N(r) ~ r^-alpha_exp.

    Degenerate bounds r_min == r_max give a constant sample.
    """
    if alpha_exp == 1:
        raise ValueError("alpha_exp = 1 is not supported by the closed-form inverse CDF")
    if r_min <= 0 or r_max < r_min:
        raise ValueError(f"invalid radius bounds [{r_min}, {r_max}]")
    if r_max == r_min:
        return np.full(count, r_min)
    u = rng.uniform(size=count)
    a = 1.0 - alpha_exp
    return (r_min**a + u * (r_max**a - r_min**a)) ** (1.0 / a)
