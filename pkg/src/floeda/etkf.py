"""Ensemble transform Kalman filter over the augmented floe/ocean state.

The filter state concatenates, per tracked floe, position and velocity
(4 reals) with the real/imaginary parts of one representative coefficient
per conjugate mode pair (2 reals each).  Observations are floe positions
only; velocities and mode coefficients are updated through the ensemble
cross-covariances.  The analysis is the deterministic symmetric
square-root transform:

    S = Y'^T R^-1 Y' / (Ne-1),  S = Q L Q^T,
    T = Q (L+I)^-1/2 Q^T,
    w = Q (L+I)^-1 Q^T Y'^T R^-1 (y - H xbar) / (Ne-1),
    Xa = xbar + X' (w 1^T + T).

Position innovations are wrapped to (-pi, pi] (minimum image on the torus).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from floeda import _kernels
from floeda.floes import wrap_diff
from floeda.ocean import ModeSet, draw_mode_noise, ou_step_factors

__all__ = [
    "StateLayout",
    "Ensemble",
    "ObsModel",
    "pack",
    "unpack",
    "pack_ensemble",
    "unpack_ensemble",
    "forecast",
    "etkf_analysis",
    "etkf_transform",
]


@dataclass(frozen=True)
class StateLayout:
    """Augmented-state layout: 4 reals per floe, then (Re, Im) per mode pair."""

    n_floes: int
    n_pairs: int

    @property
    def dim(self) -> int:
        return 4 * self.n_floes + 2 * self.n_pairs

    @property
    def mode_offset(self) -> int:
        return 4 * self.n_floes

    def position_indices(self) -> np.ndarray:
        """State indices of the (x, y) components of every floe."""
        base = 4 * np.arange(self.n_floes)
        return np.column_stack([base, base + 1]).ravel()


def pack(layout: StateLayout, x: np.ndarray, v: np.ndarray, reps: np.ndarray) -> np.ndarray:
    """Pack floe positions/velocities and pair coefficients into one real vector."""
    return pack_ensemble(layout, x[None], v[None], reps[None])[0]


def unpack(layout: StateLayout, state: np.ndarray):
    x, v, reps = unpack_ensemble(layout, state[None])
    return x[0], v[0], reps[0]


def pack_ensemble(layout: StateLayout, x: np.ndarray, v: np.ndarray,
                  reps: np.ndarray) -> np.ndarray:
    """(B, F, 2) positions, velocities and (B, P) coefficients -> (B, dim)."""
    B = x.shape[0]
    if x.shape != (B, layout.n_floes, 2) or v.shape != x.shape:
        raise ValueError(f"expected (B, {layout.n_floes}, 2) floe arrays, got {x.shape}")
    if reps.shape != (B, layout.n_pairs):
        raise ValueError(f"expected (B, {layout.n_pairs}) coefficients, got {reps.shape}")
    out = np.empty((B, layout.dim))
    fl = out[:, : layout.mode_offset].reshape(B, layout.n_floes, 4)
    fl[:, :, 0:2] = x
    fl[:, :, 2:4] = v
    md = out[:, layout.mode_offset:].reshape(B, layout.n_pairs, 2)
    md[:, :, 0] = reps.real
    md[:, :, 1] = reps.imag
    return out


def unpack_ensemble(layout: StateLayout, states: np.ndarray):
    """(B, dim) -> positions (B, F, 2), velocities (B, F, 2), coefficients (B, P)."""
    B = states.shape[0]
    if states.shape != (B, layout.dim):
        raise ValueError(f"expected (B, {layout.dim}) states, got {states.shape}")
    fl = states[:, : layout.mode_offset].reshape(B, layout.n_floes, 4)
    md = states[:, layout.mode_offset:].reshape(B, layout.n_pairs, 2)
    return fl[:, :, 0:2].copy(), fl[:, :, 2:4].copy(), md[:, :, 0] + 1j * md[:, :, 1]


@dataclass
class Ensemble:
    """N_e augmented state vectors sharing one layout (members are rows)."""

    layout: StateLayout
    members: np.ndarray

    def __post_init__(self):
        self.members = np.asarray(self.members, dtype=np.float64)
        if self.members.ndim != 2 or self.members.shape[1] != self.layout.dim:
            raise ValueError(f"members must be (N_e, {self.layout.dim})")
        if self.n_e < 2:
            raise ValueError("ensemble needs at least 2 members")

    @property
    def n_e(self) -> int:
        return self.members.shape[0]

    def mean(self) -> np.ndarray:
        return self.members.mean(axis=0)

    def spread(self) -> float:
        """Trace of the sample covariance (total ensemble variance)."""
        return float(self.members.var(axis=0, ddof=1).sum())


@dataclass
class ObsModel:
    """Observed-floe indices (into the layout's floe block) and position-error variance."""

    obs_indices: np.ndarray
    sigma_obs: float

    def __post_init__(self):
        self.obs_indices = np.asarray(self.obs_indices, dtype=np.intp)
        if self.sigma_obs <= 0:
            raise ValueError("observation noise std must be positive")

    @property
    def n_obs(self) -> int:
        return 2 * len(self.obs_indices)

    def state_indices(self, layout: StateLayout) -> np.ndarray:
        base = 4 * self.obs_indices
        return np.column_stack([base, base + 1]).ravel()

    @property
    def r_var(self) -> float:
        return self.sigma_obs**2


def forecast(ensemble: Ensemble, modes: ModeSet, params, alpha_over_m: np.ndarray,
             dt_obs: float, substeps: int, member_rngs, dt_model: float | None = None) -> Ensemble:
    """Advance every member independently over one observation interval.

    Each member's floes are driven by that member's own mode coefficients;
    mode noise comes from the member's private generator (one standard
    complex normal per pair per model step).  Positions are left unwrapped
    so ensemble anomalies stay coherent across the periodic seam.
    """
    if substeps < 1 or int(substeps) != substeps:
        raise ValueError(f"substeps must be a positive integer, got {substeps}")
    dt = dt_obs / substeps
    if dt_model is not None and abs(dt - dt_model) > 1e-9 * dt_model:
        raise ValueError(
            f"dt_obs={dt_obs} is not substeps={substeps} times the model step {dt_model}"
        )
    lay = ensemble.layout
    x, v, reps = unpack_ensemble(lay, ensemble.members)
    if len(member_rngs) != ensemble.n_e:
        raise ValueError("need one RNG per member")
    P = lay.n_pairs
    noise = np.empty((ensemble.n_e, substeps, P), dtype=np.complex128)
    for i, rng in enumerate(member_rngs):
        noise[i] = draw_mode_noise(rng, (substeps, P))
    decay, forcing, noise_scale = ou_step_factors(params, P, dt)
    x = np.ascontiguousarray(x)
    v = np.ascontiguousarray(v)
    reps = np.ascontiguousarray(reps)
    _kernels.advance_system(
        x, v, reps, np.ascontiguousarray(alpha_over_m),
        modes.rep_k[:, 0], modes.rep_k[:, 1], modes.rep_g[:, 0], modes.rep_g[:, 1],
        decay, forcing, noise_scale, noise, dt, substeps, False,
    )
    return Ensemble(lay, pack_ensemble(lay, x, v, reps))


def etkf_transform(y_anom: np.ndarray, r_inv: np.ndarray, innovation: np.ndarray,
                   n_e: int, method: str = "auto"):
    """Core ETKF algebra: transform T and mean-weight vector w.

    y_anom : (n_obs, N_e) observation-space anomalies (already inflated)
    r_inv : (n_obs,) inverse observation-error variances
    innovation : (n_obs,) wrapped y - H xbar

    method "eig" eigendecomposes the (N_e, N_e) matrix S as written in the
    analysis equations; "svd" factors the (n_obs, N_e) scaled anomalies and
    yields the same T and w (cheaper when n_obs << N_e); "auto" picks by size.
    """
    n_obs = y_anom.shape[0]
    if method == "auto":
        method = "svd" if n_obs < y_anom.shape[1] else "eig"
    rhs = y_anom.T @ (r_inv * innovation) / (n_e - 1)  # (N_e,)
    if method == "eig":
        s_mat = (y_anom.T * r_inv) @ y_anom / (n_e - 1)
        lam, q = np.linalg.eigh(s_mat)
        lam = np.maximum(lam, 0.0)
        t_mat = (q / np.sqrt(lam + 1.0)) @ q.T
        w = (q / (lam + 1.0)) @ (q.T @ rhs)
    elif method == "svd":
        b = np.sqrt(r_inv)[:, None] * y_anom / np.sqrt(n_e - 1)
        _, sv, vt = np.linalg.svd(b, full_matrices=False)
        lam = sv**2
        v_mat = vt.T  # (N_e, r)
        t_mat = np.eye(y_anom.shape[1]) + (v_mat * (1.0 / np.sqrt(lam + 1.0) - 1.0)) @ vt
        w = rhs + (v_mat * (1.0 / (lam + 1.0) - 1.0)) @ (vt @ rhs)
    else:
        raise ValueError(f"unknown method {method!r}")
    return t_mat, w


def etkf_analysis(ensemble: Ensemble, y: np.ndarray, obs: ObsModel,
                  inflation: float = 1.0, method: str = "auto") -> Ensemble:
    """Deterministic square-root analysis of observed floe positions.

    y is (n_obs_floes, 2) or flat (2*n_obs_floes,); innovations are wrapped
    per component to the minimum image.  Forecast anomalies are inflated by
    sqrt(inflation) before the update.
    """
    if inflation < 1.0:
        raise ValueError(f"inflation must be >= 1, got {inflation}")
    y = np.asarray(y, dtype=np.float64).ravel()
    idx = obs.state_indices(ensemble.layout)
    if y.shape != (len(idx),):
        raise ValueError(f"expected {len(idx)} observed components, got {y.shape}")
    members = ensemble.members
    if not np.all(np.isfinite(members)) or not np.all(np.isfinite(y)):
        raise ValueError("non-finite filter inputs")
    xbar = members.mean(axis=0)
    anom = (members - xbar) * np.sqrt(inflation)  # (N_e, dim), rows are member anomalies
    y_anom = anom[:, idx].T  # (n_obs, N_e)
    innovation = wrap_diff(y - xbar[idx])
    r_inv = np.full(len(idx), 1.0 / obs.r_var)
    t_mat, w = etkf_transform(y_anom, r_inv, innovation, ensemble.n_e, method)
    # members_a[i] = xbar + sum_j (w[j] + T[j, i]) * anom[j]
    new_members = xbar + (w + t_mat.T) @ anom
    return Ensemble(ensemble.layout, new_members)
