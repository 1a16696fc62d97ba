"""Vectorised NumPy implementation of the hot kernels.

Both backends work on the conjugate-pair *representative* coefficients of
the spectral ocean: one complex amplitude per pair, eigenvector direction
factored out as the real 2-vector g_p = (k_y, -k_x)/|k| so that

    u(x) = sum_p -2 Im(c_p exp(i k_p . x)) g_p

is exactly the real part of the full conjugate-symmetric mode sum.
Representative wavevectors must satisfy k_x >= 0 (half-plane convention),
which lets both backends share a per-axis complex power table instead of
evaluating one sincos per (point, mode).
"""

import numpy as np

TWO_PI = 2.0 * np.pi


def _phase_table(coord, k_hi, k_lo=0):
    """exp(1j*k*coord) for k in [k_lo, k_hi], shape coord.shape + (k_hi-k_lo+1,)."""
    n = k_hi - k_lo + 1
    out = np.empty(coord.shape + (n,), dtype=np.complex128)
    base = np.exp(1j * coord)
    out[..., -k_lo] = 1.0
    for j in range(-k_lo + 1, n):
        np.multiply(out[..., j - 1], base, out=out[..., j])
    conj_base = np.conj(base)
    for j in range(-k_lo - 1, -1, -1):
        np.multiply(out[..., j + 1], conj_base, out=out[..., j])
    return out


def _pair_phases(points, kx, ky):
    """exp(i k_p . x) for representative wavevectors, shape points.shape[:-1] + (P,)."""
    kx = kx.astype(np.intp)
    ky = ky.astype(np.intp)
    kx_hi = int(kx.max()) if kx.size else 0
    ky_hi = int(np.abs(ky).max()) if ky.size else 0
    cx = _phase_table(points[..., 0], kx_hi)
    cy = _phase_table(points[..., 1], ky_hi, -ky_hi)
    return cx[..., kx] * cy[..., ky + ky_hi]


def eval_point_velocity(reps, kx, ky, gx, gy, points):
    """Velocity field at arbitrary points from pair-representative coefficients.

    reps : (..., P) complex, coefficients (leading axes broadcast against points)
    kx, ky : (P,) integer-valued wavevector components, kx >= 0
    gx, gy : (P,) real direction factors (k_y, -k_x)/|k|
    points : (..., n, 2) positions (any real values; the map is 2pi-periodic)

    Returns (..., n, 2) velocities.
    """
    z = _pair_phases(points, kx, ky)
    if reps.ndim > 1:
        reps = reps[..., None, :]
    s = reps.real * z.imag + reps.imag * z.real  # Im(c * z)
    out = np.empty(points.shape, dtype=np.float64)
    out[..., 0] = s @ gx
    out[..., 1] = s @ gy
    out *= -2.0
    return out


def advance_system(pos, vel, reps, alpha_over_m, kx, ky, gx, gy,
                   decay, forcing, noise_scale, noise, dt, n_steps, wrap):
    """Advance floes and ocean modes together over n_steps model steps, in place.

    pos, vel : (B, F, 2) float64; reps : (B, P) complex128
    alpha_over_m : (F,) drag coefficient / mass per floe
    decay, forcing : (P,) complex128 exact one-step mode update factors
    noise_scale : (P,) float64; noise : (B, n_steps, P) complex128
    wrap : if true, positions are reduced into [0, 2pi) after every step

    Per step: floes feel the ocean at the start-of-step mode state, velocity
    updates by quadratic drag (explicit), position by the updated velocity
    (semi-implicit), then modes advance one exact OU step.
    """
    aom = alpha_over_m[None, :, None]
    for t in range(n_steps):
        du = eval_point_velocity(reps, kx, ky, gx, gy, pos)
        du -= vel
        speed = np.hypot(du[..., 0], du[..., 1])
        vel += (dt * aom) * du * speed[..., None]
        pos += dt * vel
        if wrap:
            np.mod(pos, TWO_PI, out=pos)
        reps *= decay
        reps += forcing
        reps += noise_scale * noise[:, t, :]
