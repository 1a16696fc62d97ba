# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: spectral velocity evaluation and fused advection.

Same contract as numpy_backend (see its module docstring): pair
representatives with k_x >= 0, per-axis complex power tables, one
sin/cos pair per point and axis instead of one per (point, mode).
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, fmod, sin, sqrt
from libc.stdlib cimport free, malloc

cnp.import_array()

ctypedef double complex dcomplex

cdef double TWO_PI = 6.283185307179586476925286766559


cdef inline void _fill_tables(double x, double y, int kx_hi, int ky_hi,
                              dcomplex* cx, dcomplex* cy) noexcept:
    cdef dcomplex bx = cos(x) + 1j * sin(x)
    cdef dcomplex by = cos(y) + 1j * sin(y)
    cdef int j
    cx[0] = 1.0
    for j in range(1, kx_hi + 1):
        cx[j] = cx[j - 1] * bx
    cy[0] = 1.0
    for j in range(1, ky_hi + 1):
        cy[j] = cy[j - 1] * by


cdef inline void _point_velocity(const dcomplex* reps, const long* kx, const long* ky,
                                 const double* gx, const double* gy, int n_pairs,
                                 const dcomplex* cx, const dcomplex* cy,
                                 double* ux, double* uy) noexcept:
    cdef int p
    cdef long kyp
    cdef dcomplex zx, zy, z
    cdef double s, acc_x = 0.0, acc_y = 0.0
    for p in range(n_pairs):
        zx = cx[kx[p]]
        kyp = ky[p]
        if kyp >= 0:
            zy = cy[kyp]
        else:
            zy = cy[-kyp].conjugate()
        z = zx * zy
        # Im(c * z): the pair sum is -2 Im(c z) g
        s = reps[p].real * z.imag + reps[p].imag * z.real
        acc_x -= 2.0 * s * gx[p]
        acc_y -= 2.0 * s * gy[p]
    ux[0] = acc_x
    uy[0] = acc_y


cdef void _prepare_k(const double[::1] kx_f, const double[::1] ky_f, long* kx, long* ky,
                     int* kx_hi, int* ky_hi, int n_pairs) except *:
    cdef int p
    cdef long v
    kx_hi[0] = 0
    ky_hi[0] = 0
    for p in range(n_pairs):
        v = <long> kx_f[p]
        if v < 0:
            raise ValueError("representative wavevectors must have k_x >= 0")
        kx[p] = v
        if v > kx_hi[0]:
            kx_hi[0] = <int> v
        v = <long> ky_f[p]
        ky[p] = v
        if v < 0:
            v = -v
        if v > ky_hi[0]:
            ky_hi[0] = <int> v


def eval_point_velocity(reps, kx, ky, gx, gy, points):
    """Velocity at (n, 2) points from (P,) pair coefficients; see numpy_backend."""
    cdef cnp.ndarray[dcomplex, ndim=1, mode="c"] reps_a = np.ascontiguousarray(reps, dtype=np.complex128)
    cdef cnp.ndarray[double, ndim=1, mode="c"] kx_a = np.ascontiguousarray(kx, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1, mode="c"] ky_a = np.ascontiguousarray(ky, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1, mode="c"] gx_a = np.ascontiguousarray(gx, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1, mode="c"] gy_a = np.ascontiguousarray(gy, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2, mode="c"] pts = np.ascontiguousarray(points, dtype=np.float64)
    cdef int n = pts.shape[0]
    cdef int n_pairs = reps_a.shape[0]
    cdef cnp.ndarray[double, ndim=2, mode="c"] out = np.empty((n, 2))

    cdef long* kxi = <long*> malloc(n_pairs * sizeof(long))
    cdef long* kyi = <long*> malloc(n_pairs * sizeof(long))
    cdef int kx_hi = 0, ky_hi = 0
    cdef dcomplex* cx = NULL
    cdef dcomplex* cy = NULL
    cdef int i
    try:
        _prepare_k(kx_a, ky_a, kxi, kyi, &kx_hi, &ky_hi, n_pairs)
        cx = <dcomplex*> malloc((kx_hi + 1) * sizeof(dcomplex))
        cy = <dcomplex*> malloc((ky_hi + 1) * sizeof(dcomplex))
        for i in range(n):
            _fill_tables(pts[i, 0], pts[i, 1], kx_hi, ky_hi, cx, cy)
            _point_velocity(&reps_a[0], kxi, kyi, &gx_a[0], &gy_a[0], n_pairs,
                            cx, cy, &out[i, 0], &out[i, 1])
    finally:
        free(kxi)
        free(kyi)
        free(cx)
        free(cy)
    return out


def advance_system(pos, vel, reps, alpha_over_m, kx, ky, gx, gy,
                   decay, forcing, noise_scale, noise, double dt, int n_steps, bint wrap):
    """Fused floe/mode advance, in place; see numpy_backend.advance_system."""
    cdef double[:, :, ::1] pos_v = pos
    cdef double[:, :, ::1] vel_v = vel
    cdef dcomplex[:, ::1] reps_v = reps
    cdef double[::1] aom = np.ascontiguousarray(alpha_over_m, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1, mode="c"] kx_a = np.ascontiguousarray(kx, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1, mode="c"] ky_a = np.ascontiguousarray(ky, dtype=np.float64)
    cdef double[::1] gx_v = np.ascontiguousarray(gx, dtype=np.float64)
    cdef double[::1] gy_v = np.ascontiguousarray(gy, dtype=np.float64)
    cdef dcomplex[::1] decay_v = np.ascontiguousarray(decay, dtype=np.complex128)
    cdef dcomplex[::1] forcing_v = np.ascontiguousarray(forcing, dtype=np.complex128)
    cdef double[::1] nscale_v = np.ascontiguousarray(noise_scale, dtype=np.float64)
    cdef dcomplex[:, :, ::1] noise_v = noise

    cdef int n_members = pos_v.shape[0]
    cdef int n_floes = pos_v.shape[1]
    cdef int n_pairs = reps_v.shape[1]
    if vel_v.shape[0] != n_members or reps_v.shape[0] != n_members:
        raise ValueError("member counts disagree")
    if noise_v.shape[0] != n_members or noise_v.shape[1] != n_steps or noise_v.shape[2] != n_pairs:
        raise ValueError("noise must be (members, n_steps, n_pairs)")
    if aom.shape[0] != n_floes:
        raise ValueError("alpha_over_m must have one entry per floe")

    cdef long* kxi = <long*> malloc(n_pairs * sizeof(long))
    cdef long* kyi = <long*> malloc(n_pairs * sizeof(long))
    cdef int kx_hi = 0, ky_hi = 0
    cdef dcomplex* cx = NULL
    cdef dcomplex* cy = NULL
    cdef int b, t, f, p
    cdef double ux, uy, dux, duy, speed, x, y
    try:
        _prepare_k(kx_a, ky_a, kxi, kyi, &kx_hi, &ky_hi, n_pairs)
        cx = <dcomplex*> malloc((kx_hi + 1) * sizeof(dcomplex))
        cy = <dcomplex*> malloc((ky_hi + 1) * sizeof(dcomplex))
        for b in range(n_members):
            for t in range(n_steps):
                for f in range(n_floes):
                    _fill_tables(pos_v[b, f, 0], pos_v[b, f, 1], kx_hi, ky_hi, cx, cy)
                    _point_velocity(&reps_v[b, 0], kxi, kyi, &gx_v[0], &gy_v[0],
                                    n_pairs, cx, cy, &ux, &uy)
                    dux = ux - vel_v[b, f, 0]
                    duy = uy - vel_v[b, f, 1]
                    speed = sqrt(dux * dux + duy * duy)
                    vel_v[b, f, 0] = vel_v[b, f, 0] + dt * aom[f] * dux * speed
                    vel_v[b, f, 1] = vel_v[b, f, 1] + dt * aom[f] * duy * speed
                    x = pos_v[b, f, 0] + dt * vel_v[b, f, 0]
                    y = pos_v[b, f, 1] + dt * vel_v[b, f, 1]
                    if wrap:
                        x = fmod(x, TWO_PI)
                        if x < 0:
                            x += TWO_PI
                        y = fmod(y, TWO_PI)
                        if y < 0:
                            y += TWO_PI
                    pos_v[b, f, 0] = x
                    pos_v[b, f, 1] = y
                for p in range(n_pairs):
                    reps_v[b, p] = decay_v[p] * reps_v[b, p] + forcing_v[p] \
                        + nscale_v[p] * noise_v[b, t, p]
    finally:
        free(kxi)
        free(kyi)
        free(cx)
        free(cy)
