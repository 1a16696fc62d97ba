"""Stochastic spectral ocean surrogate.

The velocity field is a truncated sum of divergence-free Fourier modes,

    u(x) = sum_k c_k e_k exp(i k . x),    e_k = (i k_y, -i k_x) / |k|,

with each coefficient evolving as an independent complex Ornstein-Uhlenbeck
process.  Conjugate symmetry c_{-k} = conj(c_k) is maintained so the field
is real; each step advances one representative per conjugate pair exactly
(no discretisation error) and fills the partner by conjugation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from floeda import _kernels
from floeda.fields import TWO_PI, FieldGrid


@dataclass(frozen=True)
class ModeParams:
    """Per-mode linear dynamics: damping d, phase speed phi, forcing f, noise sigma."""

    d: float
    phi: float = 0.0
    f: complex = 0.0
    sigma: float = 0.0

    def __post_init__(self):
        if not self.d > 0:
            raise ValueError(f"damping must be positive, got d={self.d}")
        if self.sigma < 0:
            raise ValueError(f"noise strength must be non-negative, got sigma={self.sigma}")


ParamsLike = Union[ModeParams, Sequence[ModeParams]]


class ModeSet:
    """Truncated wavevector set with conjugate pairing and eigenvectors.

    Wavevectors are ordered lexicographically by (k_x, k_y).  The pair
    representative is the member with k_x > 0, or k_x == 0 and k_y > 0;
    `pair_rep[p]` / `pair_conj[p]` index the representative and its -k
    partner in that order.
    """

    def __init__(self, wavenumbers: np.ndarray):
        k = np.asarray(wavenumbers, dtype=np.int64)
        if k.ndim != 2 or k.shape[1] != 2 or k.shape[0] == 0:
            raise ValueError("wavenumbers must be a non-empty (M, 2) integer array")
        if np.any(np.all(k == 0, axis=1)):
            raise ValueError("the origin mode (0, 0) is excluded")
        order = np.lexsort((k[:, 1], k[:, 0]))
        k = k[order]
        self.k = k
        index = {(int(kx), int(ky)): i for i, (kx, ky) in enumerate(k)}
        if len(index) != len(k):
            raise ValueError("duplicate wavevectors")
        rep, conj = [], []
        for i, (kx, ky) in enumerate(k):
            if kx > 0 or (kx == 0 and ky > 0):
                partner = index.get((int(-kx), int(-ky)))
                if partner is None:
                    raise ValueError(f"wavevector {(kx, ky)} lacks its -k partner")
                rep.append(i)
                conj.append(partner)
        if 2 * len(rep) != len(k):
            raise ValueError("wavevector set is not closed under k -> -k")
        self.pair_rep = np.asarray(rep, dtype=np.intp)
        self.pair_conj = np.asarray(conj, dtype=np.intp)
        norm = np.linalg.norm(k, axis=1)
        # e_k = (i k_y, -i k_x)/|k|: divergence-free by construction (k . e_k = 0)
        self.evec = np.stack([1j * k[:, 1] / norm, -1j * k[:, 0] / norm], axis=1)
        # real direction factors for the pair-sum kernels: e_k = i g_k
        kr = k[self.pair_rep]
        nr = norm[self.pair_rep]
        self.rep_k = kr.astype(np.float64)
        self.rep_g = np.stack([kr[:, 1] / nr, -kr[:, 0] / nr], axis=1)

    @property
    def n_modes(self) -> int:
        return self.k.shape[0]

    @property
    def n_pairs(self) -> int:
        return self.pair_rep.shape[0]

    def index_of(self, kx: int, ky: int) -> int:
        hits = np.flatnonzero((self.k[:, 0] == kx) & (self.k[:, 1] == ky))
        if hits.size == 0:
            raise KeyError(f"wavevector ({kx}, {ky}) not in set")
        return int(hits[0])

    def conjugate_defect(self, coeffs: np.ndarray) -> float:
        """max |c_{-k} - conj(c_k)| over pairs."""
        return float(np.max(np.abs(coeffs[..., self.pair_conj] - np.conj(coeffs[..., self.pair_rep]))))


def build_mode_set(k_max: int, truncation: str = "max") -> ModeSet:
    """All integer wavevectors inside the truncation ball, origin excluded.

    truncation="max" keeps |k|_inf <= k_max ((2*k_max+1)^2 - 1 modes);
    "euclidean" keeps |k|_2 <= k_max.
    """
    if int(k_max) != k_max or k_max < 1:
        raise ValueError(f"k_max must be a positive integer, got {k_max}")
    k_max = int(k_max)
    rng = np.arange(-k_max, k_max + 1)
    kx, ky = np.meshgrid(rng, rng, indexing="ij")
    k = np.column_stack([kx.ravel(), ky.ravel()])
    k = k[np.any(k != 0, axis=1)]
    if truncation == "euclidean":
        k = k[np.hypot(k[:, 0], k[:, 1]) <= k_max]
    elif truncation != "max":
        raise ValueError(f"unknown truncation {truncation!r}")
    return ModeSet(k)


@dataclass
class ModeState:
    """Complex coefficients for every mode of a ModeSet at one model time."""

    modes: ModeSet
    coeffs: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        if self.coeffs.shape != (self.modes.n_modes,):
            raise ValueError(
                f"coeffs must have shape ({self.modes.n_modes},), got {self.coeffs.shape}"
            )

    @classmethod
    def zeros(cls, modes: ModeSet, time: float = 0.0) -> "ModeState":
        return cls(modes, np.zeros(modes.n_modes, dtype=np.complex128), time)

    @classmethod
    def from_pairs(cls, modes: ModeSet, rep_coeffs: np.ndarray, time: float = 0.0) -> "ModeState":
        """Build a conjugate-symmetric state from per-pair representative coefficients."""
        c = np.zeros(modes.n_modes, dtype=np.complex128)
        c[modes.pair_rep] = rep_coeffs
        c[modes.pair_conj] = np.conj(rep_coeffs)
        return cls(modes, c, time)

    @property
    def rep_coeffs(self) -> np.ndarray:
        return self.coeffs[self.modes.pair_rep]


def _params_arrays(params: ParamsLike, n_pairs: int):
    """(d, phi, f, sigma) arrays of length n_pairs from scalar or per-pair params."""
    if isinstance(params, ModeParams):
        params = [params] * n_pairs
    if len(params) != n_pairs:
        raise ValueError(f"expected {n_pairs} per-pair ModeParams, got {len(params)}")
    d = np.array([p.d for p in params])
    phi = np.array([p.phi for p in params])
    f = np.array([complex(p.f) for p in params])
    sigma = np.array([p.sigma for p in params])
    return d, phi, f, sigma


def ou_step_factors(params: ParamsLike, n_pairs: int, dt: float):
    """Exact one-step OU update factors (decay, forcing term, noise scale).

    c <- decay * c + forcing + noise_scale * xi with xi standard complex
    normal gives the exact conditional law of dc = ((-d+i*phi) c + f) dt
    + sigma dW over a step dt.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    d, phi, f, sigma = _params_arrays(params, n_pairs)
    lam = -d + 1j * phi
    decay = np.exp(lam * dt)
    forcing = f / (d - 1j * phi) * (1.0 - decay)
    noise_scale = sigma * np.sqrt((1.0 - np.exp(-2.0 * d * dt)) / (2.0 * d))
    return decay, forcing, noise_scale


def draw_mode_noise(rng: np.random.Generator, shape) -> np.ndarray:
    """Standard complex normal draws: E|xi|^2 = 1, Re and Im ~ N(0, 1/2)."""
    z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return z / np.sqrt(2.0)


def step_modes(state: ModeState, params: ParamsLike, dt: float,
               noise: np.ndarray | None = None) -> ModeState:
    """Advance every mode one exact OU step; partners refilled by conjugation.

    `noise` holds one standard complex normal per conjugate-pair
    representative (zeros if omitted, giving the deterministic flow).
    """
    P = state.modes.n_pairs
    decay, forcing, noise_scale = ou_step_factors(params, P, dt)
    if noise is None:
        noise = np.zeros(P, dtype=np.complex128)
    noise = np.asarray(noise, dtype=np.complex128)
    if noise.shape != (P,):
        raise ValueError(f"noise must have shape ({P},), got {noise.shape}")
    reps = state.rep_coeffs * decay + forcing + noise_scale * noise
    return ModeState.from_pairs(state.modes, reps, state.time + dt)


def stationary_std(params: ParamsLike, n_pairs: int) -> np.ndarray:
    """Per-pair stationary std of |c| about the mean f/(d - i*phi): sqrt(sigma^2/(2d))."""
    d, _, _, sigma = _params_arrays(params, n_pairs)
    return sigma / np.sqrt(2.0 * d)


def sample_stationary_state(modes: ModeSet, params: ParamsLike,
                            rng: np.random.Generator, time: float = 0.0) -> ModeState:
    """Draw coefficients from the per-mode stationary distribution."""
    d, phi, f, _ = _params_arrays(params, modes.n_pairs)
    mean = f / (d - 1j * phi)
    reps = mean + stationary_std(params, modes.n_pairs) * draw_mode_noise(rng, modes.n_pairs)
    return ModeState.from_pairs(modes, reps, time)


def eval_velocity(state: ModeState, points: np.ndarray) -> np.ndarray:
    """Velocity at arbitrary points by direct spectral summation.

    Requires a conjugate-symmetric state (the sum is then exactly real and
    is evaluated through the pair representation).
    """
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if pts.shape[-1] != 2:
        raise ValueError("points must be (..., 2)")
    defect = state.modes.conjugate_defect(state.coeffs)
    scale = max(np.max(np.abs(state.coeffs)), 1.0)
    if defect > 1e-9 * scale:
        raise ValueError(f"coefficients are not conjugate-symmetric (defect {defect:.2e})")
    m = state.modes
    flat = np.ascontiguousarray(pts.reshape(-1, 2))
    vel = _kernels.eval_point_velocity(
        state.rep_coeffs, m.rep_k[:, 0], m.rep_k[:, 1], m.rep_g[:, 0], m.rep_g[:, 1], flat
    )
    return vel.reshape(pts.shape)


def eval_velocity_grid(state: ModeState, n: int) -> FieldGrid:
    """Sample the field at the n x n regular grid via an accumulated inverse FFT.

    Wavevectors are folded modulo n before accumulation, so the result
    matches direct summation at the nodes exactly even when n undersamples
    the spectrum.
    """
    if int(n) != n or n < 2:
        raise ValueError(f"grid resolution must be an integer >= 2, got {n}")
    n = int(n)
    m = state.modes
    spec = np.zeros((n, n, 2), dtype=np.complex128)
    ix = np.mod(m.k[:, 0], n)
    iy = np.mod(m.k[:, 1], n)
    amp = state.coeffs[:, None] * m.evec
    np.add.at(spec, (ix, iy), amp)
    vals = np.fft.ifft2(spec, axes=(0, 1)) * (n * n)
    return FieldGrid(vals.real, time=state.time)
