"""Cross-checks between the compiled kernel and the NumPy fallback."""

import numpy as np
import pytest

from floeda import _kernels
from floeda._kernels import numpy_backend
from floeda.ocean import ModeParams, build_mode_set, ou_step_factors

cython_available = _kernels.BACKEND == "cython"
needs_cython = pytest.mark.skipif(not cython_available, reason="compiled kernel not built")


def setup_problem(rng, n_members=5, n_floes=11, k_max=3):
    modes = build_mode_set(k_max)
    P = modes.n_pairs
    pos = rng.uniform(0, 2 * np.pi, (n_members, n_floes, 2))
    vel = rng.normal(0, 0.5, (n_members, n_floes, 2))
    reps = (rng.normal(size=(n_members, P)) + 1j * rng.normal(size=(n_members, P))) * 0.1
    aom = rng.uniform(5.0, 40.0, n_floes)
    n_steps = 6
    noise = (rng.standard_normal((n_members, n_steps, P))
             + 1j * rng.standard_normal((n_members, n_steps, P))) / np.sqrt(2)
    decay, forcing, nscale = ou_step_factors(
        ModeParams(d=0.5, phi=0.4, f=0.01 + 0.02j, sigma=0.13), P, 1e-3
    )
    return modes, pos, vel, reps, aom, decay, forcing, nscale, noise, n_steps


@needs_cython
class TestBackendEquivalence:
    def test_eval_point_velocity(self):
        rng = np.random.default_rng(0)
        modes = build_mode_set(4)
        P = modes.n_pairs
        reps = (rng.normal(size=P) + 1j * rng.normal(size=P)) * 0.2
        pts = rng.uniform(-7, 13, (200, 2))
        args = (reps, modes.rep_k[:, 0], modes.rep_k[:, 1],
                modes.rep_g[:, 0], modes.rep_g[:, 1], pts)
        a = _kernels._impl.eval_point_velocity(*args)
        b = numpy_backend.eval_point_velocity(*args)
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-13)

    @pytest.mark.parametrize("wrap", [True, False])
    def test_advance_system(self, wrap):
        rng = np.random.default_rng(1)
        modes, pos, vel, reps, aom, decay, forcing, nscale, noise, n_steps = setup_problem(rng)
        args_shared = (aom, modes.rep_k[:, 0], modes.rep_k[:, 1],
                       modes.rep_g[:, 0], modes.rep_g[:, 1],
                       decay, forcing, nscale, noise, 1e-3, n_steps, wrap)
        p1, v1, r1 = pos.copy(), vel.copy(), reps.copy()
        _kernels._impl.advance_system(p1, v1, r1, *args_shared)
        p2, v2, r2 = pos.copy(), vel.copy(), reps.copy()
        numpy_backend.advance_system(p2, v2, r2, *args_shared)
        np.testing.assert_allclose(p1, p2, rtol=1e-12, atol=1e-12)
        np.testing.assert_allclose(v1, v2, rtol=1e-12, atol=1e-12)
        np.testing.assert_allclose(r1, r2, rtol=1e-12, atol=1e-14)

    def test_long_horizon_stability_agreement(self):
        # longer run: roundoff divergence must stay tiny because both paths
        # use the same update order
        rng = np.random.default_rng(2)
        modes, pos, vel, reps, aom, decay, forcing, nscale, _, _ = setup_problem(
            rng, n_members=2, n_floes=4
        )
        n_steps = 200
        noise = (rng.standard_normal((2, n_steps, modes.n_pairs))
                 + 1j * rng.standard_normal((2, n_steps, modes.n_pairs))) / np.sqrt(2)
        args = (aom, modes.rep_k[:, 0], modes.rep_k[:, 1], modes.rep_g[:, 0],
                modes.rep_g[:, 1], decay, forcing, nscale, noise, 1e-3, n_steps, False)
        p1, v1, r1 = pos.copy(), vel.copy(), reps.copy()
        _kernels._impl.advance_system(p1, v1, r1, *args)
        p2, v2, r2 = pos.copy(), vel.copy(), reps.copy()
        numpy_backend.advance_system(p2, v2, r2, *args)
        np.testing.assert_allclose(p1, p2, rtol=1e-10, atol=1e-10)

    def test_negative_kx_rejected(self):
        rng = np.random.default_rng(3)
        pts = rng.uniform(0, 1, (3, 2))
        with pytest.raises(ValueError):
            _kernels._impl.eval_point_velocity(
                np.ones(1, complex), np.array([-1.0]), np.array([0.0]),
                np.array([0.0]), np.array([1.0]), pts,
            )


def test_selected_backend_exports():
    assert _kernels.BACKEND in ("cython", "numpy")
    assert callable(_kernels.eval_point_velocity)
    assert callable(_kernels.advance_system)
