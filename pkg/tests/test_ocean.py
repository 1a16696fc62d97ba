import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from floeda.ocean import (
    ModeParams,
    ModeState,
    build_mode_set,
    draw_mode_noise,
    eval_velocity,
    eval_velocity_grid,
    sample_stationary_state,
    step_modes,
)

from oracles import ou_analytic, spectral_divergence, velocity_complex_sum


class TestBuildModeSet:
    def test_k1_counts(self):
        m = build_mode_set(1)
        assert m.n_modes == 8
        assert m.n_pairs == 4

    def test_k9_count_matches_truncation_rule(self):
        m = build_mode_set(9)
        assert m.n_modes == (2 * 9 + 1) ** 2 - 1 == 360

    def test_eigenvector_k10(self):
        m = build_mode_set(1)
        i = m.index_of(1, 0)
        np.testing.assert_allclose(m.evec[i], [0.0, -1j], atol=1e-15)

    def test_every_mode_has_conjugate_partner(self):
        m = build_mode_set(3)
        np.testing.assert_array_equal(m.k[m.pair_rep], -m.k[m.pair_conj])
        # pairs cover the whole set exactly once
        assert sorted(np.concatenate([m.pair_rep, m.pair_conj])) == list(range(m.n_modes))

    def test_eigenvectors_orthogonal_to_k(self):
        m = build_mode_set(4)
        dots = np.einsum("mi,mi->m", m.k.astype(complex), m.evec)
        assert np.max(np.abs(dots)) < 1e-14

    def test_k_zero_rejected(self):
        with pytest.raises(ValueError):
            build_mode_set(0)

    def test_euclidean_truncation_subset(self):
        m = build_mode_set(3, truncation="euclidean")
        assert m.n_modes < build_mode_set(3).n_modes
        assert np.all(np.hypot(m.k[:, 0], m.k[:, 1]) <= 3)
        assert m.n_pairs * 2 == m.n_modes


class TestStepModes:
    def test_pure_decay_matches_closed_form(self):
        m = build_mode_set(1)
        i = m.index_of(1, 0)
        p = np.flatnonzero(m.pair_rep == i)[0]
        reps = np.zeros(m.n_pairs, dtype=complex)
        reps[p] = 1.0
        state = ModeState.from_pairs(m, reps)
        out = step_modes(state, ModeParams(d=0.5), dt=1.0)
        assert out.coeffs[i] == pytest.approx(np.exp(-0.5), rel=1e-14)
        assert out.coeffs[i].real == pytest.approx(0.6065306597126334, rel=1e-12)

    def test_zero_state_is_fixed_point(self):
        m = build_mode_set(2)
        state = ModeState.zeros(m)
        for _ in range(5):
            state = step_modes(state, ModeParams(d=0.3, phi=1.2), dt=0.5)
        assert np.all(state.coeffs == 0)

    @pytest.mark.parametrize("dt", [1e-3, 1e-2, 1.0])
    def test_deterministic_limit_matches_analytic(self, dt):
        m = build_mode_set(1)
        params = ModeParams(d=0.7, phi=2.3, f=0.1 - 0.05j)
        reps0 = np.full(m.n_pairs, 0.4 + 0.2j)
        state = ModeState.from_pairs(m, reps0)
        nsteps = 10
        for _ in range(nsteps):
            state = step_modes(state, params, dt)
        expected = ou_analytic(reps0[0], params.d, params.phi, params.f, nsteps * dt)
        got = state.rep_coeffs[0]
        assert abs(got - expected) / abs(expected) < 1e-12

    def test_stationary_variance_monte_carlo(self):
        # d=0.5, sigma=0.05: Var(Re c) should approach sigma^2/(2d)/2 = 1.25e-3
        m = build_mode_set(1)
        params = ModeParams(d=0.5, sigma=0.05)
        rng = np.random.default_rng(7)
        n = 100_000
        dt = 0.05
        state = sample_stationary_state(m, params, rng)
        samples = np.empty(n)
        for i in range(n):
            state = step_modes(state, params, dt, draw_mode_noise(rng, m.n_pairs))
            samples[i] = state.rep_coeffs[0].real
        target = 0.05**2 / (2 * 0.5) / 2
        assert samples.var() == pytest.approx(target, rel=0.10)

    def test_nonpositive_dt_rejected(self):
        m = build_mode_set(1)
        state = ModeState.zeros(m)
        for dt in (0.0, -1e-3):
            with pytest.raises(ValueError):
                step_modes(state, ModeParams(d=1.0), dt)

    @settings(max_examples=40, deadline=None)
    @given(
        d=st.floats(0.05, 5.0),
        phi=st.floats(-3.0, 3.0),
        sigma=st.floats(0.0, 1.0),
        dt=st.floats(1e-4, 2.0),
        seed=st.integers(0, 2**31),
    )
    def test_conjugate_symmetry_preserved(self, d, phi, sigma, dt, seed):
        m = build_mode_set(2)
        rng = np.random.default_rng(seed)
        state = sample_stationary_state(m, ModeParams(d=d, sigma=max(sigma, 1e-3)), rng)
        params = ModeParams(d=d, phi=phi, f=0.02 + 0.01j, sigma=sigma)
        for _ in range(3):
            state = step_modes(state, params, dt, draw_mode_noise(rng, m.n_pairs))
        assert m.conjugate_defect(state.coeffs) < 1e-12

    def test_invalid_params_rejected(self):
        with pytest.raises(ValueError):
            ModeParams(d=0.0)
        with pytest.raises(ValueError):
            ModeParams(d=1.0, sigma=-0.1)


class TestEvalVelocity:
    def test_zero_coeffs_zero_velocity(self):
        m = build_mode_set(3)
        state = ModeState.zeros(m)
        pts = np.random.default_rng(0).uniform(0, 2 * np.pi, (17, 2))
        np.testing.assert_array_equal(eval_velocity(state, pts), 0.0)

    def test_single_pair_closed_form(self):
        # k=(1,0), c real: u = (0, 2 c sin x)
        m = build_mode_set(1)
        c = 0.37
        reps = np.zeros(m.n_pairs, dtype=complex)
        reps[np.flatnonzero(m.pair_rep == m.index_of(1, 0))[0]] = c
        state = ModeState.from_pairs(m, reps)
        pts = np.random.default_rng(1).uniform(0, 2 * np.pi, (50, 2))
        vel = eval_velocity(state, pts)
        np.testing.assert_allclose(vel[:, 0], 0.0, atol=1e-14)
        np.testing.assert_allclose(vel[:, 1], 2 * c * np.sin(pts[:, 0]), atol=1e-13)

    def test_periodicity(self):
        m = build_mode_set(2)
        state = sample_stationary_state(m, ModeParams(d=0.5, sigma=0.5), np.random.default_rng(3))
        pts = np.random.default_rng(4).uniform(0, 2 * np.pi, (20, 2))
        shifted = pts + np.array([2 * np.pi, 0.0])
        np.testing.assert_allclose(eval_velocity(state, pts), eval_velocity(state, shifted),
                                   rtol=1e-10, atol=1e-12)

    def test_matches_full_complex_sum_and_is_real(self):
        m = build_mode_set(3)
        state = sample_stationary_state(m, ModeParams(d=0.5, sigma=0.8), np.random.default_rng(5))
        pts = np.random.default_rng(6).uniform(-5, 15, (40, 2))
        vel = eval_velocity(state, pts)
        ref, resid = velocity_complex_sum(m.k, m.evec, state.coeffs, pts)
        assert resid < 1e-10
        np.testing.assert_allclose(vel, ref.real, rtol=1e-10, atol=1e-12)

    def test_asymmetric_coeffs_rejected(self):
        m = build_mode_set(1)
        state = ModeState.zeros(m)
        state.coeffs[m.pair_rep[0]] = 1.0  # partner left at zero
        with pytest.raises(ValueError):
            eval_velocity(state, np.zeros((1, 2)))


class TestEvalVelocityGrid:
    def test_zero_state(self):
        grid = eval_velocity_grid(ModeState.zeros(build_mode_set(2)), 16)
        assert grid.values.shape == (16, 16, 2)
        np.testing.assert_array_equal(grid.values, 0.0)

    def test_single_pair_closed_form_n64(self):
        m = build_mode_set(1)
        c = 0.25
        reps = np.zeros(m.n_pairs, dtype=complex)
        reps[np.flatnonzero(m.pair_rep == m.index_of(1, 0))[0]] = c
        grid = eval_velocity_grid(ModeState.from_pairs(m, reps), 64)
        x = grid.nodes
        np.testing.assert_allclose(grid.values[:, :, 0], 0.0, atol=1e-10)
        np.testing.assert_allclose(
            grid.values[:, :, 1], np.broadcast_to(2 * c * np.sin(x)[:, None], (64, 64)),
            atol=1e-10,
        )

    def test_fft_path_matches_direct_summation(self):
        m = build_mode_set(4)
        state = sample_stationary_state(m, ModeParams(d=0.5, sigma=0.6), np.random.default_rng(8))
        n = 32
        grid = eval_velocity_grid(state, n)
        direct = eval_velocity(state, grid.node_points()).reshape(n, n, 2)
        np.testing.assert_allclose(grid.values, direct, atol=1e-8)

    def test_grid_agrees_with_eval_velocity_at_nodes(self):
        m = build_mode_set(3)
        state = sample_stationary_state(m, ModeParams(d=0.4, sigma=0.3), np.random.default_rng(9))
        grid = eval_velocity_grid(state, 24)
        vals = eval_velocity(state, grid.node_points()).reshape(24, 24, 2)
        assert np.max(np.abs(grid.values - vals)) < 1e-10

    def test_divergence_free(self):
        m = build_mode_set(5)
        state = sample_stationary_state(m, ModeParams(d=0.5, sigma=1.0), np.random.default_rng(10))
        grid = eval_velocity_grid(state, 64)
        assert spectral_divergence(grid.values) < 1e-10

    def test_small_n_rejected(self):
        with pytest.raises(ValueError):
            eval_velocity_grid(ModeState.zeros(build_mode_set(1)), 1)
