"""Acceptance suite: one test per criterion, printed pass/fail lines.

The trend-reproduction criterion runs the full 12-configuration sweep at
the reduced scale (5 seeds) and is by far the slowest item; everything
else finishes in seconds.  Run with `pytest tests/test_acceptance.py -v -s`.
"""

import time

import numpy as np
import pytest

from floeda.config import RunConfig
from floeda.domain import gaussian_weights, partition
from floeda.etkf import Ensemble, ObsModel, StateLayout, etkf_analysis, pack_ensemble
from floeda.floes import FloeState, drag_force, floe_mass, sample_radii, step_floes
from floeda.harness import (
    DESK_GRID_SPECS,
    generate_observations,
    run_assimilation,
    run_truth,
    sweep,
    sweep_rows,
)
from floeda.ocean import (
    ModeParams,
    ModeState,
    build_mode_set,
    draw_mode_noise,
    eval_velocity,
    sample_stationary_state,
    step_modes,
)

from oracles import kalman_update_1d, ks_statistic, powerlaw_cdf

TWO_PI = 2 * np.pi


def announce(name, ok, detail=""):
    print(f"\n[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


class TestAcceptance:
    def test_partition_of_unity(self):
        t0 = time.perf_counter()
        worst = 0.0
        for nx, ny in [(1, 1), (2, 2), (4, 4)]:
            for sigma_o in (0.5, 2.6, 10.0):
                wg = gaussian_weights(partition(nx, ny), 64, sigma_o)
                worst = max(worst, float(np.max(np.abs(wg.norm.sum(axis=0) - 1.0))))
        elapsed = time.perf_counter() - t0
        announce("partition of unity", worst < 1e-12 and elapsed < 1.0,
                 f"max deviation {worst:.2e}, {elapsed:.2f}s")

    def test_ou_statistics(self):
        t0 = time.perf_counter()
        modes = build_mode_set(1)
        params = ModeParams(d=0.5, sigma=0.05)
        rng = np.random.default_rng(2024)
        state = sample_stationary_state(modes, params, rng)
        n = 120_000
        dt = 0.05
        samples = np.empty((n, modes.n_pairs), dtype=complex)
        for i in range(n):
            state = step_modes(state, params, dt, draw_mode_noise(rng, modes.n_pairs))
            samples[i] = state.rep_coeffs
        target = 0.05**2 / (2 * 0.5)
        second_moment = float(np.mean(np.abs(samples[:, 0]) ** 2))
        # standard error of the mean of |c|^2 with OU autocorrelation time 1/d
        tau = int(round(1 / 0.5 / dt))
        se = np.std(np.abs(samples[::tau, 0]) ** 2) / np.sqrt(n / tau)
        ok_var = abs(second_moment - target) < 3 * se

        decay_state = ModeState.from_pairs(modes, np.full(modes.n_pairs, 1.0 + 0j))
        out = step_modes(decay_state, ModeParams(d=0.5), dt=1.0)
        ok_det = abs(out.rep_coeffs[0] - np.exp(-0.5)) < 1e-12
        elapsed = time.perf_counter() - t0
        announce("OU statistics", ok_var and ok_det and elapsed < 10,
                 f"|c|^2 = {second_moment:.3e} vs {target:.3e} (3se={3 * se:.1e}), "
                 f"decay err {abs(out.rep_coeffs[0] - np.exp(-0.5)):.1e}, {elapsed:.1f}s")

    def test_etkf_oracle_equivalence(self):
        t0 = time.perf_counter()
        mu0, sig0, r_std, y_obs = 1.0, 0.3, 0.2, 1.4
        n_e = 1000
        kf_mean, kf_var = kalman_update_1d(mu0, sig0**2, y_obs, r_std**2)
        means, variances = [], []
        lay = StateLayout(1, 1)
        obs = ObsModel(np.array([0]), sigma_obs=r_std)
        for seed in range(100):
            rng = np.random.default_rng(seed)
            x = np.zeros((n_e, 1, 2))
            x[:, 0, 0] = mu0 + sig0 * rng.standard_normal(n_e)
            ens = Ensemble(lay, pack_ensemble(lay, x, np.zeros((n_e, 1, 2)),
                                              np.zeros((n_e, 1), complex)))
            out = etkf_analysis(ens, np.array([y_obs, 0.0]), obs)
            means.append(out.members[:, 0].mean())
            variances.append(out.members[:, 0].var(ddof=1))
        mean_err = abs(np.mean(means) - kf_mean) / abs(kf_mean)
        var_err = abs(np.mean(variances) - kf_var) / kf_var
        elapsed = time.perf_counter() - t0
        announce("ETKF oracle equivalence", mean_err < 0.05 and var_err < 0.05 and elapsed < 30,
                 f"mean rel err {mean_err:.3%}, var rel err {var_err:.3%}, {elapsed:.1f}s")

    def test_baseline_equivalence(self):
        """1x1 pipeline vs an independently wired single filter (1e-10)."""
        from floeda.config import member_forecast_rng, member_init_rng
        from floeda.etkf import forecast, unpack_ensemble
        from floeda.ocean import eval_velocity, eval_velocity_grid

        t0 = time.perf_counter()
        cfg = RunConfig.desk_scale(L=400, N_e=24, T=0.2, l_obs=16, seed=5)
        truth = run_truth(cfg)
        obs = generate_observations(truth, cfg)
        res = run_assimilation(cfg, obs, truth)

        modes = build_mode_set(cfg.k_max, cfg.truncation)
        params = ModeParams(d=cfg.d, phi=cfg.phi, f=cfg.forcing,
                            sigma=cfg.amp_factor * cfg.sigma)
        ids = obs.ids_at(0)[0]
        n_f = len(ids)
        lay = StateLayout(n_f, modes.n_pairs)
        x0 = obs.y[0][0]
        xs = np.tile(x0, (cfg.N_e, 1, 1))
        vs = np.empty((cfg.N_e, n_f, 2))
        reps = np.empty((cfg.N_e, modes.n_pairs), complex)
        for m in range(cfg.N_e):
            rng = member_init_rng(cfg.seed, m)
            st = sample_stationary_state(modes, params, rng)
            reps[m] = st.rep_coeffs
            vs[m] = eval_velocity(st, x0) + cfg.vel_init_std * rng.standard_normal((n_f, 2))
        ens = Ensemble(lay, pack_ensemble(lay, xs, vs, reps))
        aom = (cfg.c_d * cfg.rho_ocean * truth.radii[ids] ** 2) / floe_mass(
            cfg.rho, truth.radii[ids], cfg.h)
        rngs = [member_forecast_rng(cfg.seed, m) for m in range(cfg.N_e)]
        obs_model = ObsModel(np.arange(n_f), cfg.sigma_obs)
        worst = 0.0
        for k in range(1, cfg.n_cycles + 1):
            ens = forecast(ens, modes, params, aom, cfg.dt_obs, cfg.substeps, rngs)
            ens = etkf_analysis(ens, obs.y[k][0], obs_model, cfg.inflation)
            mean_reps = unpack_ensemble(lay, ens.members)[2].mean(axis=0)
            ref = eval_velocity_grid(ModeState.from_pairs(modes, mean_reps), cfg.grid_n)
            worst = max(worst, float(np.max(np.abs(res.fused_fields[k].values - ref.values))))
        elapsed = time.perf_counter() - t0
        announce("baseline equivalence", worst < 1e-10 and elapsed < 60,
                 f"max field deviation {worst:.2e}, {elapsed:.1f}s")

    def test_drag_floe_invariants(self):
        t0 = time.perf_counter()
        zero = drag_force([0.7, -0.4], [0.7, -0.4], 2.0)
        ok_zero = np.all(zero == 0)

        # monotone relaxation to a constant current
        m = build_mode_set(1)
        reps = np.zeros(m.n_pairs, dtype=complex)
        reps[0] = 0.5
        idx = m.pair_rep[0]
        constant_ocean = ModeState.from_pairs(m, reps)
        s = FloeState(x=np.array([[np.pi / 2, 0.0]]), v=np.array([[0.0, 0.0]]),
                      r=np.array([1.0]), m=np.array([np.pi]), alpha=np.array([20.0]))
        ok_mono = True
        err_prev = np.inf
        for _ in range(300):
            u_here = eval_velocity(constant_ocean, s.x)[0]
            err = np.linalg.norm(u_here - s.v[0])
            ok_mono = ok_mono and err <= err_prev + 1e-12
            err_prev = err
            s = step_floes(s, constant_ocean, 1e-2)

        # positions stay wrapped under an eddying ocean
        rng = np.random.default_rng(0)
        ocean = sample_stationary_state(build_mode_set(2), ModeParams(d=0.5, sigma=0.6), rng)
        L = 40
        radii = np.full(L, 1.0)
        st = FloeState(x=rng.uniform(0, TWO_PI, (L, 2)), v=rng.normal(0, 2, (L, 2)),
                       r=radii, m=floe_mass(1, radii, 1), alpha=np.full(L, 1.0))
        ok_wrap = True
        for _ in range(100):
            st = step_floes(st, ocean, 0.02)
            ok_wrap = ok_wrap and np.all(st.x >= 0) and np.all(st.x < TWO_PI)

        r = sample_radii(100_000, 1.3, 0.004, 0.016, np.random.default_rng(42))
        ks = ks_statistic(r, lambda v: powerlaw_cdf(v, 1.3, 0.004, 0.016))
        elapsed = time.perf_counter() - t0
        announce("drag/floe invariants",
                 bool(ok_zero and ok_mono and ok_wrap) and ks < 0.01 and elapsed < 10,
                 f"zero-drag {bool(ok_zero)}, monotone {ok_mono}, wrapped {ok_wrap}, "
                 f"KS {ks:.4f}, {elapsed:.1f}s")

    @pytest.fixture(scope="class")
    def desk_sweep(self):
        t0 = time.perf_counter()
        reports = sweep(RunConfig.desk_scale(), DESK_GRID_SPECS,
                        seeds=(0, 1, 2, 3, 4), workers=2)
        elapsed = time.perf_counter() - t0
        rows = sweep_rows(reports)
        agg = {(r["grid"], r["l_obs"]): r for r in rows if r["seed"] == "mean"}
        return agg, elapsed

    def test_trend_reproduction(self, desk_sweep):
        agg, elapsed = desk_sweep
        lines = []
        for (grid, l_obs), r in sorted(agg.items()):
            lines.append(f"  {grid}@{l_obs}: nrmse={r['nrmse']:.3f} pcc={r['pcc']:.3f} "
                         f"analysis={r['analysis_s']:.2f}s control={r['control_nrmse']:.3f}")
        print("\n".join(["", "desk-scale sweep (seed means):"] + lines))

        # (a) monotone skill in the observation budget within each grid size
        ok_mono = True
        for nx, ny, budgets in DESK_GRID_SPECS:
            grid = f"{nx}x{ny}"
            nr = [agg[(grid, b)]["nrmse"] for b in budgets]
            pc = [agg[(grid, b)]["pcc"] for b in budgets]
            ok_mono = ok_mono and all(a > b for a, b in zip(nr, nr[1:]))
            ok_mono = ok_mono and all(a < b for a, b in zip(pc, pc[1:]))

        # (b) matched total budget: decomposed 2x2@50 vs full-domain 1x1@200
        two = agg[("2x2", 50)]
        one = agg[("1x1", 200)]
        ok_matched = two["nrmse"] <= one["nrmse"] and two["pcc"] >= one["pcc"]

        # (c) decomposed analysis phase beats full-domain at matched budget
        ok_runtime = two["analysis_s"] < one["analysis_s"]

        ok_time = elapsed < 30 * 60
        announce("trend reproduction",
                 ok_mono and ok_matched and ok_runtime and ok_time,
                 f"monotone={ok_mono}, matched-budget 2x2/50 {two['nrmse']:.3f}/{two['pcc']:.3f} vs "
                 f"1x1/200 {one['nrmse']:.3f}/{one['pcc']:.3f} ({ok_matched}), "
                 f"analysis {two['analysis_s']:.2f}s < {one['analysis_s']:.2f}s ({ok_runtime}), "
                 f"sweep {elapsed / 60:.1f} min")

    def test_assimilation_benefit(self, desk_sweep):
        agg, _ = desk_sweep
        failures = [
            f"{grid}@{l_obs} ({r['nrmse']:.3f} >= {r['control_nrmse']:.3f})"
            for (grid, l_obs), r in agg.items() if not r["nrmse"] < r["control_nrmse"]
        ]
        announce("assimilation benefit", not failures,
                 "all configurations beat the forecast-only control"
                 if not failures else "; ".join(failures))
