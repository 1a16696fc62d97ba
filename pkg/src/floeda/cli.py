"""Command-line interface for the twin-experiment workflow.

Subcommands: simulate, observe, assimilate, evaluate, sweep, calibrate.
Exit codes: 0 success, 2 configuration/usage error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from floeda.config import ConfigError, RunConfig, load_config
from floeda.domain import partition
from floeda.fieldio import (
    FieldFormatError,
    read_field,
    read_kv,
    read_observations_csv,
    write_field,
    write_kv,
    write_observations_csv,
)
from floeda.fields import FieldGrid
from floeda.harness import (
    DESK_GRID_SPECS,
    NumericalError,
    ObservationSet,
    TruthRun,
    calibrate_amplitude,
    calibrate_drag,
    generate_observations,
    run_assimilation,
    run_truth,
    sweep,
    sweep_rows,
)
from floeda.metrics import nrmse, pcc
from floeda.ocean import build_mode_set

logger = logging.getLogger("floeda")

TRUTH_FIELDS = [
    "k_max", "truncation", "d", "phi", "sigma", "forcing_re", "forcing_im",
    "amp_factor", "L", "alpha_exp", "r_min", "r_max", "rho", "h", "rho_ocean",
    "c_d", "integrator", "dt", "dt_obs", "T",
]

SWEEP_COLUMNS = ["grid", "l_obs", "total_obs", "seed", "nrmse", "pcc", "runtime_s",
                 "forecast_s", "analysis_s", "fusion_s", "control_nrmse", "control_pcc"]


def _truth_signature(config: RunConfig) -> str:
    d = config.to_dict()
    return ";".join(f"{k}={d[k]}" for k in TRUTH_FIELDS)


def save_truth(out_dir: Path, truth: TruthRun) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    np.savez_compressed(
        out_dir / "truth_state.npz",
        times=truth.times, rep_series=truth.rep_series,
        floe_x_series=truth.floe_x_series, radii=truth.radii,
        alpha=truth.alpha, mass=truth.mass,
    )
    write_kv(out_dir / "manifest.txt", {
        "kind": "truth", "seed": truth.seed, "config_hash": truth.config.hash(),
        "truth_signature": _truth_signature(truth.config),
        "n_times": len(truth.times),
    })
    fields_dir = out_dir / "fields"
    fields_dir.mkdir(exist_ok=True)
    for k in range(len(truth.times)):
        write_field(fields_dir / f"field_{k:05d}.bin", truth.field_at(k))


def load_truth(truth_dir: Path, config: RunConfig) -> TruthRun:
    manifest = read_kv(truth_dir / "manifest.txt")
    if manifest.get("truth_signature") != _truth_signature(config):
        raise ConfigError("truth", f"config does not match the truth run in {truth_dir}")
    data = np.load(truth_dir / "truth_state.npz")
    return TruthRun(
        config=config, seed=int(manifest["seed"]),
        modes=build_mode_set(config.k_max, config.truncation),
        times=data["times"], rep_series=data["rep_series"],
        floe_x_series=data["floe_x_series"], radii=data["radii"],
        alpha=data["alpha"], mass=data["mass"],
    )


def save_observations(out_dir: Path, obs_set: ObservationSet, config: RunConfig,
                      seed: int) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    write_observations_csv(out_dir / "observations.csv", obs_set.iter_records())
    manifest = {
        "kind": "observations", "seed": seed, "config_hash": config.hash(),
        "nx": obs_set.layout.nx, "ny": obs_set.layout.ny,
        "l_obs": obs_set.l_obs, "sigma_obs": obs_set.sigma_obs,
        "total_observed": obs_set.total_observed,
        "n_epochs": len(obs_set.epochs),
    }
    for e, (start, ids) in enumerate(obs_set.epochs):
        manifest[f"epoch_{e}_start"] = start
        for s, sel in enumerate(ids):
            manifest[f"epoch_{e}_subdomain_{s}"] = ",".join(str(i) for i in sel)
    for k, s, avail in obs_set.shortfalls:
        manifest[f"shortfall_cycle_{k}_subdomain_{s}"] = avail
    write_kv(out_dir / "manifest.txt", manifest)


def load_observations(obs_dir: Path, config: RunConfig) -> ObservationSet:
    """Rebuild an ObservationSet from the observations CSV and its manifest."""
    manifest = read_kv(obs_dir / "manifest.txt")
    layout = partition(int(manifest["nx"]), int(manifest["ny"]))
    epochs = []
    for e in range(int(manifest["n_epochs"])):
        ids = [
            np.array([int(v) for v in manifest[f"epoch_{e}_subdomain_{s}"].split(",") if v],
                     dtype=np.intp)
            for s in range(layout.count)
        ]
        epochs.append((int(manifest[f"epoch_{e}_start"]), ids))
    times, floe_ids, pos = read_observations_csv(obs_dir / "observations.csv")

    obs_set = ObservationSet(
        layout=layout, l_obs=int(manifest["l_obs"]),
        sigma_obs=float(manifest["sigma_obs"]), times=np.empty(0),
        epochs=epochs, y=[], shortfalls=[],
    )
    t_list = []
    row = 0
    k = 0
    while row < len(times):
        ids = obs_set.ids_at(k)
        t_list.append(times[row])
        yk = []
        for s in range(layout.count):
            n_s = len(ids[s])
            chunk = slice(row, row + n_s)
            if row + n_s > len(times) or not np.array_equal(floe_ids[chunk], ids[s]):
                raise FieldFormatError(
                    f"{obs_dir}: observation rows do not match the manifest selection"
                )
            yk.append(pos[chunk].copy())
            row += n_s
        obs_set.y.append(yk)
        k += 1
    obs_set.times = np.asarray(t_list)
    return obs_set


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="config file (key = value lines)")
    parser.add_argument("--seed", type=int, default=None, help="root seed (default: config)")
    parser.add_argument("--out", type=Path, required=True, help="output directory or file")
    parser.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    parser.add_argument("--format", choices=["csv", "binary"], default="binary",
                        help="field output format")
    parser.add_argument("-v", "--verbose", action="store_true")


def _get_config(args) -> RunConfig:
    if args.config is None:
        return RunConfig.desk_scale()
    return load_config(args.config)


def _field_to_csv(path: Path, grid: FieldGrid) -> None:
    nodes = grid.nodes
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "u", "v"])
        for i in range(grid.n):
            for j in range(grid.n):
                writer.writerow([f"{nodes[i]:.10g}", f"{nodes[j]:.10g}",
                                 f"{grid.values[i, j, 0]:.17g}", f"{grid.values[i, j, 1]:.17g}"])


def cmd_simulate(args) -> int:
    config = _get_config(args)
    seed = config.seed if args.seed is None else args.seed
    truth = run_truth(config, seed)
    save_truth(args.out, truth)
    if args.format == "csv":
        _field_to_csv(args.out / "field_final.csv", truth.field_at(len(truth.times) - 1))
    logger.info("truth run written to %s (%d snapshots)", args.out, len(truth.times))
    return 0


def cmd_observe(args) -> int:
    config = _get_config(args)
    if args.truth is None:
        raise ConfigError("truth", "--truth directory is required")
    truth = load_truth(args.truth, config)
    seed = truth.seed if args.seed is None else args.seed
    obs_set = generate_observations(truth, config, seed)
    save_observations(args.out, obs_set, config, seed)
    logger.info("observations written to %s (%d floes per time)",
                args.out, obs_set.total_observed)
    return 0


def cmd_assimilate(args) -> int:
    config = _get_config(args)
    truth = load_truth(args.truth, config)
    seed = truth.seed if args.seed is None else args.seed
    obs_manifest = read_kv(args.obs / "manifest.txt")
    if obs_manifest.get("config_hash") != config.hash():
        raise ConfigError("obs", f"observations in {args.obs} were made with a different config")
    obs_set = load_observations(args.obs, config)
    result = run_assimilation(config, obs_set, truth, seed, workers=args.workers)

    args.out.mkdir(parents=True, exist_ok=True)
    fields_dir = args.out / "fields"
    fields_dir.mkdir(exist_ok=True)
    ks = range(len(result.fused_fields)) if args.fields == "all" else [len(result.fused_fields) - 1]
    for k in ks:
        write_field(fields_dir / f"recovered_{k:05d}.bin", result.fused_fields[k])
        if args.format == "csv":
            _field_to_csv(fields_dir / f"recovered_{k:05d}.csv", result.fused_fields[k])
    write_kv(args.out / "report.txt", result.report.to_mapping())
    logger.info("nrmse=%.4f pcc=%.4f (control %.4f)", result.report.nrmse_final,
                result.report.pcc_final, result.report.control_nrmse_final)
    print(f"nrmse={result.report.nrmse_final:.4f} pcc={result.report.pcc_final:.4f} "
          f"runtime={result.report.runtime_s:.2f}s")
    return 0


def cmd_evaluate(args) -> int:
    truth = read_field(args.truth)
    rows = []
    for est_path in args.est:
        est = read_field(est_path)
        rows.append((est_path, nrmse(est, truth), pcc(est, truth)))
    for path, e_nrmse, e_pcc in rows:
        print(f"{path}: nrmse={e_nrmse:.6f} pcc={e_pcc:.6f}")
    if args.out is not None:
        report = {}
        for path, e_nrmse, e_pcc in rows:
            stem = Path(path).stem
            report[f"{stem}_nrmse"] = f"{e_nrmse:.6f}"
            report[f"{stem}_pcc"] = f"{e_pcc:.6f}"
        write_kv(args.out, report)
    return 0


def parse_grid_specs(text: str):
    """e.g. '1x1:20,50,100,200;2x2:10,20,50,100' -> [(1, 1, [20, 50, 100, 200]), ...]"""
    specs = []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        grid, _, budgets = part.partition(":")
        nx, _, ny = grid.lower().partition("x")
        try:
            specs.append((int(nx), int(ny), [int(b) for b in budgets.split(",") if b.strip()]))
        except ValueError as exc:
            raise ConfigError("grids", f"cannot parse grid spec {part!r}") from exc
        if not specs[-1][2]:
            raise ConfigError("grids", f"grid spec {part!r} lists no budgets")
    return specs


def write_sweep_csv(path: Path, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=SWEEP_COLUMNS)
        writer.writeheader()
        for row in rows:
            out = dict(row)
            for key in SWEEP_COLUMNS:
                if isinstance(out[key], float):
                    out[key] = f"{out[key]:.6f}"
            writer.writerow(out)


def cmd_sweep(args) -> int:
    config = _get_config(args)
    seeds = [int(s) for s in args.seeds.split(",") if s.strip()]
    specs = parse_grid_specs(args.grids) if args.grids else DESK_GRID_SPECS
    reports = sweep(config, specs, seeds=seeds, workers=args.workers)
    rows = sweep_rows(reports)
    args.out.mkdir(parents=True, exist_ok=True)
    write_sweep_csv(args.out / "results.csv", rows)
    for r in reports:
        write_kv(args.out / f"report_{r.grid}_l{r.l_obs}_s{r.seed}.txt", r.to_mapping())
    print(f"{len(reports)} runs -> {args.out / 'results.csv'}")
    return 0


def cmd_calibrate(args) -> int:
    config = _get_config(args)
    seed = config.seed if args.seed is None else args.seed
    amp = calibrate_amplitude(config, target=args.target_ocean, seed=seed)
    drag = calibrate_drag(config.replace(amp_factor=amp * config.amp_factor),
                          target=args.target_ice, seed=seed)
    report = {
        "amp_factor": f"{amp * config.amp_factor:.6f}",
        "ocean_speed_target": args.target_ocean,
        "best_c_d": drag["best_c_d"],
        "achieved_max_floe_speed": f"{drag['achieved']:.4f}",
        "ice_speed_target": drag["target"],
    }
    for entry in drag["candidates"]:
        report[f"c_d_{entry['c_d']:g}_max_speed"] = f"{entry['max_floe_speed']:.4f}"
    for key, val in report.items():
        print(f"{key} = {val}")
    if args.out is not None:
        write_kv(args.out, report)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="floeda", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a truth run")
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("observe", help="synthesise noisy floe-position observations")
    _add_common(p)
    p.add_argument("--truth", type=Path, required=True, help="truth run directory")
    p.set_defaults(func=cmd_observe)

    p = sub.add_parser("assimilate", help="run the domain-decomposed assimilation")
    _add_common(p)
    p.add_argument("--truth", type=Path, required=True)
    p.add_argument("--obs", type=Path, required=True, help="observations directory")
    p.add_argument("--fields", choices=["final", "all"], default="all",
                   help="which recovered fields to write")
    p.set_defaults(func=cmd_assimilate)

    p = sub.add_parser("evaluate", help="score recovered fields against a truth field")
    p.add_argument("--truth", type=Path, required=True, help="truth field file")
    p.add_argument("--est", type=Path, nargs="+", required=True)
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", help="grid-size x observation-budget experiment table")
    _add_common(p)
    p.add_argument("--seeds", default="0,1,2,3,4")
    p.add_argument("--grids", default=None,
                   help="e.g. '1x1:20,50,100,200;2x2:10,20,50,100'")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("calibrate", help="amplitude/drag calibration to speed targets")
    _add_common(p)
    p.add_argument("--target-ocean", type=float, default=2.0)
    p.add_argument("--target-ice", type=float, default=5.0)
    p.set_defaults(func=cmd_calibrate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if getattr(args, "verbose", False) else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FieldFormatError as exc:
        print(f"file format error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"missing input: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
