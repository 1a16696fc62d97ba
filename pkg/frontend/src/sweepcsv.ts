/** Parser for the harness sweep results table (results.csv). */

import { readFileSync } from "fs";

export const SWEEP_COLUMNS = [
  "grid", "l_obs", "total_obs", "seed", "nrmse", "pcc", "runtime_s",
  "forecast_s", "analysis_s", "fusion_s", "control_nrmse", "control_pcc",
] as const;

export interface SweepRow {
  grid: string;
  l_obs: number;
  total_obs: number;
  seed: string;
  nrmse: number;
  pcc: number;
  runtime_s: number;
  forecast_s: number;
  analysis_s: number;
  fusion_s: number;
  control_nrmse: number;
  control_pcc: number;
}

export class SweepFormatError extends Error {}

export function parseSweepCsv(text: string, label = "results.csv"): SweepRow[] {
  const lines = text.split(/\r?\n/).filter((ln) => ln.trim().length > 0);
  if (!lines.length) {
    throw new SweepFormatError(`${label}: empty file`);
  }
  const header = lines[0].split(",").map((s) => s.trim());
  if (header.join(",") !== SWEEP_COLUMNS.join(",")) {
    throw new SweepFormatError(
      `${label}: unexpected header ${JSON.stringify(header.join(","))}`,
    );
  }
  if (lines.length === 1) {
    throw new SweepFormatError(`${label}: no data rows`);
  }
  const rows: SweepRow[] = [];
  for (const [idx, line] of lines.slice(1).entries()) {
    const parts = line.split(",").map((s) => s.trim());
    if (parts.length !== SWEEP_COLUMNS.length) {
      throw new SweepFormatError(`${label}: row ${idx + 2} has ${parts.length} fields`);
    }
    const num = (name: string, value: string): number => {
      const x = Number(value);
      if (!isFinite(x)) {
        throw new SweepFormatError(`${label}: row ${idx + 2}: bad ${name} ${value}`);
      }
      return x;
    };
    rows.push({
      grid: parts[0],
      l_obs: num("l_obs", parts[1]),
      total_obs: num("total_obs", parts[2]),
      seed: parts[3],
      nrmse: num("nrmse", parts[4]),
      pcc: num("pcc", parts[5]),
      runtime_s: num("runtime_s", parts[6]),
      forecast_s: num("forecast_s", parts[7]),
      analysis_s: num("analysis_s", parts[8]),
      fusion_s: num("fusion_s", parts[9]),
      control_nrmse: num("control_nrmse", parts[10]),
      control_pcc: num("control_pcc", parts[11]),
    });
  }
  return rows;
}

export function readSweepCsv(path: string): SweepRow[] {
  return parseSweepCsv(readFileSync(path, "utf-8"), path);
}

/** Seed-aggregated rows when present, otherwise everything. */
export function summaryRows(rows: SweepRow[]): SweepRow[] {
  const means = rows.filter((r) => r.seed === "mean");
  return means.length ? means : rows;
}
