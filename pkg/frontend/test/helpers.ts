/** Test fixtures: build FGRD buffers the same way the harness writes them. */

export function encodeField(
  n: number,
  ncomp: number,
  time: number,
  values: Float64Array,
): Buffer {
  const buf = Buffer.alloc(32 + 8 * values.length);
  buf.write("FGRD", 0, "latin1");
  buf.writeUInt32LE(1, 4);
  buf.writeUInt32LE(n, 8);
  buf.writeUInt32LE(ncomp, 12);
  buf.writeDoubleLE(time, 16);
  for (let k = 0; k < values.length; k++) {
    buf.writeDoubleLE(values[k], 32 + 8 * k);
  }
  return buf;
}

export function sineField(n: number, amp = 1.0, time = 0.0): Buffer {
  const values = new Float64Array(n * n * 2);
  for (let i = 0; i < n; i++) {
    for (let j = 0; j < n; j++) {
      const x = (2 * Math.PI * i) / n;
      const y = (2 * Math.PI * j) / n;
      values[(i * n + j) * 2] = amp * Math.sin(y);
      values[(i * n + j) * 2 + 1] = amp * Math.sin(x);
    }
  }
  return encodeField(n, 2, time, values);
}

export const SWEEP_HEADER =
  "grid,l_obs,total_obs,seed,nrmse,pcc,runtime_s,forecast_s,analysis_s,fusion_s," +
  "control_nrmse,control_pcc";

export function sweepCsv(rows: string[]): string {
  return [SWEEP_HEADER, ...rows].join("\n") + "\n";
}
