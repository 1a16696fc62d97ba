/**
 * Table-3 style outputs: a markdown summary table plus line charts of
 * NRMSE, PCC and runtime against the per-subdomain observation budget,
 * one series per grid size.
 */

import { SweepRow, summaryRows } from "./sweepcsv.js";
import { SvgNode, document as svgDocument, el, fmt } from "./svg.js";

const SERIES_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

export function markdownTable(rows: SweepRow[]): string {
  const summary = summaryRows(rows);
  const lines = [
    "| Grid size | L_obs (floe/subdom.) | NRMSE | PCC | Runtime (10^3 s) |",
    "|---|---|---|---|---|",
  ];
  const ordered = [...summary].sort((a, b) =>
    a.grid === b.grid ? a.l_obs - b.l_obs : a.grid.localeCompare(b.grid),
  );
  for (const r of ordered) {
    lines.push(
      `| ${r.grid} | ${r.l_obs} | ${r.nrmse.toFixed(2)} | ${r.pcc.toFixed(2)} | ` +
      `${(r.runtime_s / 1000).toFixed(4)} |`,
    );
  }
  return lines.join("\n") + "\n";
}

interface ChartSpec {
  metric: (r: SweepRow) => number;
  title: string;
  decreasingIsBetter: boolean;
}

function chart(rows: SweepRow[], spec: ChartSpec): string {
  const summary = summaryRows(rows);
  const grids = [...new Set(summary.map((r) => r.grid))].sort();
  const xs = summary.map((r) => r.l_obs);
  const ys = summary.map(spec.metric);
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs);
  const yMin = Math.min(0, ...ys);
  const yMax = Math.max(...ys) * 1.05 || 1;

  const W = 520;
  const H = 360;
  const M = { left: 64, right: 140, top: 40, bottom: 48 };
  const px = (x: number) =>
    M.left + ((x - xMin) / Math.max(xMax - xMin, 1e-12)) * (W - M.left - M.right);
  const py = (y: number) =>
    H - M.bottom - ((y - yMin) / Math.max(yMax - yMin, 1e-12)) * (H - M.top - M.bottom);

  const children: SvgNode[] = [
    el("metadata", {}, [], JSON.stringify({
      kind: "sweep-chart", metric: spec.title, grids, y_range: [yMin, yMax],
    })),
    el("text", { x: W / 2, y: 22, "text-anchor": "middle", "font-size": 15 }, [],
      `${spec.title} ${spec.decreasingIsBetter ? "(lower is better)" : "(higher is better)"}`),
    el("line", { x1: M.left, y1: H - M.bottom, x2: W - M.right, y2: H - M.bottom,
                 stroke: "#333" }),
    el("line", { x1: M.left, y1: M.top, x2: M.left, y2: H - M.bottom, stroke: "#333" }),
    el("text", { x: (M.left + W - M.right) / 2, y: H - 12, "text-anchor": "middle",
                 "font-size": 12 }, [], "observations per subdomain"),
  ];

  for (let tick = 0; tick <= 4; tick++) {
    const v = yMin + ((yMax - yMin) * tick) / 4;
    children.push(
      el("line", { x1: M.left - 4, y1: py(v), x2: W - M.right, y2: py(v),
                   stroke: "#dddddd" }),
      el("text", { x: M.left - 8, y: py(v) + 4, "text-anchor": "end", "font-size": 11 },
        [], fmt(v)),
    );
  }

  grids.forEach((grid, gi) => {
    const series = summary
      .filter((r) => r.grid === grid)
      .sort((a, b) => a.l_obs - b.l_obs);
    const color = SERIES_COLORS[gi % SERIES_COLORS.length];
    const path = series
      .map((r, i) => `${i ? "L" : "M"}${fmt(px(r.l_obs))},${fmt(py(spec.metric(r)))}`)
      .join(" ");
    children.push(el("path", { d: path, fill: "none", stroke: color, "stroke-width": 2 }));
    for (const r of series) {
      children.push(
        el("circle", {
          cx: px(r.l_obs), cy: py(spec.metric(r)), r: 3.5, fill: color,
          "data-grid": grid, "data-l-obs": r.l_obs, "data-value": fmt(spec.metric(r)),
        }),
      );
      children.push(
        el("text", { x: px(r.l_obs), y: H - M.bottom + 16, "text-anchor": "middle",
                     "font-size": 10 }, [], String(r.l_obs)),
      );
    }
    children.push(
      el("line", { x1: W - M.right + 12, y1: M.top + 18 * gi, x2: W - M.right + 34,
                   y2: M.top + 18 * gi, stroke: color, "stroke-width": 2 }),
      el("text", { x: W - M.right + 40, y: M.top + 18 * gi + 4, "font-size": 12 },
        [], grid),
    );
  });

  return svgDocument(W, H, children);
}

export function renderSweepCharts(rows: SweepRow[]): Record<string, string> {
  return {
    "sweep_nrmse.svg": chart(rows, {
      metric: (r) => r.nrmse, title: "NRMSE", decreasingIsBetter: true,
    }),
    "sweep_pcc.svg": chart(rows, {
      metric: (r) => r.pcc, title: "PCC", decreasingIsBetter: false,
    }),
    "sweep_runtime.svg": chart(rows, {
      metric: (r) => r.runtime_s, title: "runtime [s]", decreasingIsBetter: true,
    }),
    "sweep_table.md": markdownTable(rows),
  };
}
