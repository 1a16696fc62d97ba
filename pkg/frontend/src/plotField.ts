/**
 * Fig-2 style panel figure: recovered and truth velocity fields on top
 * (speed heatmap + quiver arrows), per-node error-magnitude maps below,
 * with one colour scale per row recorded in the SVG metadata.
 */

import { FieldGrid, at, errorMagnitude, speed } from "./fieldfile.js";
import { SvgNode, colormap, document as svgDocument, el, fmt, percentile } from "./svg.js";

const PANEL = 240;
const GAP = 46;
const MARGIN = 50;
const QUIVER_STRIDE = 4;

export interface FieldPanelInput {
  label: string;
  grid: FieldGrid;
}

function heatmap(
  values: (i: number, j: number) => number,
  n: number,
  vmax: number,
  x0: number,
  y0: number,
  cssClass: string,
): SvgNode[] {
  const cell = PANEL / n;
  const rects: SvgNode[] = [];
  for (let i = 0; i < n; i++) {
    for (let j = 0; j < n; j++) {
      const v = values(i, j);
      rects.push(
        el("rect", {
          x: x0 + i * cell,
          // y axis points up: j = 0 at the bottom edge
          y: y0 + PANEL - (j + 1) * cell,
          width: cell + 0.5,
          height: cell + 0.5,
          fill: colormap(vmax > 0 ? v / vmax : 0),
          class: cssClass,
          "data-value": fmt(v),
        }),
      );
    }
  }
  return rects;
}

function quiver(grid: FieldGrid, vmax: number, x0: number, y0: number): SvgNode[] {
  const n = grid.n;
  const cell = PANEL / n;
  const arrows: SvgNode[] = [];
  const scale = (QUIVER_STRIDE * cell) / (vmax > 0 ? vmax : 1) * 0.45;
  for (let i = 0; i < n; i += QUIVER_STRIDE) {
    for (let j = 0; j < n; j += QUIVER_STRIDE) {
      const cx = x0 + (i + 0.5) * cell;
      const cy = y0 + PANEL - (j + 0.5) * cell;
      const dx = at(grid, i, j, 0) * scale;
      const dy = -at(grid, i, j, 1) * scale;
      arrows.push(
        el("line", {
          x1: cx, y1: cy, x2: cx + dx, y2: cy + dy,
          stroke: "#ffffff", "stroke-width": 0.8, opacity: 0.85,
        }),
      );
    }
  }
  return arrows;
}

function panelFrame(x0: number, y0: number, label: string): SvgNode[] {
  return [
    el("rect", {
      x: x0, y: y0, width: PANEL, height: PANEL,
      fill: "none", stroke: "#333333", "stroke-width": 1,
    }),
    el("text", { x: x0 + PANEL / 2, y: y0 - 8, "text-anchor": "middle", "font-size": 13 },
      [], label),
  ];
}

function colorbar(x0: number, y0: number, vmax: number, title: string): SvgNode[] {
  const width = 18;
  const steps = 32;
  const nodes: SvgNode[] = [];
  for (let k = 0; k < steps; k++) {
    nodes.push(
      el("rect", {
        x: x0,
        y: y0 + PANEL - ((k + 1) * PANEL) / steps,
        width,
        height: PANEL / steps + 0.5,
        fill: colormap(k / (steps - 1)),
      }),
    );
  }
  nodes.push(
    el("rect", { x: x0, y: y0, width, height: PANEL, fill: "none", stroke: "#333" }),
    el("text", { x: x0 + width + 6, y: y0 + 10, "font-size": 11 }, [], fmt(vmax)),
    el("text", { x: x0 + width + 6, y: y0 + PANEL, "font-size": 11 }, [], "0.000"),
    el("text", { x: x0 + width / 2, y: y0 - 8, "text-anchor": "middle", "font-size": 12 },
      [], title),
  );
  return nodes;
}

export function renderFieldPanels(truth: FieldPanelInput, estimates: FieldPanelInput[]): string {
  if (!estimates.length) {
    throw new Error("need at least one estimated field");
  }
  const n = truth.grid.n;
  for (const e of estimates) {
    if (e.grid.n !== n) {
      throw new Error(`grid resolution mismatch: ${e.label} has n=${e.grid.n}, truth n=${n}`);
    }
  }

  // top row: estimates with the truth in the middle (Fig.2 ordering)
  const mid = Math.floor(estimates.length / 2);
  const topRow: FieldPanelInput[] = [
    ...estimates.slice(0, mid),
    truth,
    ...estimates.slice(mid),
  ];
  const errors = estimates.map((e) => ({
    label: `error: ${e.label}`,
    values: errorMagnitude(e.grid, truth.grid),
  }));

  const speeds: number[] = [];
  for (const p of topRow) {
    for (let i = 0; i < n; i++) for (let j = 0; j < n; j++) speeds.push(speed(p.grid, i, j));
  }
  const speedMax = percentile(speeds, 0.99);
  const errMax = Math.max(...errors.map((e) => percentile(e.values, 0.99)));

  const cols = Math.max(topRow.length, errors.length + 1);
  const width = MARGIN * 2 + cols * (PANEL + GAP) + 60;
  const height = MARGIN * 2 + 2 * PANEL + GAP + 40;

  const children: SvgNode[] = [];
  const meta = {
    kind: "field-panels",
    grid_n: n,
    time: truth.grid.time,
    speed_scale_p99: speedMax,
    error_scale_p99: errMax,
    panels: topRow.map((p) => p.label),
  };
  children.push(el("metadata", {}, [], JSON.stringify(meta)));

  topRow.forEach((p, idx) => {
    const x0 = MARGIN + idx * (PANEL + GAP);
    const y0 = MARGIN;
    children.push(
      el("g", { class: "field-panel", id: `field-${idx}` }, [
        ...heatmap((i, j) => speed(p.grid, i, j), n, speedMax, x0, y0, "speed-cell"),
        ...quiver(p.grid, speedMax, x0, y0),
        ...panelFrame(x0, y0, p.label),
      ]),
    );
  });
  children.push(...colorbar(MARGIN + topRow.length * (PANEL + GAP), MARGIN, speedMax, "speed"));

  errors.forEach((e, idx) => {
    const x0 = MARGIN + idx * (PANEL + GAP);
    const y0 = MARGIN + PANEL + GAP + 20;
    children.push(
      el("g", { class: "error-panel", id: `error-${idx}` }, [
        ...heatmap((i, j) => e.values[i * n + j], n, errMax, x0, y0, "error-cell"),
        ...panelFrame(x0, y0, e.label),
      ]),
    );
  });
  children.push(
    ...colorbar(
      MARGIN + errors.length * (PANEL + GAP),
      MARGIN + PANEL + GAP + 20,
      errMax,
      "|error|",
    ),
  );

  return svgDocument(width, height, children);
}
