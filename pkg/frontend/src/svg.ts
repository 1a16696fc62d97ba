/** Minimal deterministic SVG assembly: no DOM, plain string building. */

export interface SvgNode {
  tag: string;
  attrs: Record<string, string | number>;
  children?: SvgNode[];
  text?: string;
}

export function el(
  tag: string,
  attrs: Record<string, string | number> = {},
  children: SvgNode[] = [],
  text?: string,
): SvgNode {
  return { tag, attrs, children, text };
}

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function render(node: SvgNode, indent = 0): string {
  const pad = "  ".repeat(indent);
  const attrs = Object.entries(node.attrs)
    .map(([k, v]) => `${k}="${typeof v === "number" ? fmt(v) : v}"`)
    .join(" ");
  const open = attrs.length ? `<${node.tag} ${attrs}` : `<${node.tag}`;
  const kids = node.children ?? [];
  if (!kids.length && node.text === undefined) {
    return `${pad}${open}/>`;
  }
  const inner = [
    ...(node.text !== undefined ? [`${"  ".repeat(indent + 1)}${esc(node.text)}`] : []),
    ...kids.map((c) => render(c, indent + 1)),
  ].join("\n");
  return `${pad}${open}>\n${inner}\n${pad}</${node.tag}>`;
}

export function fmt(x: number): string {
  if (!isFinite(x)) return "0";
  const s = x.toFixed(3);
  return s === "-0.000" ? "0.000" : s;
}

export function document(width: number, height: number, children: SvgNode[]): string {
  const root = el(
    "svg",
    {
      xmlns: "http://www.w3.org/2000/svg",
      width,
      height,
      viewBox: `0 0 ${width} ${height}`,
      "font-family": "Helvetica, Arial, sans-serif",
    },
    [el("rect", { x: 0, y: 0, width, height, fill: "#ffffff" }), ...children],
  );
  return `<?xml version="1.0" encoding="UTF-8"?>\n${render(root)}\n`;
}

/** Perceptually ordered colormap (viridis control points, linear interpolation). */
const VIRIDIS: Array<[number, number, number]> = [
  [68, 1, 84], [71, 44, 122], [59, 81, 139], [44, 113, 142], [33, 144, 141],
  [39, 173, 129], [92, 200, 99], [170, 220, 50], [253, 231, 37],
];

export function colormap(t: number): string {
  const x = Math.min(Math.max(t, 0), 1) * (VIRIDIS.length - 1);
  const lo = Math.floor(x);
  const hi = Math.min(lo + 1, VIRIDIS.length - 1);
  const f = x - lo;
  const c = VIRIDIS[lo].map((a, k) => Math.round(a + f * (VIRIDIS[hi][k] - a)));
  return `rgb(${c[0]},${c[1]},${c[2]})`;
}

export function percentile(values: Float64Array | number[], q: number): number {
  const sorted = Array.from(values).sort((a, b) => a - b);
  if (!sorted.length) return 0;
  const pos = (sorted.length - 1) * q;
  const lo = Math.floor(pos);
  const hi = Math.ceil(pos);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo);
}
