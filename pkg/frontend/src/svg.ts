/**
 * Tiny SVG element tree, just enough for the four figures.
 *
 * Rendering is a pure function of the element tree: no dates, no
 * randomness, fixed number formatting, so identical inputs give
 * byte-identical files.
 */

export interface El {
  tag: string;
  attrs: Record<string, string | number>;
  children: (El | string)[];
}

export function el(tag: string, attrs: Record<string, string | number> = {},
                   ...children: (El | string)[]): El {
  return { tag, attrs, children };
}

export function text(x: number, y: number, s: string,
                     attrs: Record<string, string | number> = {}): El {
  return el("text", { x: fmt(x), y: fmt(y), "font-family": "sans-serif", ...attrs }, s);
}

export function escapeXml(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Fixed-precision coordinates keep output stable across platforms. */
export function fmt(v: number): string {
  const r = Math.round(v * 100) / 100;
  return Object.is(r, -0) ? "0" : String(r);
}

function renderEl(node: El | string, out: string[]): void {
  if (typeof node === "string") {
    out.push(escapeXml(node));
    return;
  }
  const attrs = Object.entries(node.attrs)
    .map(([k, v]) => ` ${k}="${escapeXml(String(v))}"`)
    .join("");
  if (node.children.length === 0) {
    out.push(`<${node.tag}${attrs}/>`);
    return;
  }
  if (node.children.every((c) => typeof c === "string")) {
    const body = node.children.map((c) => escapeXml(c as string)).join("");
    out.push(`<${node.tag}${attrs}>${body}</${node.tag}>`);
    return;
  }
  out.push(`<${node.tag}${attrs}>`);
  for (const child of node.children) renderEl(child, out);
  out.push(`</${node.tag}>`);
}

export function render(width: number, height: number, children: (El | string)[]): string {
  const root = el("svg", {
    xmlns: "http://www.w3.org/2000/svg",
    width, height, viewBox: `0 0 ${width} ${height}`,
  }, el("rect", { width, height, fill: "#ffffff" }), ...children);
  const out: string[] = ['<?xml version="1.0" encoding="UTF-8"?>'];
  renderEl(root, out);
  out.push("");
  return out.join("\n");
}

// -- scales and ticks ---------------------------------------------------

export function linScale(d0: number, d1: number, r0: number, r1: number): (v: number) => number {
  const span = d1 - d0;
  if (span === 0) return () => (r0 + r1) / 2;
  return (v) => r0 + ((v - d0) / span) * (r1 - r0);
}

export function logScale(d0: number, d1: number, r0: number, r1: number): (v: number) => number {
  const lo = Math.log10(Math.max(d0, 1));
  const hi = Math.log10(Math.max(d1, 1));
  const lin = linScale(lo, hi, r0, r1);
  return (v) => lin(Math.log10(Math.max(v, 1)));
}

/** Round ticks covering [min, max]: 1/2/5 steps, at most `count`. */
export function niceTicks(min: number, max: number, count = 5): number[] {
  if (min === max) return [min];
  const raw = (max - min) / count;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  let step = mag;
  for (const m of [1, 2, 5, 10]) {
    if (mag * m >= raw) { step = mag * m; break; }
  }
  const ticks: number[] = [];
  for (let v = Math.ceil(min / step) * step; v <= max + step / 1e6; v += step) {
    ticks.push(Math.round(v / step) * step);
  }
  return ticks;
}

export function tickLabel(v: number): string {
  if (v !== 0 && (Math.abs(v) >= 1e6 || Math.abs(v) < 1e-3)) {
    return v.toExponential(1).replace("e+", "e");
  }
  return String(Math.round(v * 1000) / 1000);
}

// -- shared style -------------------------------------------------------

export const COLOR = {
  attack: "#c0392b",
  benign: "#2e6fb0",
  user: "#e67e22",
  producer: "#8e44ad",
  uncaptured: "#95a5a6",
  axis: "#444444",
  grid: "#dddddd",
};

/** White-to-warm ramp for heatmap cells, t in [0, 1]. */
export function heatColor(t: number): string {
  const c = Math.max(0, Math.min(1, t));
  const r = Math.round(255 - 63 * c);
  const g = Math.round(244 - 170 * c);
  const b = Math.round(235 - 192 * c);
  return `rgb(${r},${g},${b})`;
}
