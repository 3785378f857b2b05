/**
 * Per-agent active-stake trajectories from stakes.csv, faceted by
 * (role, tau) when agents.csv sits next to it, one shared facet
 * otherwise. Stake activates in whole 32-ETH steps, so the honest
 * rendering is a staircase; with thousands of slots the series are
 * thinned to at most MAX_PTS points (last point always kept).
 */

import { existsSync } from "node:fs";
import { join } from "node:path";
import { AGENTS, readTable, Row, SchemaError, STAKES } from "../csv.js";
import { COLOR, el, El, fmt, linScale, logScale, niceTicks, render, text, tickLabel } from "../svg.js";

const MAX_PTS = 400;
const FACET_W = 420;
const FACET_H = 240;
const M = { top: 34, right: 16, bottom: 40, left: 86 };

interface Series {
  agent: number;
  pts: { slot: number; stake: number }[];
}

function thin<T>(pts: T[]): T[] {
  if (pts.length <= MAX_PTS) return pts;
  const step = Math.ceil(pts.length / MAX_PTS);
  const out = pts.filter((_, i) => i % step === 0);
  if (out[out.length - 1] !== pts[pts.length - 1]) out.push(pts[pts.length - 1]);
  return out;
}

function collectSeries(rows: Row[]): Map<number, Series> {
  const by = new Map<number, Series>();
  for (const r of rows) {
    const id = r.agent_id as number;
    (by.get(id) ?? by.set(id, { agent: id, pts: [] }).get(id)!)
      .pts.push({ slot: r.slot as number, stake: r.active_stake as number });
  }
  for (const s of by.values()) {
    s.pts.sort((a, b) => a.slot - b.slot);
    s.pts = thin(s.pts);
  }
  return by;
}

function facetChart(x0: number, y0: number, label: string, series: Series[],
                    slotMax: number, stakeMax: number, log: boolean): El {
  const xs = linScale(0, Math.max(slotMax, 1), x0 + M.left, x0 + FACET_W - M.right);
  const yTop = y0 + M.top, yBot = y0 + FACET_H - M.bottom;
  const ys = log ? logScale(1, Math.max(stakeMax, 2), yBot, yTop)
                 : linScale(0, Math.max(stakeMax, 1), yBot, yTop);
  const kids: El[] = [
    text(x0 + M.left, y0 + 18, label,
         { "font-size": 12, "font-weight": "bold", fill: COLOR.axis }),
    el("line", { x1: x0 + M.left, x2: x0 + M.left, y1: yTop, y2: yBot, stroke: COLOR.axis }),
    el("line", { x1: x0 + M.left, x2: x0 + FACET_W - M.right, y1: yBot, y2: yBot,
                 stroke: COLOR.axis }),
  ];
  const yTicks = log
    ? [1e9, 1e10, 1e11, 1e12, 1e13, 1e14].filter((v) => v <= stakeMax * 1.01)
    : niceTicks(0, stakeMax, 4);
  for (const t of yTicks) {
    kids.push(el("line", { x1: x0 + M.left, x2: x0 + FACET_W - M.right,
                           y1: fmt(ys(t)), y2: fmt(ys(t)), stroke: COLOR.grid }));
    kids.push(text(x0 + M.left - 6, ys(t) + 4, tickLabel(t),
                   { "text-anchor": "end", "font-size": 10, fill: COLOR.axis }));
  }
  for (const t of niceTicks(0, slotMax, 4)) {
    kids.push(text(xs(t), yBot + 16, tickLabel(t),
                   { "text-anchor": "middle", "font-size": 10, fill: COLOR.axis }));
  }
  series.forEach((s, i) => {
    const hue = (i * 47) % 360;
    const points = s.pts.map((p) => `${fmt(xs(p.slot))},${fmt(ys(p.stake))}`).join(" ");
    kids.push(el("polyline", {
      class: "series", points, fill: "none",
      stroke: `hsl(${hue},55%,42%)`, "stroke-width": 1.2,
    }));
  });
  return el("g", { class: "facet" }, ...kids);
}

export function stakes(inDir: string, opts: { log?: boolean } = {}): Map<string, string> {
  const rows = readTable(join(inDir, "stakes.csv"), "stakes.csv", STAKES);
  if (rows.length === 0) {
    throw new SchemaError("stakes.csv has no rows");
  }
  const series = collectSeries(rows);

  let facets: { label: string; agents: number[] }[];
  if (existsSync(join(inDir, "agents.csv"))) {
    const agents = readTable(join(inDir, "agents.csv"), "agents.csv", AGENTS);
    const groups = new Map<string, number[]>();
    for (const a of agents) {
      if (!series.has(a.agent_id as number)) continue;
      const key = `${a.role} / ${a.tau}`;
      (groups.get(key) ?? groups.set(key, []).get(key)!).push(a.agent_id as number);
    }
    facets = [...groups.keys()].sort().map((k) => ({ label: k, agents: groups.get(k)! }));
    if (facets.length === 0) {
      throw new SchemaError('agents.csv: column "agent_id" shares no ids with stakes.csv');
    }
  } else {
    facets = [{ label: "all agents", agents: [...series.keys()].sort((a, b) => a - b) }];
  }

  const slotMax = Math.max(...rows.map((r) => r.slot as number));
  const stakeMax = Math.max(...rows.map((r) => r.active_stake as number));
  const cols = Math.min(facets.length, 2);
  const rowsN = Math.ceil(facets.length / cols);
  const width = 40 + cols * (FACET_W + 20);
  const height = 56 + rowsN * (FACET_H + 20);
  const kids: El[] = [
    text(40, 26, `active stake per agent, gwei${opts.log ? " (log scale)" : ""}`,
         { "font-size": 15, "font-weight": "bold", fill: COLOR.axis }),
    text(width - 30, height - 10, "x: slot",
         { "text-anchor": "end", "font-size": 11, fill: "#777777" }),
  ];
  facets.forEach((f, i) => {
    const fx = 40 + (i % cols) * (FACET_W + 20);
    const fy = 44 + Math.floor(i / cols) * (FACET_H + 20);
    kids.push(facetChart(fx, fy, f.label,
                         f.agents.map((a) => series.get(a)!).filter(Boolean),
                         slotMax, stakeMax, opts.log === true));
  });
  return new Map([["stakes.svg", render(width, height, kids)]]);
}
