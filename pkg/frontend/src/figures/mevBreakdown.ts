/**
 * Where the extractable value went: stacked 100%-bars of the user /
 * producer / uncaptured split, one panel per mode, one bar per run.
 *
 * The split lives in slots.csv. The input directory is either a single
 * run (slots.csv at the top level) or a directory of runs (each child
 * holding its own slots.csv); config.json, when present, labels the
 * bar with the run's attack-user count.
 */

import { existsSync, readdirSync, readFileSync } from "node:fs";
import { join } from "node:path";
import { readTable, Row, SchemaError, SLOTS } from "../csv.js";
import { COLOR, el, El, render, text } from "../svg.js";

interface RunShare {
  label: string;
  order: number;
  mode: string;
  user: number;       // percent
  producer: number;
  uncaptured: number;
}

function findRuns(inDir: string): { name: string; dir: string }[] {
  if (existsSync(join(inDir, "slots.csv"))) return [{ name: ".", dir: inDir }];
  const runs = readdirSync(inDir, { withFileTypes: true })
    .filter((d) => d.isDirectory() && existsSync(join(inDir, d.name, "slots.csv")))
    .map((d) => ({ name: d.name, dir: join(inDir, d.name) }))
    .sort((a, b) => (a.name < b.name ? -1 : 1));
  if (runs.length === 0) {
    throw new SchemaError("slots.csv not found in the input directory or its children");
  }
  return runs;
}

function runShare(name: string, dir: string): RunShare {
  const rows = readTable(join(dir, "slots.csv"), `${name}/slots.csv`, SLOTS);
  let user = 0, producer = 0, uncaptured = 0;
  for (const r of rows) {
    if (r.skipped === 1) continue;
    for (const [col, v] of [["mev_user", r.mev_user], ["mev_producer", r.mev_producer],
                            ["mev_uncaptured", r.mev_uncaptured]] as const) {
      if ((v as number) < 0) {
        throw new SchemaError(`${name}/slots.csv: column "${col}" has a negative value`);
      }
    }
    user += r.mev_user as number;
    producer += r.mev_producer as number;
    uncaptured += r.mev_uncaptured as number;
  }
  const mode = rows.length > 0 ? (rows[0].mode as string) : "epbs";
  let label = name;
  let order = Number.MAX_SAFE_INTEGER;
  const cfgPath = join(dir, "config.json");
  if (existsSync(cfgPath)) {
    try {
      const cfg = JSON.parse(readFileSync(cfgPath, "utf-8"));
      if (typeof cfg.attack_user_count === "number") {
        label = String(cfg.attack_user_count);
        order = cfg.attack_user_count;
      }
    } catch {
      // unlabeled bar is better than a dead figure
    }
  }
  const total = user + producer + uncaptured;
  if (total === 0) {
    // nothing carried extractable value: everything counts as left behind
    return { label, order, mode, user: 0, producer: 0, uncaptured: 100 };
  }
  const share = { label, order, mode, user: (100 * user) / total,
                  producer: (100 * producer) / total, uncaptured: (100 * uncaptured) / total };
  const sum = share.user + share.producer + share.uncaptured;
  if (Math.abs(sum - 100) > 1e-6) {
    throw new SchemaError(`${name}/slots.csv: MEV shares sum to ${sum}, expected 100`);
  }
  return share;
}

const BAR_W = 64;
const BAR_GAP = 26;
const PANEL_H = 280;
const PANEL_TOP = 64;

function panel(x0: number, mode: string, shares: RunShare[]): El[] {
  const kids: El[] = [
    text(x0 + (shares.length * (BAR_W + BAR_GAP)) / 2, PANEL_TOP - 18, mode,
         { "text-anchor": "middle", "font-size": 14, "font-weight": "bold", fill: COLOR.axis }),
  ];
  shares.forEach((s, i) => {
    const x = x0 + i * (BAR_W + BAR_GAP);
    let y = PANEL_TOP;
    for (const [key, color] of [["user", COLOR.user], ["producer", COLOR.producer],
                                ["uncaptured", COLOR.uncaptured]] as const) {
      const h = (PANEL_H * s[key]) / 100;
      kids.push(el("rect", {
        class: `seg-${key}`, x, y, width: BAR_W, height: Math.max(h, 0),
        fill: color, stroke: "#ffffff",
      }));
      if (h > 16) {
        kids.push(text(x + BAR_W / 2, y + h / 2 + 4, `${Math.round(s[key] * 10) / 10}`,
                       { "text-anchor": "middle", "font-size": 11, fill: "#ffffff" }));
      }
      y += h;
    }
    kids.push(text(x + BAR_W / 2, PANEL_TOP + PANEL_H + 18, s.label,
                   { "text-anchor": "middle", "font-size": 12, fill: COLOR.axis }));
  });
  return kids;
}

export function mevBreakdown(inDir: string): Map<string, string> {
  const shares = findRuns(inDir).map((r) => runShare(r.name, r.dir));
  const modes = [...new Set(shares.map((s) => s.mode))].sort();
  const kids: El[] = [];
  let x = 70;
  for (const mode of modes) {
    const panelShares = shares.filter((s) => s.mode === mode)
      .sort((a, b) => a.order - b.order || (a.label < b.label ? -1 : 1));
    kids.push(el("g", { class: "panel" }, ...panel(x, mode, panelShares)));
    x += panelShares.length * (BAR_W + BAR_GAP) + 50;
  }
  const width = x;
  const height = PANEL_TOP + PANEL_H + 76;
  kids.push(text(70, 24, "share of extractable value, percent",
                 { "font-size": 15, "font-weight": "bold", fill: COLOR.axis }));
  kids.push(text(70, 42, "bars: attacking-user count per run",
                 { "font-size": 11, fill: "#777777" }));
  const legend: [string, string][] = [
    ["captured by users", COLOR.user],
    ["captured by producer", COLOR.producer],
    ["uncaptured", COLOR.uncaptured],
  ];
  legend.forEach(([label, color], i) => {
    const y = height - 22;
    const lx = 70 + i * 180;
    kids.push(el("rect", { x: lx, y: y - 10, width: 12, height: 12, fill: color }));
    kids.push(text(lx + 18, y, label, { "font-size": 11, fill: COLOR.axis }));
  });
  return new Map([["mev_breakdown.svg", render(Math.max(width, 620), height, kids)]]);
}
