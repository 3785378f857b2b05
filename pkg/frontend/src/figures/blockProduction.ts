/**
 * Block production split between attacking and benign participants.
 *
 * Two renderings, depending on what the input directory holds:
 *
 * - slots.csv + agents.csv (a single run): cumulative blocks produced
 *   over the run as a stacked area, attack producers against benign.
 * - sweep.csv + agents.csv: one file per mode, a facet per grid cell;
 *   each facet a stacked bar of the producer pool's composition for
 *   that cell (the attack count is the grid coordinate, the pool size
 *   comes from agents.csv), annotated with the cell's producer-profit
 *   Gini. The sweep table carries no per-producer block counts, so the
 *   facet shows composition, not realized shares.
 *
 * When both are present the sweep rendering wins: the grid is the
 * richer input.
 */

import { existsSync } from "node:fs";
import { join } from "node:path";
import { AGENTS, readTable, Row, SchemaError, SLOTS, SWEEP } from "../csv.js";
import { COLOR, el, El, fmt, linScale, niceTicks, render, text, tickLabel } from "../svg.js";

function producingRole(mode: string): string {
  return mode === "pos" ? "validator" : "builder";
}

// -- single run: cumulative production ---------------------------------

function cumulativeChart(slots: Row[], agents: Row[]): Map<string, string> {
  const mode = slots.length > 0 ? (slots[0].mode as string) : "epbs";
  const tauOf = new Map(agents.map((a) => [a.agent_id as number, a.tau as string]));
  let attack = 0, benign = 0;
  const pts: { slot: number; attack: number; total: number }[] = [];
  for (const r of slots) {
    if (r.skipped !== 1) {
      const tau = tauOf.get(r.producer_id as number);
      if (tau === undefined) {
        throw new SchemaError(
          `slots.csv: column "producer_id" value ${r.producer_id} not in agents.csv`);
      }
      if (tau === "attack") attack += 1;
      else benign += 1;
    }
    pts.push({ slot: r.slot as number, attack, total: attack + benign });
  }

  const width = 640, height = 400;
  const M = { top: 56, right: 30, bottom: 52, left: 74 };
  const kids: El[] = [
    text(width / 2, 26, `cumulative blocks by producer type (${mode})`,
         { "text-anchor": "middle", "font-size": 15, "font-weight": "bold", fill: COLOR.axis }),
  ];
  if (pts.length === 0 || pts[pts.length - 1].total === 0) {
    kids.push(text(width / 2, height / 2, "no data: no settled blocks",
                   { "text-anchor": "middle", "font-size": 14, fill: COLOR.axis }));
    return new Map([[`block_production_${mode}.svg`, render(width, height, kids)]]);
  }
  const xs = linScale(pts[0].slot, pts[pts.length - 1].slot, M.left, width - M.right);
  const yMax = pts[pts.length - 1].total;
  const ys = linScale(0, yMax, height - M.bottom, M.top);

  const area = (upper: (p: typeof pts[0]) => number, lower: (p: typeof pts[0]) => number) => {
    const fwd = pts.map((p) => `${fmt(xs(p.slot))},${fmt(ys(upper(p)))}`);
    const back = [...pts].reverse().map((p) => `${fmt(xs(p.slot))},${fmt(ys(lower(p)))}`);
    return fwd.concat(back).join(" ");
  };
  kids.push(el("polygon", { class: "series", points: area((p) => p.attack, () => 0),
                            fill: COLOR.attack, "fill-opacity": 0.85 }));
  kids.push(el("polygon", { class: "series", points: area((p) => p.total, (p) => p.attack),
                            fill: COLOR.benign, "fill-opacity": 0.85 }));

  for (const t of niceTicks(0, yMax, 5)) {
    kids.push(el("line", { x1: M.left, x2: width - M.right, y1: fmt(ys(t)), y2: fmt(ys(t)),
                           stroke: COLOR.grid }));
    kids.push(text(M.left - 8, ys(t) + 4, tickLabel(t),
                   { "text-anchor": "end", "font-size": 11, fill: COLOR.axis }));
  }
  for (const t of niceTicks(pts[0].slot, pts[pts.length - 1].slot, 6)) {
    kids.push(text(xs(t), height - M.bottom + 18, tickLabel(t),
                   { "text-anchor": "middle", "font-size": 11, fill: COLOR.axis }));
  }
  kids.push(text(width / 2, height - 14, "slot",
                 { "text-anchor": "middle", "font-size": 13, fill: COLOR.axis }));
  const lx = M.left + 10;
  kids.push(el("rect", { x: lx, y: M.top + 6, width: 12, height: 12, fill: COLOR.attack }));
  kids.push(text(lx + 18, M.top + 16, "attack producers", { "font-size": 11, fill: COLOR.axis }));
  kids.push(el("rect", { x: lx, y: M.top + 24, width: 12, height: 12, fill: COLOR.benign }));
  kids.push(text(lx + 18, M.top + 34, "benign producers", { "font-size": 11, fill: COLOR.axis }));
  return new Map([[`block_production_${mode}.svg`, render(width, height, kids)]]);
}

// -- sweep grid: pool composition facets --------------------------------

const FACET_W = 120;
const FACET_H = 150;
const FACET_PAD = 26;

function facet(x: number, y: number, attackShare: number, label: string,
               gini: number | null): El {
  const barW = 46;
  const barH = FACET_H - 46;
  const bx = x + (FACET_W - barW) / 2;
  const attackH = barH * attackShare;
  const kids: El[] = [
    el("rect", { class: "seg-benign", x: bx, y: y + 16, width: barW,
                 height: Math.max(barH - attackH, 0), fill: COLOR.benign }),
    el("rect", { class: "seg-attack", x: bx, y: y + 16 + (barH - attackH), width: barW,
                 height: Math.max(attackH, 0), fill: COLOR.attack }),
    text(x + FACET_W / 2, y + 12, label,
         { "text-anchor": "middle", "font-size": 11, fill: COLOR.axis }),
  ];
  if (gini !== null) {
    kids.push(text(x + FACET_W / 2, y + FACET_H - 10, `gini ${Math.round(gini * 100) / 100}`,
                   { "text-anchor": "middle", "font-size": 10, fill: "#777777" }));
  }
  return el("g", { class: "facet" }, ...kids);
}

function sweepCharts(sweep: Row[], agents: Row[]): Map<string, string> {
  const files = new Map<string, string>();
  if (sweep.length === 0) {
    files.set("block_production.svg", render(460, 200, [
      text(230, 105, "no data: sweep.csv has no rows",
           { "text-anchor": "middle", "font-size": 14, fill: COLOR.axis }),
    ]));
    return files;
  }
  for (const mode of [...new Set(sweep.map((r) => r.mode as string))].sort()) {
    const rows = sweep.filter((r) => r.mode === mode);
    const users = [...new Set(rows.map((r) => r.attack_users as number))].sort((a, b) => a - b);
    const builders = [...new Set(rows.map((r) => r.attack_builders as number))].sort((a, b) => a - b);
    const pool = agents.filter((a) => a.role === producingRole(mode)).length;

    const M = { top: 64, left: 40 };
    const width = M.left + builders.length * (FACET_W + FACET_PAD) + 30;
    const height = M.top + users.length * (FACET_H + FACET_PAD) + 40;
    const kids: El[] = [
      text(M.left, 26, `producer pool composition across the attack grid (${mode})`,
           { "font-size": 15, "font-weight": "bold", fill: COLOR.axis }),
      text(M.left, 46, `red: attacking ${producingRole(mode)}s of ${pool}; ` +
           "label: attacking users / producers; gini from producer profits",
           { "font-size": 11, fill: "#777777" }),
    ];
    users.forEach((u, i) => {
      builders.forEach((b, j) => {
        const cell = rows.filter((r) => r.attack_users === u && r.attack_builders === b);
        if (cell.length === 0) return; // ragged sweeps leave a gap, not an error
        const ginis = cell.map((r) => r.gini_producer as number | null)
          .filter((g): g is number => g !== null);
        const gini = ginis.length > 0
          ? ginis.reduce((s, g) => s + g, 0) / ginis.length : null;
        const share = pool > 0 ? Math.min(b / pool, 1) : 0;
        kids.push(facet(M.left + j * (FACET_W + FACET_PAD),
                        M.top + i * (FACET_H + FACET_PAD), share, `u${u} / p${b}`, gini));
      });
    });
    files.set(`block_production_${mode}.svg`, render(width, height, kids));
  }
  return files;
}

export function blockProduction(inDir: string): Map<string, string> {
  const agents = readTable(join(inDir, "agents.csv"), "agents.csv", AGENTS);
  if (existsSync(join(inDir, "sweep.csv"))) {
    return sweepCharts(readTable(join(inDir, "sweep.csv"), "sweep.csv", SWEEP), agents);
  }
  if (existsSync(join(inDir, "slots.csv"))) {
    return cumulativeChart(readTable(join(inDir, "slots.csv"), "slots.csv", SLOTS), agents);
  }
  // agents alone still identifies the split, just without a time axis
  const byTau = new Map<string, number>([["attack", 0], ["benign", 0]]);
  for (const a of agents) {
    byTau.set(a.tau as string, (byTau.get(a.tau as string) ?? 0) + (a.blocks_produced as number));
  }
  const attack = byTau.get("attack") ?? 0;
  const total = attack + (byTau.get("benign") ?? 0);
  const width = 320, height = 360;
  const kids: El[] = [
    text(width / 2, 26, "blocks produced by type",
         { "text-anchor": "middle", "font-size": 15, "font-weight": "bold", fill: COLOR.axis }),
  ];
  if (total === 0) {
    kids.push(text(width / 2, height / 2, "no data: no blocks produced",
                   { "text-anchor": "middle", "font-size": 14, fill: COLOR.axis }));
  } else {
    const barH = 240;
    const attackH = (barH * attack) / total;
    kids.push(el("rect", { class: "seg-benign", x: 120, y: 60, width: 80,
                           height: barH - attackH, fill: COLOR.benign }));
    kids.push(el("rect", { class: "seg-attack", x: 120, y: 60 + barH - attackH, width: 80,
                           height: attackH, fill: COLOR.attack }));
    kids.push(text(width / 2, 330, `attack ${attack} / benign ${total - attack}`,
                   { "text-anchor": "middle", "font-size": 12, fill: COLOR.axis }));
  }
  return new Map([["block_production.svg", render(width, height, kids)]]);
}
