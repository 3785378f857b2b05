/**
 * Heatmap of mean inversions per block over the attack-count grid,
 * one file per mode found in sweep.csv. Replicates of a cell are
 * averaged. The grid must be rectangular: every (attack_users,
 * attack_builders) combination present for the mode.
 */

import { join } from "node:path";
import { readTable, Row, SchemaError, SWEEP } from "../csv.js";
import { COLOR, el, El, heatColor, render, text, tickLabel } from "../svg.js";

const CELL_W = 78;
const CELL_H = 52;
const MARGIN = { top: 56, right: 30, bottom: 64, left: 104 };

function uniqueSorted(rows: Row[], key: string): number[] {
  return [...new Set(rows.map((r) => r[key] as number))].sort((a, b) => a - b);
}

function cellMeans(rows: Row[], mode: string): { users: number[]; builders: number[]; mean: Map<string, number> } {
  const users = uniqueSorted(rows, "attack_users");
  const builders = uniqueSorted(rows, "attack_builders");
  const acc = new Map<string, number[]>();
  for (const r of rows) {
    const v = r.mean_inversions;
    if (v === null) {
      throw new SchemaError(`sweep.csv: column "mean_inversions" is empty for mode "${mode}"`);
    }
    const k = `${r.attack_users},${r.attack_builders}`;
    (acc.get(k) ?? acc.set(k, []).get(k)!).push(v as number);
  }
  const mean = new Map<string, number>();
  for (const u of users) {
    for (const b of builders) {
      const vals = acc.get(`${u},${b}`);
      if (!vals) {
        throw new SchemaError(
          `sweep.csv: non-rectangular grid for mode "${mode}": ` +
          `missing cell attack_users=${u} attack_builders=${b}`);
      }
      mean.set(`${u},${b}`, vals.reduce((s, x) => s + x, 0) / vals.length);
    }
  }
  return { users, builders, mean };
}

function chart(rows: Row[], mode: string): string {
  const { users, builders, mean } = cellMeans(rows, mode);
  const width = MARGIN.left + builders.length * CELL_W + MARGIN.right;
  const height = MARGIN.top + users.length * CELL_H + MARGIN.bottom;
  const vals = [...mean.values()];
  const lo = Math.min(...vals);
  const hi = Math.max(...vals);
  const norm = (v: number) => (hi === lo ? 0.5 : (v - lo) / (hi - lo));

  const kids: El[] = [
    text(width / 2, 26, `mean inversions per block (${mode})`,
         { "text-anchor": "middle", "font-size": 15, "font-weight": "bold", fill: COLOR.axis }),
  ];
  users.forEach((u, i) => {
    builders.forEach((b, j) => {
      const x = MARGIN.left + j * CELL_W;
      const y = MARGIN.top + i * CELL_H;
      const v = mean.get(`${u},${b}`)!;
      kids.push(el("rect", {
        class: "cell", x, y, width: CELL_W - 2, height: CELL_H - 2,
        fill: heatColor(norm(v)), stroke: "#ffffff",
      }));
      kids.push(text(x + (CELL_W - 2) / 2, y + CELL_H / 2 + 4, tickLabel(Math.round(v * 10) / 10),
                     { "text-anchor": "middle", "font-size": 12, fill: "#222222" }));
    });
    kids.push(text(MARGIN.left - 10, MARGIN.top + i * CELL_H + CELL_H / 2 + 4, String(u),
                   { "text-anchor": "end", "font-size": 12, fill: COLOR.axis }));
  });
  builders.forEach((b, j) => {
    kids.push(text(MARGIN.left + j * CELL_W + (CELL_W - 2) / 2,
                   MARGIN.top + users.length * CELL_H + 18, String(b),
                   { "text-anchor": "middle", "font-size": 12, fill: COLOR.axis }));
  });
  kids.push(text(MARGIN.left + (builders.length * CELL_W) / 2,
                 MARGIN.top + users.length * CELL_H + 40,
                 mode === "pos" ? "attacking validators" : "attacking builders",
                 { "text-anchor": "middle", "font-size": 13, fill: COLOR.axis }));
  kids.push(el("g", { transform: `rotate(-90 18 ${MARGIN.top + (users.length * CELL_H) / 2})` },
               text(18, MARGIN.top + (users.length * CELL_H) / 2, "attacking users",
                    { "text-anchor": "middle", "font-size": 13, fill: COLOR.axis })));
  kids.push(text(width - MARGIN.right, height - 12,
                 `scale ${tickLabel(Math.round(lo * 10) / 10)} to ${tickLabel(Math.round(hi * 10) / 10)}`,
                 { "text-anchor": "end", "font-size": 11, fill: "#777777" }));
  return render(width, height, kids);
}

export function inversionHeatmap(inDir: string): Map<string, string> {
  const rows = readTable(join(inDir, "sweep.csv"), "sweep.csv", SWEEP);
  const files = new Map<string, string>();
  if (rows.length === 0) {
    files.set("inversion_heatmap.svg", render(420, 200, [
      text(210, 105, "no data: sweep.csv has no rows",
           { "text-anchor": "middle", "font-size": 14, fill: COLOR.axis }),
    ]));
    return files;
  }
  const modes = [...new Set(rows.map((r) => r.mode as string))].sort();
  for (const mode of modes) {
    files.set(`inversion_heatmap_${mode}.svg`,
              chart(rows.filter((r) => r.mode === mode), mode));
  }
  return files;
}
