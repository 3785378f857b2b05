/** Builders for throwaway input directories shaped like simulator output. */

import { mkdirSync, mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

export function tmpDir(): string {
  return mkdtempSync(join(tmpdir(), "plots-"));
}

export function writeCsv(dir: string, name: string, header: string[],
                         rows: (string | number)[][]): void {
  const lines = [header.join(",")].concat(rows.map((r) => r.join(",")));
  writeFileSync(join(dir, name), lines.join("\n") + "\n");
}

export const SLOTS_HEADER = ["slot", "mode", "producer_id", "stop_round", "winning_bid",
  "valuation", "gas_total", "mev_user", "mev_producer", "mev_uncaptured",
  "inversions", "skipped"];

export const AGENTS_HEADER = ["agent_id", "role", "tau", "strategy", "gamma",
  "profit_total", "blocks_produced"];

export const STAKES_HEADER = ["slot", "agent_id", "capital", "active_stake"];

export const SWEEP_HEADER = ["attack_users", "attack_builders", "mode",
  "mean_inversions", "gini_producer", "proposer_share", "seed"];

/** One slots.csv row with only the interesting fields varying. */
export function slotRow(slot: number, opts: Partial<{
  mode: string; producer: number; mevUser: number; mevProducer: number;
  mevUncaptured: number; skipped: number;
}> = {}): (string | number)[] {
  return [slot, opts.mode ?? "epbs", opts.producer ?? 100, 20, 900, 1000, 5000,
          opts.mevUser ?? 0, opts.mevProducer ?? 0, opts.mevUncaptured ?? 0,
          3, opts.skipped ?? 0];
}

export function agentRow(id: number, role: string, tau: string,
                         blocks = 0): (string | number)[] {
  return [id, role, tau, role === "user" ? "" : "reactive", 1, 12345, blocks];
}

/** Full rectangular sweep over the given grids, `reps` rows per cell. */
export function sweepRows(mode: string, users: number[], builders: number[],
                          reps = 1, inv?: (u: number, b: number, r: number) => string,
                          ): (string | number)[][] {
  const rows: (string | number)[][] = [];
  let seed = 0;
  for (const u of users) {
    for (const b of builders) {
      for (let r = 0; r < reps; r++) {
        rows.push([u, b, mode, inv ? inv(u, b, r) : `${(u + 1) * (b + 2)}/1`,
                   "1/3", "24/25", seed++]);
      }
    }
  }
  return rows;
}

export function writeConfig(dir: string, attackUsers: number, mode = "epbs"): void {
  writeFileSync(join(dir, "config.json"),
                JSON.stringify({ mode, attack_user_count: attackUsers }));
}

export function subdir(dir: string, name: string): string {
  const d = join(dir, name);
  mkdirSync(d);
  return d;
}

export function count(svg: string, needle: string): number {
  return svg.split(needle).length - 1;
}
