/**
 * Schema-checked readers for the simulator's CSV tables.
 *
 * Every validation failure raises SchemaError with the offending file
 * and column spelled out, so a truncated or hand-edited table fails
 * loudly instead of plotting garbage.
 */

import { readFileSync } from "node:fs";
import Papa from "papaparse";

export class SchemaError extends Error {}

/** Column value kinds the tables use. "ratio" is a reduced fraction
 * rendered as "p/q" (integers allowed too); empty cells become null. */
export type Kind = "int" | "ratio" | "string";

export interface Column {
  name: string;
  kind: Kind;
}

export type Row = Record<string, number | string | null>;

const INT_RE = /^-?\d+$/;
const RATIO_RE = /^(-?\d+)\/(\d+)$/;

function coerce(raw: string, col: Column, file: string, line: number): number | string | null {
  if (col.kind === "string") return raw;
  if (raw === "") return null;
  if (col.kind === "int") {
    if (!INT_RE.test(raw)) {
      throw new SchemaError(
        `${file}: column "${col.name}" row ${line}: expected integer, got "${raw}"`);
    }
    return Number(raw);
  }
  const m = RATIO_RE.exec(raw);
  if (m) {
    const den = Number(m[2]);
    if (den === 0) {
      throw new SchemaError(`${file}: column "${col.name}" row ${line}: zero denominator`);
    }
    return Number(m[1]) / den;
  }
  if (INT_RE.test(raw)) return Number(raw);
  throw new SchemaError(
    `${file}: column "${col.name}" row ${line}: expected "p/q" ratio, got "${raw}"`);
}

/** Parse one CSV file against a column schema. Extra columns are
 * ignored; missing ones are an error naming the column. */
export function readTable(path: string, file: string, schema: Column[]): Row[] {
  let text: string;
  try {
    text = readFileSync(path, "utf-8");
  } catch {
    throw new SchemaError(`${file} not found under the input directory`);
  }
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const e = parsed.errors[0];
    throw new SchemaError(`${file}: ${e.message} (row ${e.row ?? "?"})`);
  }
  const fields = parsed.meta.fields ?? [];
  for (const col of schema) {
    if (!fields.includes(col.name)) {
      throw new SchemaError(`${file}: missing column "${col.name}"`);
    }
  }
  return parsed.data.map((raw, i) => {
    const row: Row = {};
    for (const col of schema) {
      row[col.name] = coerce(raw[col.name], col, file, i + 2);
    }
    return row;
  });
}

export const SLOTS: Column[] = [
  { name: "slot", kind: "int" },
  { name: "mode", kind: "string" },
  { name: "producer_id", kind: "int" },
  { name: "gas_total", kind: "int" },
  { name: "mev_user", kind: "int" },
  { name: "mev_producer", kind: "int" },
  { name: "mev_uncaptured", kind: "int" },
  { name: "inversions", kind: "int" },
  { name: "skipped", kind: "int" },
];

export const AGENTS: Column[] = [
  { name: "agent_id", kind: "int" },
  { name: "role", kind: "string" },
  { name: "tau", kind: "string" },
  { name: "blocks_produced", kind: "int" },
];

export const STAKES: Column[] = [
  { name: "slot", kind: "int" },
  { name: "agent_id", kind: "int" },
  { name: "capital", kind: "int" },
  { name: "active_stake", kind: "int" },
];

export const SWEEP: Column[] = [
  { name: "attack_users", kind: "int" },
  { name: "attack_builders", kind: "int" },
  { name: "mode", kind: "string" },
  { name: "mean_inversions", kind: "ratio" },
  { name: "gini_producer", kind: "ratio" },
  { name: "proposer_share", kind: "ratio" },
  { name: "seed", kind: "int" },
];
