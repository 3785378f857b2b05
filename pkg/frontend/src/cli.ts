/**
 * `plot <figure-name> --in DIR --out DIR [--log]`
 *
 * Exit codes mirror the simulator CLI: 0 success, 2 for usage or
 * schema problems, 1 for anything unexpected.
 */

import { mkdirSync, writeFileSync } from "node:fs";
import { join } from "node:path";
import { parseArgs } from "node:util";
import { SchemaError } from "./csv.js";
import { blockProduction } from "./figures/blockProduction.js";
import { inversionHeatmap } from "./figures/inversionHeatmap.js";
import { mevBreakdown } from "./figures/mevBreakdown.js";
import { stakes } from "./figures/stakes.js";

type Figure = (inDir: string, opts: { log?: boolean }) => Map<string, string>;

const FIGURES: Record<string, Figure> = {
  "block-production": (d) => blockProduction(d),
  "mev-breakdown": (d) => mevBreakdown(d),
  "inversion-heatmap": (d) => inversionHeatmap(d),
  "stakes": (d, o) => stakes(d, o),
};

const USAGE = `usage: plot <figure-name> --in DIR --out DIR [--log]
figures: ${Object.keys(FIGURES).join(", ")}
--log applies a log-scale y axis (stakes only)`;

export function main(argv: string[]): number {
  let positionals: string[];
  let values: { in?: string; out?: string; log?: boolean };
  try {
    ({ positionals, values } = parseArgs({
      args: argv,
      allowPositionals: true,
      options: {
        in: { type: "string" },
        out: { type: "string" },
        log: { type: "boolean" },
      },
    }));
  } catch (e) {
    console.error(`error: ${e instanceof Error ? e.message : e}\n${USAGE}`);
    return 2;
  }
  if (positionals.length !== 1 || !(positionals[0] in FIGURES)) {
    console.error(`error: expected one figure name\n${USAGE}`);
    return 2;
  }
  if (!values.in || !values.out) {
    console.error(`error: --in and --out are both required\n${USAGE}`);
    return 2;
  }
  try {
    const files = FIGURES[positionals[0]](values.in, { log: values.log });
    mkdirSync(values.out, { recursive: true });
    for (const [name, svg] of files) {
      const path = join(values.out, name);
      writeFileSync(path, svg);
      console.log(`wrote ${path}`);
    }
    return 0;
  } catch (e) {
    if (e instanceof SchemaError) {
      console.error(`error: ${e.message}`);
      return 2;
    }
    console.error(`internal error: ${e instanceof Error ? e.stack ?? e.message : e}`);
    return 1;
  }
}
