export { SchemaError, readTable, AGENTS, SLOTS, STAKES, SWEEP } from "./csv.js";
export { blockProduction } from "./figures/blockProduction.js";
export { inversionHeatmap } from "./figures/inversionHeatmap.js";
export { mevBreakdown } from "./figures/mevBreakdown.js";
export { stakes } from "./figures/stakes.js";
export { main } from "./cli.js";
