/**
 * Batch entry point: read one summary.json, write the 2-panel figure.
 *
 * Usage:
 *   ts-node --esm src/render.ts <summary.json> <out-dir> [--axis time|iteration]
 *
 * Writes <out-dir>/panels_<axis>.svg and prints the path.
 */

import { mkdirSync, writeFileSync } from "fs";
import path from "path";

import { loadPanel, renderPanel, type Axis } from "./plot.js";

function main(argv: string[]): void {
  const args = argv.slice(2);
  let axis: Axis = "time";
  const rest: string[] = [];
  for (let i = 0; i < args.length; i++) {
    if (args[i] === "--axis") {
      const v = args[++i];
      if (v !== "time" && v !== "iteration") {
        throw new Error(`--axis must be "time" or "iteration", got "${v}"`);
      }
      axis = v;
    } else {
      rest.push(args[i]!);
    }
  }
  if (rest.length !== 2) {
    console.error("usage: render.ts <summary.json> <out-dir> [--axis time|iteration]");
    process.exit(2);
  }
  const [summaryPath, outDir] = rest as [string, string];
  const spec = loadPanel(summaryPath, axis);
  const svg = renderPanel(spec);
  mkdirSync(outDir, { recursive: true });
  const out = path.join(outDir, `panels_${axis}.svg`);
  writeFileSync(out, svg);
  console.log(out);
}

main(process.argv);
