#!/usr/bin/env node
/**
 * plot-sweep --csv <results.csv> --out <dir>
 *
 * Emits sweep_table.md plus NRMSE/PCC/runtime charts into the output
 * directory.  Exit codes: 0 ok, 2 bad arguments or CSV schema mismatch.
 */

import { mkdirSync, writeFileSync } from "fs";
import { join } from "path";
import { pathToFileURL } from "url";
import { renderSweepCharts } from "./plotSweep.js";
import { SweepFormatError, readSweepCsv } from "./sweepcsv.js";

function usage(): never {
  console.error("usage: plot-sweep --csv <results.csv> --out <dir>");
  process.exit(2);
}

export function main(argv: string[]): number {
  let csvPath: string | undefined;
  let outDir: string | undefined;
  for (let i = 0; i < argv.length; i++) {
    switch (argv[i]) {
      case "--csv":
        csvPath = argv[++i];
        break;
      case "--out":
        outDir = argv[++i];
        break;
      default:
        console.error(`unknown argument: ${argv[i]}`);
        usage();
    }
  }
  if (!csvPath || !outDir) usage();

  try {
    const rows = readSweepCsv(csvPath);
    const outputs = renderSweepCharts(rows);
    mkdirSync(outDir, { recursive: true });
    for (const [name, content] of Object.entries(outputs)) {
      writeFileSync(join(outDir, name), content);
    }
    console.log(`wrote ${Object.keys(outputs).length} files to ${outDir}`);
    return 0;
  } catch (err) {
    if (err instanceof SweepFormatError || err instanceof Error) {
      console.error(`plot-sweep: ${err.message}`);
      return 2;
    }
    throw err;
  }
}

if (process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href) {
  process.exit(main(process.argv.slice(2)));
}
