#!/usr/bin/env node
/**
 * plot-field --truth <field.bin> --est <field.bin>... --out <figure.svg>
 *
 * Renders the panel figure (velocity fields on top, error-magnitude maps
 * below).  Exit codes: 0 ok, 2 bad arguments or unreadable/mismatched input.
 */

import { writeFileSync } from "fs";
import { basename } from "path";
import { pathToFileURL } from "url";
import { FieldFormatError, readField } from "./fieldfile.js";
import { renderFieldPanels } from "./plotField.js";

function usage(): never {
  console.error("usage: plot-field --truth <field.bin> --est <field.bin>... --out <figure.svg>");
  process.exit(2);
}

export function main(argv: string[]): number {
  let truthPath: string | undefined;
  const estPaths: string[] = [];
  let outPath: string | undefined;
  for (let i = 0; i < argv.length; i++) {
    switch (argv[i]) {
      case "--truth":
        truthPath = argv[++i];
        break;
      case "--est":
        while (i + 1 < argv.length && !argv[i + 1].startsWith("--")) {
          estPaths.push(argv[++i]);
        }
        break;
      case "--out":
        outPath = argv[++i];
        break;
      default:
        console.error(`unknown argument: ${argv[i]}`);
        usage();
    }
  }
  if (!truthPath || !outPath || !estPaths.length) usage();

  try {
    const truth = { label: `truth (${basename(truthPath)})`, grid: readField(truthPath) };
    const estimates = estPaths.map((p) => ({ label: basename(p), grid: readField(p) }));
    const svg = renderFieldPanels(truth, estimates);
    writeFileSync(outPath, svg);
    console.log(`wrote ${outPath} (${estimates.length + 1} field panels)`);
    return 0;
  } catch (err) {
    if (err instanceof FieldFormatError || err instanceof Error) {
      console.error(`plot-field: ${err.message}`);
      return 2;
    }
    throw err;
  }
}

if (process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href) {
  process.exit(main(process.argv.slice(2)));
}
