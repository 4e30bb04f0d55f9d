import { writeFileSync } from "fs";

import { hazardFigure, pathFigure, survivalFigure } from "./figures.js";
import { readTable } from "./tables.js";

const USAGE = `usage:
  figures hazard   --estimate FILE [--truth FILE] [--ridge FILE] --out FILE.svg
  figures path     --table FILE [--criterion bic|cv] --out FILE.svg
  figures survival --bands FILE [--km FILE] --out FILE.svg`;

function parseArgs(argv: string[]): { kind: string; opts: Record<string, string> } {
  const [kind, ...rest] = argv;
  const opts: Record<string, string> = {};
  for (let i = 0; i < rest.length; i += 2) {
    const key = rest[i];
    if (!key.startsWith("--") || i + 1 >= rest.length) {
      throw new Error(`bad argument ${key}\n${USAGE}`);
    }
    opts[key.slice(2)] = rest[i + 1];
  }
  if (!kind) throw new Error(USAGE);
  return { kind, opts };
}

function render(kind: string, opts: Record<string, string>): string {
  switch (kind) {
    case "hazard": {
      if (!opts.estimate) throw new Error(`hazard needs --estimate\n${USAGE}`);
      const result = hazardFigure(
        readTable(opts.estimate),
        opts.truth ? readTable(opts.truth) : undefined,
        opts.ridge ? readTable(opts.ridge) : undefined,
      );
      return result.svg;
    }
    case "path": {
      if (!opts.table) throw new Error(`path needs --table\n${USAGE}`);
      const criterion = (opts.criterion ?? "bic") as "bic" | "cv";
      return pathFigure(readTable(opts.table), criterion).svg;
    }
    case "survival": {
      if (!opts.bands) throw new Error(`survival needs --bands\n${USAGE}`);
      return survivalFigure(
        readTable(opts.bands),
        opts.km ? readTable(opts.km) : undefined,
      ).svg;
    }
    default:
      throw new Error(`unknown figure kind '${kind}'\n${USAGE}`);
  }
}

function main(): number {
  try {
    const { kind, opts } = parseArgs(process.argv.slice(2));
    if (!opts.out) throw new Error(`missing --out\n${USAGE}`);
    writeFileSync(opts.out, render(kind, opts));
    return 0;
  } catch (err) {
    console.error(err instanceof Error ? err.message : String(err));
    return 1;
  }
}

process.exit(main());
