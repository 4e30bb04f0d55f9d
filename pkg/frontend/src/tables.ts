import { readFileSync } from "fs";

/** A parsed output table: '#'-prefixed metadata lines, then CSV rows. */
export interface Table {
  source: string;
  meta: Record<string, string>;
  columnOrder: string[];
  columns: Record<string, number[] | string[]>;
}

/** Number parsing that understands the writer's 'nan'/'inf' float spellings. */
function parseNumber(s: string): number {
  const t = s.trim().toLowerCase();
  if (t === "nan") return NaN;
  if (t === "inf") return Infinity;
  if (t === "-inf") return -Infinity;
  return Number(s);
}

export function parseTable(text: string, source = "<string>"): Table {
  const meta: Record<string, string> = {};
  let header: string[] | null = null;
  const rows: string[][] = [];
  const lines = text.split("\n");
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i];
    if (!line.trim()) continue;
    if (line.startsWith("#")) {
      const body = line.slice(1).trim();
      const sep = body.indexOf(":");
      if (sep >= 0) meta[body.slice(0, sep).trim()] = body.slice(sep + 1).trim();
      continue;
    }
    const cells = line.split(",");
    if (header === null) {
      header = cells;
      continue;
    }
    if (cells.length !== header.length) {
      throw new Error(`${source}:${i + 1}: expected ${header.length} cells, found ${cells.length}`);
    }
    rows.push(cells);
  }
  if (header === null) throw new Error(`${source}: no header row found`);
  const columns: Record<string, number[] | string[]> = {};
  header.forEach((name, j) => {
    const raw = rows.map((r) => r[j]);
    const nums = raw.map(parseNumber);
    const numeric = nums.every((v, i) => !Number.isNaN(v) || raw[i].trim().toLowerCase() === "nan");
    columns[name] = numeric ? nums : raw;
  });
  return { source, meta, columnOrder: header, columns };
}

export function readTable(path: string): Table {
  return parseTable(readFileSync(path, "utf8"), path);
}

export function numericColumn(table: Table, name: string): number[] {
  const col = table.columns[name];
  if (col === undefined) {
    throw new Error(
      `${table.source}: missing column '${name}' (has: ${table.columnOrder.join(", ")})`,
    );
  }
  if (col.length > 0 && typeof col[0] !== "number") {
    throw new Error(`${table.source}: column '${name}' is not numeric`);
  }
  return col as number[];
}
