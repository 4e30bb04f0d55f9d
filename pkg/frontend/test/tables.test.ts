import { describe, expect, it } from "vitest";

import { numericColumn, parseTable } from "../src/tables.js";

const SAMPLE = `# hazseg-table v1
# command: km
# level: 0.95
t,survival
0.0,1.0
2.5,0.5
`;

describe("parseTable", () => {
  it("parses metadata and numeric columns", () => {
    const table = parseTable(SAMPLE, "sample");
    expect(table.meta.command).toBe("km");
    expect(table.meta.level).toBe("0.95");
    expect(table.columnOrder).toEqual(["t", "survival"]);
    expect(table.columns.t).toEqual([0.0, 2.5]);
    expect(table.columns.survival).toEqual([1.0, 0.5]);
  });

  it("keeps non-numeric columns as strings", () => {
    const table = parseTable("cuts_found,proportion\n0,0.5\n5+,0.5\n", "buckets");
    expect(table.columns.cuts_found).toEqual(["0", "5+"]);
    expect(table.columns.proportion).toEqual([0.5, 0.5]);
  });

  it("reads nan spellings as numeric holes", () => {
    const table = parseTable("penalty,loglik\n0.5,nan\n1.0,-3.5\n", "path");
    const loglik = table.columns.loglik as number[];
    expect(Number.isNaN(loglik[0])).toBe(true);
    expect(loglik[1]).toBe(-3.5);
  });

  it("reports ragged rows with file and line", () => {
    expect(() => parseTable("a,b\n1,2\n3\n", "bad.csv")).toThrow(/bad\.csv:3/);
  });

  it("rejects empty input", () => {
    expect(() => parseTable("", "empty.csv")).toThrow(/no header/);
  });
});

describe("numericColumn", () => {
  it("lists available columns when one is missing", () => {
    const table = parseTable(SAMPLE, "sample");
    expect(() => numericColumn(table, "hazard")).toThrow(/missing column 'hazard'.*t, survival/);
  });

  it("rejects string columns", () => {
    const table = parseTable("name,v\nx,1\n", "s");
    expect(() => numericColumn(table, "name")).toThrow(/not numeric/);
  });
});
