import * as fs from "fs";
import Papa from "papaparse";

export class SchemaError extends Error {}

export type Row = Record<string, string>;

export interface Table {
  path: string;
  columns: string[];
  rows: Row[];
}

/** Load a CSV and check it carries at least the expected columns. */
export function loadCsv(path: string, expected: string[]): Table {
  if (!fs.existsSync(path)) {
    throw new SchemaError(`input file not found: ${path}`);
  }
  const text = fs.readFileSync(path, "utf8");
  const parsed = Papa.parse<Row>(text.trim(), { header: true, skipEmptyLines: true });
  if (parsed.errors.length > 0) {
    throw new SchemaError(`${path}: ${parsed.errors[0].message}`);
  }
  const columns = parsed.meta.fields ?? [];
  const missing = expected.filter((c) => !columns.includes(c));
  if (missing.length > 0) {
    throw new SchemaError(
      `${path}: missing column${missing.length > 1 ? "s" : ""} ` +
        `${missing.join(", ")} (found: ${columns.join(", ")})`
    );
  }
  if (parsed.data.length === 0) {
    throw new SchemaError(`${path}: no data rows`);
  }
  return { path, columns, rows: parsed.data };
}

export function numericColumn(table: Table, name: string): number[] {
  return table.rows.map((r, i) => {
    const v = Number(r[name]);
    if (!Number.isFinite(v) && r[name] !== "nan") {
      throw new SchemaError(`${table.path}: row ${i + 1} has non-numeric ${name}=${r[name]}`);
    }
    return v;
  });
}
