import { readFileSync } from "fs";
import { basename } from "path";
import Papa from "papaparse";

/** Extract one numeric metric column from a metrics CSV. */
export function loadMetricColumn(path: string, metric: string): number[] {
  const text = readFileSync(path, "utf8");
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    throw new Error(`${path}: ${parsed.errors[0].message}`);
  }
  const rows = parsed.data;
  if (rows.length === 0) {
    throw new Error(`${path}: empty input (no data rows)`);
  }
  if (!(metric in rows[0])) {
    const known = Object.keys(rows[0]).join(", ");
    throw new Error(`${path}: missing column '${metric}' (has: ${known})`);
  }
  return rows.map((row, idx) => {
    const value = Number(row[metric]);
    if (!Number.isFinite(value)) {
      throw new Error(
        `${path}: row ${idx + 1} has non-numeric '${metric}': ${row[metric]}`,
      );
    }
    return value;
  });
}

export function fileStem(path: string): string {
  return basename(path).replace(/\.[^.]+$/, "");
}
