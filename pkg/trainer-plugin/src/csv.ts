import { readFileSync } from "node:fs";

export interface DenseData {
  features: number[][];
  labels: number[];
  columnNames: string[];
}

/**
 * Parse the dense interchange CSV: headered, comma separated, all cells
 * decimal reals, labels in a column named "label".
 */
export function parseCsv(text: string): DenseData {
  const lines = text.split("\n").filter((line) => line.length > 0);
  if (lines.length < 2) {
    throw new Error("interchange file needs a header and at least one row");
  }
  const header = lines[0].split(",").map((c) => c.trim());
  const labelIdx = header.indexOf("label");
  if (labelIdx < 0) {
    throw new Error(`no "label" column in header [${header.join(", ")}]`);
  }
  const features: number[][] = [];
  const labels: number[] = [];
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(",");
    if (cells.length !== header.length) {
      throw new Error(`row ${i} has ${cells.length} cells, expected ${header.length}`);
    }
    const row: number[] = [];
    for (let j = 0; j < cells.length; j++) {
      const value = Number(cells[j]);
      if (!Number.isFinite(value)) {
        throw new Error(`row ${i}, column ${header[j]}: cannot parse ${cells[j].trim()}`);
      }
      if (j === labelIdx) {
        labels.push(value);
      } else {
        row.push(value);
      }
    }
    features.push(row);
  }
  return {
    features,
    labels,
    columnNames: header.filter((_, j) => j !== labelIdx),
  };
}

export function readDataRef(path: string): DenseData {
  return parseCsv(readFileSync(path, "utf-8"));
}
