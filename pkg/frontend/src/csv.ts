/**
 * Minimal CSV reader for the simulator's sweep files.
 *
 * The files are plain comma-separated values with an optional leading
 * `# ...` metadata comment. Values never contain commas, quotes, or
 * newlines, so no quoting rules are needed. Cell values are kept as the
 * original strings; numeric interpretation happens at the call site so a
 * rendered figure can carry the CSV's exact text.
 */

export interface SweepTable {
  /** Metadata comment (without the leading "# "), or null. */
  comment: string | null;
  columns: string[];
  /** Row-major cells, as raw strings. */
  rows: Record<string, string>[];
}

export class CsvError extends Error {}

export function parseCsv(text: string): SweepTable {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  let comment: string | null = null;
  if (lines.length > 0 && lines[0].startsWith('#')) {
    comment = lines.shift()!.replace(/^#\s?/, '');
  }
  if (lines.length === 0) {
    throw new CsvError('empty CSV: no header row');
  }
  const columns = lines[0].split(',');
  const rows: Record<string, string>[] = [];
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(',');
    if (cells.length !== columns.length) {
      throw new CsvError(
        `row ${i} has ${cells.length} cells, expected ${columns.length}`,
      );
    }
    const row: Record<string, string> = {};
    columns.forEach((col, j) => {
      row[col] = cells[j];
    });
    rows.push(row);
  }
  if (rows.length === 0) {
    throw new CsvError('empty CSV: header but no data rows');
  }
  return { comment, columns, rows };
}

export function requireColumns(table: SweepTable, needed: string[]): void {
  for (const col of needed) {
    if (!table.columns.includes(col)) {
      throw new CsvError(`missing column: ${col}`);
    }
  }
}

export function asNumber(row: Record<string, string>, col: string): number {
  const value = Number(row[col]);
  if (Number.isNaN(value)) {
    throw new CsvError(`column ${col}: cannot parse ${JSON.stringify(row[col])} as a number`);
  }
  return value;
}

/** Split rows into labeled series by a grouping column (insertion order). */
export function groupRows(
  table: SweepTable,
  groupBy: string | null,
): Map<string, Record<string, string>[]> {
  const groups = new Map<string, Record<string, string>[]>();
  if (groupBy === null) {
    groups.set('sweep', table.rows);
    return groups;
  }
  requireColumns(table, [groupBy]);
  for (const row of table.rows) {
    const key = row[groupBy];
    if (!groups.has(key)) {
      groups.set(key, []);
    }
    groups.get(key)!.push(row);
  }
  return groups;
}
