export interface Table {
  columns: string[];
  rows: string[][];
}

// Parses a CSV file produced by the blockamp CLI: lines starting with '#'
// are provenance comments, the first remaining line is the header.
export function parseCsv(text: string, path = '<csv>'): Table {
  const lines = text
    .split(/\r?\n/)
    .filter((line) => line.length > 0 && !line.startsWith('#'));
  if (lines.length === 0) {
    throw new Error(`${path}: no header row`);
  }
  const columns = lines[0].split(',');
  const rows = lines.slice(1).map((line) => line.split(','));
  if (rows.length === 0) {
    throw new Error(`${path}: no data rows`);
  }
  for (const row of rows) {
    if (row.length !== columns.length) {
      throw new Error(
        `${path}: row has ${row.length} fields, header has ${columns.length}`
      );
    }
  }
  return { columns, rows };
}

// Resolves column names to indices, failing with a schema diagnostic that
// lists everything missing at once.
export function columnIndices(
  table: Table,
  names: string[],
  path = '<csv>'
): Map<string, number> {
  const missing = names.filter((n) => !table.columns.includes(n));
  if (missing.length > 0) {
    throw new Error(
      `${path}: missing columns ${missing.join(', ')} (have ${table.columns.join(', ')})`
    );
  }
  return new Map(names.map((n) => [n, table.columns.indexOf(n)]));
}

export function numericColumn(table: Table, name: string, path = '<csv>'): number[] {
  const idx = columnIndices(table, [name], path).get(name)!;
  return table.rows.map((row, i) => {
    const v = Number(row[idx]);
    if (!Number.isFinite(v)) {
      throw new Error(`${path}: non-numeric value ${row[idx]!} in column ${name}, row ${i}`);
    }
    return v;
  });
}
