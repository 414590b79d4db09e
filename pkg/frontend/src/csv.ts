/** Minimal CSV reading with schema checks that name the missing column. */

export class SchemaError extends Error {}

export interface Table {
  columns: string[];
  rows: string[][];
}

/** Parse CSV text; handles double-quoted fields and LF/CRLF endings. */
export function parseCsv(text: string): Table {
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new SchemaError("empty CSV input");
  }
  const rows = lines.map(splitLine);
  const columns = rows[0];
  const body = rows.slice(1);
  for (const row of body) {
    if (row.length !== columns.length) {
      throw new SchemaError(
        `row has ${row.length} fields, header has ${columns.length}`,
      );
    }
  }
  return { columns, rows: body };
}

function splitLine(line: string): string[] {
  const out: string[] = [];
  let field = "";
  let quoted = false;
  for (let i = 0; i < line.length; i++) {
    const ch = line[i];
    if (quoted) {
      if (ch === '"' && line[i + 1] === '"') {
        field += '"';
        i++;
      } else if (ch === '"') {
        quoted = false;
      } else {
        field += ch;
      }
    } else if (ch === '"') {
      quoted = true;
    } else if (ch === ",") {
      out.push(field);
      field = "";
    } else {
      field += ch;
    }
  }
  out.push(field);
  return out;
}

/** Column accessor; raises SchemaError naming the first missing column. */
export function requireColumns(table: Table, names: string[]): Map<string, number> {
  const index = new Map<string, number>();
  for (const name of names) {
    const at = table.columns.indexOf(name);
    if (at < 0) {
      throw new SchemaError(`missing column: ${name}`);
    }
    index.set(name, at);
  }
  return index;
}

export function numericColumn(table: Table, name: string): number[] {
  const at = requireColumns(table, [name]).get(name)!;
  return table.rows.map((r) => {
    const v = Number(r[at]);
    if (Number.isNaN(v) && r[at] !== "") {
      throw new SchemaError(`non-numeric value in column ${name}: ${r[at]}`);
    }
    return v;
  });
}

/** Parse a headerless numeric matrix (correlation-image dumps). */
export function parseMatrix(text: string): number[][] {
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  const mat = lines.map((line) =>
    line.split(",").map((x) => {
      const v = Number(x);
      if (Number.isNaN(v)) {
        throw new SchemaError(`non-numeric matrix entry: ${x}`);
      }
      return v;
    }),
  );
  const n = mat.length;
  if (!mat.every((row) => row.length === n)) {
    throw new SchemaError("correlation image must be a square matrix");
  }
  return mat;
}
