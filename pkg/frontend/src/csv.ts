/** Canonical results-CSV parsing and schema validation. */

export const CSV_HEADER =
  "preset,kappa,policy,ack_mode,t_sw,se_target,n_tr,n_ac,trials," +
  "p_access_mean,p_access_ci95,throughput_mean,throughput_ci95,se_mean,seed";

const COLUMNS = CSV_HEADER.split(",");
const STRING_COLUMNS = new Set(["preset", "policy", "ack_mode"]);

export interface MetricsRow {
  preset: string;
  kappa: number;
  policy: string;
  ack_mode: string;
  t_sw: number;
  se_target: number;
  n_tr: number;
  n_ac: number;
  trials: number;
  p_access_mean: number;
  p_access_ci95: number;
  throughput_mean: number;
  throughput_ci95: number;
  se_mean: number;
  seed: number;
}

export class SchemaError extends Error {}

export function parseCsv(text: string): MetricsRow[] {
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0 && !l.startsWith("#"));
  if (lines.length === 0) {
    throw new SchemaError("CSV is empty: no header row found");
  }
  if (lines[0] !== CSV_HEADER) {
    throw new SchemaError(
      `unexpected CSV header; expected the canonical schema\n  want: ${CSV_HEADER}\n  got:  ${lines[0]}`,
    );
  }
  const rows: MetricsRow[] = [];
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i].split(",");
    if (parts.length !== COLUMNS.length) {
      throw new SchemaError(
        `row ${i} has ${parts.length} fields, expected ${COLUMNS.length}`,
      );
    }
    const row: Record<string, string | number> = {};
    for (let c = 0; c < COLUMNS.length; c++) {
      const name = COLUMNS[c];
      if (STRING_COLUMNS.has(name)) {
        row[name] = parts[c];
      } else {
        const value = Number(parts[c]);
        if (Number.isNaN(value) && parts[c] !== "nan") {
          throw new SchemaError(`row ${i}, column ${name}: cannot parse ${parts[c]}`);
        }
        row[name] = value;
      }
    }
    rows.push(row as unknown as MetricsRow);
  }
  if (rows.length === 0) {
    throw new SchemaError("CSV contains a header but no data rows");
  }
  return rows;
}
