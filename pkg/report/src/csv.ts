/**
 * Stats-CSV ingestion. The simulator writes one row per run, the full
 * configuration as `# cfg key=value` header lines, and (for sweep outputs)
 * `# sweep key=v1,v2,...` lines whose cartesian product in row order names
 * each row's overrides. Other `#` lines are annotations and are skipped.
 */

export interface SweepAxis {
  key: string;
  values: string[];
}

export interface StatsFile {
  source: string;
  config: Map<string, string>;
  sweep: SweepAxis[];
  columns: string[];
  rows: Record<string, string>[];
}

export function parseStatsCsv(text: string, source: string): StatsFile {
  const config = new Map<string, string>();
  const sweep: SweepAxis[] = [];
  let columns: string[] | null = null;
  const rows: Record<string, string>[] = [];
  for (const rawLine of text.split("\n")) {
    const line = rawLine.trimEnd();
    if (!line) continue;
    if (line.startsWith("# cfg ")) {
      const body = line.slice("# cfg ".length);
      const eq = body.indexOf("=");
      if (eq < 0) throw new Error(`${source}: malformed cfg line: ${line}`);
      config.set(body.slice(0, eq), body.slice(eq + 1));
    } else if (line.startsWith("# sweep ")) {
      const body = line.slice("# sweep ".length);
      const eq = body.indexOf("=");
      if (eq < 0) throw new Error(`${source}: malformed sweep line: ${line}`);
      sweep.push({
        key: body.slice(0, eq),
        values: body.slice(eq + 1).split(","),
      });
    } else if (line.startsWith("#")) {
      continue;
    } else if (columns === null) {
      columns = line.split(",");
    } else {
      const vals = line.split(",");
      if (vals.length !== columns.length) {
        throw new Error(
          `${source}: row ${rows.length} has ${vals.length} fields, ` +
            `header has ${columns.length}`,
        );
      }
      const row: Record<string, string> = {};
      for (let i = 0; i < columns.length; i++) row[columns[i]] = vals[i];
      rows.push(row);
    }
  }
  if (columns === null) throw new Error(`${source}: no header row found`);
  return { source, config, sweep, columns, rows };
}

/** Overrides for row `index` of a sweep file: first axis outermost, values
 * in listed order (the emitter's product order). */
export function sweepPoint(
  sweep: SweepAxis[],
  index: number,
): Map<string, string> {
  const point = new Map<string, string>();
  let stride = 1;
  for (const axis of sweep) stride *= axis.values.length;
  let rest = index;
  for (const axis of sweep) {
    stride = Math.floor(stride / axis.values.length);
    const i = Math.floor(rest / stride);
    rest -= i * stride;
    if (i >= axis.values.length) {
      throw new Error(`sweep row index ${index} outside the product space`);
    }
    point.set(axis.key, axis.values[i]);
  }
  return point;
}
