import { parseStatsCsv, sweepPoint, StatsFile } from "./csv.js";

/** One simulator run, with the numeric columns the figures consume. */
export interface ResultRow {
  policy: string;
  repl: string;
  workload: string;
  seed: number;
  configHash: string;
  totalCycles: number;
  wblpMean: number;
  writeModeFraction: number;
  w2wMeanNs: number;
  w2wMaxNs: number;
  mpka: number;
  wpka: number;
  /** Write-queue capacity for sweep rows, null for plain runs. */
  wrq: number | null;
  source: string;
}

function num(row: Record<string, string>, col: string, source: string): number {
  const raw = row[col];
  if (raw === undefined) {
    throw new Error(`${source}: missing column ${col}`);
  }
  const v = Number(raw);
  if (!Number.isFinite(v)) {
    throw new Error(`${source}: column ${col} is not numeric: ${raw}`);
  }
  return v;
}

export class ResultsFrame {
  rows: ResultRow[] = [];
  private seen = new Set<string>();

  addFile(file: StatsFile): void {
    file.rows.forEach((raw, i) => {
      let wrq: number | null = null;
      if (file.sweep.length > 0) {
        const point = sweepPoint(file.sweep, i);
        const w = point.get("mc.wrq");
        if (w !== undefined) wrq = Number(w);
      }
      const row: ResultRow = {
        policy: raw["policy"],
        repl: raw["repl"],
        workload: raw["workload"],
        seed: num(raw, "seed", file.source),
        configHash: raw["config_hash"],
        totalCycles: num(raw, "total_cycles", file.source),
        wblpMean: num(raw, "wblp_mean", file.source),
        writeModeFraction: num(raw, "write_mode_frac", file.source),
        w2wMeanNs: num(raw, "w2w_mean_ns", file.source),
        w2wMaxNs: num(raw, "w2w_max_ns", file.source),
        mpka: num(raw, "mpka", file.source),
        wpka: num(raw, "wpka", file.source),
        wrq,
        source: file.source,
      };
      // wrq distinguishes a sweep point from a plain run of the same config
      const key = `${row.policy}|${row.workload}|${row.seed}|${row.configHash}|${row.wrq}`;
      if (this.seen.has(key)) {
        throw new Error(`duplicate result row ${key} (from ${file.source})`);
      }
      this.seen.add(key);
      this.rows.push(row);
    });
  }

  addText(text: string, source: string): void {
    this.addFile(parseStatsCsv(text, source));
  }

  policies(): string[] {
    return unique(this.rows.map((r) => r.policy));
  }

  workloads(): string[] {
    return unique(this.rows.map((r) => r.workload));
  }
}

function unique(xs: string[]): string[] {
  const out: string[] = [];
  for (const x of xs) if (!out.includes(x)) out.push(x);
  return out;
}
