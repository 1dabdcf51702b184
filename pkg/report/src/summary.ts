/**
 * Headline table. The write-to-write delay column is reported twice because
 * "maximum latency" is ambiguous across a multi-workload suite: once as the
 * max over per-workload mean delays, and once as the absolute worst single
 * gap anywhere in the suite. Both are kept so readers can pick either.
 */
import { ResultRow } from "./frame.js";
import { mean, speedups } from "./aggregate.js";

export interface PolicySummary {
  policy: string;
  runs: number;
  wblpMean: number;
  writeModeFraction: number;
  w2wMeanNs: number;
  w2wMaxOfWorkloadMeansNs: number;
  w2wAbsMaxNs: number;
  speedup: number | null;
}

export function summarize(
  rows: ResultRow[],
  basePolicy = "baseline",
): PolicySummary[] {
  const sp = speedups(rows, basePolicy);
  const order: string[] = [];
  const grouped = new Map<string, ResultRow[]>();
  for (const r of rows) {
    if (!grouped.has(r.policy)) {
      grouped.set(r.policy, []);
      order.push(r.policy);
    }
    grouped.get(r.policy)!.push(r);
  }
  return order.map((policy) => {
    const rs = grouped.get(policy)!;
    const perWorkloadMeans = new Map<string, number[]>();
    for (const r of rs) {
      let list = perWorkloadMeans.get(r.workload);
      if (!list) perWorkloadMeans.set(r.workload, (list = []));
      list.push(r.w2wMeanNs);
    }
    const workloadMeans = [...perWorkloadMeans.values()].map(mean);
    return {
      policy,
      runs: rs.length,
      wblpMean: mean(rs.map((r) => r.wblpMean)),
      writeModeFraction: mean(rs.map((r) => r.writeModeFraction)),
      w2wMeanNs: mean(rs.map((r) => r.w2wMeanNs)),
      w2wMaxOfWorkloadMeansNs: Math.max(...workloadMeans),
      w2wAbsMaxNs: Math.max(...rs.map((r) => r.w2wMaxNs)),
      speedup: policy === basePolicy ? null : (sp.get(policy) ?? null),
    };
  });
}

const COLS = [
  "policy",
  "runs",
  "wblp_mean",
  "write_mode_fraction",
  "w2w_mean_ns",
  "w2w_max_of_workload_means_ns",
  "w2w_abs_max_ns",
  "speedup",
];

function cells(s: PolicySummary): string[] {
  return [
    s.policy,
    String(s.runs),
    s.wblpMean.toFixed(3),
    s.writeModeFraction.toFixed(4),
    s.w2wMeanNs.toFixed(3),
    s.w2wMaxOfWorkloadMeansNs.toFixed(3),
    s.w2wAbsMaxNs.toFixed(3),
    s.speedup === null ? "-" : s.speedup.toFixed(4),
  ];
}

export function summaryCsv(summaries: PolicySummary[]): string {
  const lines = [COLS.join(",")];
  for (const s of summaries) lines.push(cells(s).join(","));
  return lines.join("\n") + "\n";
}

export function summaryMarkdown(summaries: PolicySummary[]): string {
  const lines = [
    "# Write-path policy summary",
    "",
    "| " + COLS.join(" | ") + " |",
    "|" + COLS.map(() => " --- ").join("|") + "|",
  ];
  for (const s of summaries) lines.push("| " + cells(s).join(" | ") + " |");
  lines.push(
    "",
    "`w2w_max_of_workload_means_ns` is the worst per-workload mean delay;",
    "`w2w_abs_max_ns` is the single worst gap observed anywhere.",
  );
  return lines.join("\n") + "\n";
}
