/** The five standard figures, built from parsed result rows. */

import { Chart, renderBars, renderLines } from "./chart.js";
import { ResultRow } from "./frame.js";
import { byWorkloadPolicy, mean, speedups } from "./aggregate.js";

const IDEAL_SUFFIX = "+ideal";

function isIdeal(policy: string): boolean {
  return policy.endsWith(IDEAL_SUFFIX);
}

function realPolicies(rows: ResultRow[]): string[] {
  const out: string[] = [];
  for (const r of rows) {
    if (!isIdeal(r.policy) && !out.includes(r.policy)) out.push(r.policy);
  }
  return out;
}

function workloads(rows: ResultRow[]): string[] {
  const out: string[] = [];
  for (const r of rows) if (!out.includes(r.workload)) out.push(r.workload);
  return out;
}

function cell(
  grouped: Map<string, Map<string, ResultRow[]>>,
  workload: string,
  policy: string,
  pick: (r: ResultRow) => number,
): number | null {
  const rs = grouped.get(workload)?.get(policy);
  if (!rs || rs.length === 0) return null;
  return mean(rs.map(pick));
}

export function figWblp(rows: ResultRow[]): Chart {
  const grouped = byWorkloadPolicy(rows);
  const groups = workloads(rows);
  const series = realPolicies(rows);
  return renderBars({
    name: "wblp",
    title: "Write bank-level parallelism during drain episodes",
    yLabel: "mean distinct banks per episode",
    groups,
    series,
    values: groups.map((w) => series.map((p) => cell(grouped, w, p, (r) => r.wblpMean))),
  });
}

export function figWriteMode(rows: ResultRow[]): Chart {
  const grouped = byWorkloadPolicy(rows);
  const groups = workloads(rows);
  const series = realPolicies(rows);
  // Dashed reference per workload: the same runs with idealized write timing.
  const refs = groups.map((w) => {
    for (const [p, rs] of grouped.get(w) ?? []) {
      if (isIdeal(p) && rs.length > 0) {
        return mean(rs.map((r) => r.writeModeFraction));
      }
    }
    return null;
  });
  return renderBars({
    name: "write_mode",
    title: "Fraction of time spent draining writes",
    yLabel: "write-mode fraction",
    groups,
    series,
    values: groups.map((w) =>
      series.map((p) => cell(grouped, w, p, (r) => r.writeModeFraction)),
    ),
    groupRefs: refs,
    refLabel: refs.some((r) => r !== null) ? "dashed: ideal write timing" : undefined,
  });
}

export function figSpeedup(rows: ResultRow[], basePolicy = "baseline"): Chart {
  const sp = speedups(rows, basePolicy);
  const series = [...sp.keys()];
  return renderBars({
    name: "speedup",
    title: `Speedup over ${basePolicy} (geomean of workload x seed)`,
    yLabel: "speedup",
    groups: ["geomean"],
    series,
    values: [series.map((p) => sp.get(p) ?? null)],
    hline: 1.0,
  });
}

export function figW2w(rows: ResultRow[]): Chart {
  const grouped = byWorkloadPolicy(rows);
  const groups = workloads(rows);
  const series = realPolicies(rows);
  return renderBars({
    name: "w2w_delay",
    title: "Write-to-write delay (bars: mean, whiskers: max)",
    yLabel: "delay (ns)",
    groups,
    series,
    values: groups.map((w) =>
      series.map((p) => cell(grouped, w, p, (r) => r.w2wMeanNs)),
    ),
    whiskers: groups.map((w) =>
      series.map((p) => {
        const rs = grouped.get(w)?.get(p);
        if (!rs || rs.length === 0) return null;
        return Math.max(...rs.map((r) => r.w2wMaxNs));
      }),
    ),
  });
}

/** Cycles vs write-queue capacity, normalized to the base policy at the
 * smallest capacity. Expects rows from a sweep file (wrq set on each row). */
export function figWrqSensitivity(
  rows: ResultRow[],
  basePolicy = "baseline",
): Chart {
  const swept = rows.filter((r) => r.wrq !== null);
  if (swept.length === 0) throw new Error("no sweep rows with mc.wrq values");
  const sizes = [...new Set(swept.map((r) => r.wrq as number))].sort(
    (a, b) => a - b,
  );
  const policies: string[] = [];
  for (const r of swept) if (!policies.includes(r.policy)) policies.push(r.policy);
  const at = (p: string, s: number): number | null => {
    const rs = swept.filter((r) => r.policy === p && r.wrq === s);
    if (rs.length === 0) return null;
    return mean(rs.map((r) => r.totalCycles));
  };
  const ref = at(basePolicy, sizes[0]);
  if (ref === null) {
    throw new Error(
      `no ${basePolicy} sweep row at the smallest capacity (${sizes[0]})`,
    );
  }
  return renderLines({
    name: "wrq_sensitivity",
    title: "Runtime vs write-queue capacity",
    xLabel: "write-queue entries",
    yLabel: `cycles / ${basePolicy} @ ${sizes[0]}`,
    xs: sizes,
    series: policies.map((p) => ({
      name: p,
      ys: sizes.map((s) => {
        const v = at(p, s);
        return v === null ? null : v / ref;
      }),
    })),
    hline: 1.0,
  });
}
