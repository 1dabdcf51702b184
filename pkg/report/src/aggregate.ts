import { ResultRow } from "./frame.js";

/** Log-domain geometric mean; exact enough that a naive product check at
 * 1e-12 relative tolerance holds for realistic speedup magnitudes. */
export function geomean(xs: number[]): number {
  if (xs.length === 0) throw new Error("geomean of empty sample");
  let acc = 0;
  for (const x of xs) {
    if (!(x > 0)) throw new Error(`geomean requires positive values, got ${x}`);
    acc += Math.log(x);
  }
  return Math.exp(acc / xs.length);
}

export function mean(xs: number[]): number {
  if (xs.length === 0) throw new Error("mean of empty sample");
  let acc = 0;
  for (const x of xs) acc += x;
  return acc / xs.length;
}

/** Per-policy speedup over `basePolicy`, geomean'd across (workload, seed)
 * pairs. Every non-base row must have a matching base row. */
export function speedups(
  rows: ResultRow[],
  basePolicy = "baseline",
): Map<string, number> {
  const base = new Map<string, number>();
  for (const r of rows) {
    if (r.policy === basePolicy) base.set(`${r.workload}|${r.seed}`, r.totalCycles);
  }
  const ratios = new Map<string, number[]>();
  for (const r of rows) {
    if (r.policy === basePolicy) continue;
    const key = `${r.workload}|${r.seed}`;
    const ref = base.get(key);
    if (ref === undefined) {
      throw new Error(
        `no ${basePolicy} row for workload=${r.workload} seed=${r.seed}`,
      );
    }
    let list = ratios.get(r.policy);
    if (!list) ratios.set(r.policy, (list = []));
    list.push(ref / r.totalCycles);
  }
  const out = new Map<string, number>();
  for (const [policy, list] of ratios) out.set(policy, geomean(list));
  return out;
}

/** Group rows by workload then policy, preserving first-seen order. */
export function byWorkloadPolicy(
  rows: ResultRow[],
): Map<string, Map<string, ResultRow[]>> {
  const out = new Map<string, Map<string, ResultRow[]>>();
  for (const r of rows) {
    let w = out.get(r.workload);
    if (!w) out.set(r.workload, (w = new Map()));
    let p = w.get(r.policy);
    if (!p) w.set(r.policy, (p = []));
    p.push(r);
  }
  return out;
}
