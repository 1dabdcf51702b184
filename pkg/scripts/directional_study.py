#!/usr/bin/env python3
"""Directional comparison: baseline vs bard-h vs ideal write timing.

Runs the write-heavy random workload (write_fraction 0.5, footprint 4x the
LLC) across seeds and writes one stats CSV with a row per (policy, seed).
The headline comparisons printed at the end are the ones the acceptance
suite checks: WBLP gain, write-mode-fraction drop, and the per-seed
w2w-delay ordering ideal <= bard-h <= baseline.
"""

import argparse
import sys
import time
from dataclasses import replace

from blpsim.config import RunConfig, config_items
from blpsim.controller import ControllerConfig
from blpsim.cache import CacheConfig
from blpsim.engine import run_config
from blpsim.stats import csv_header, csv_row
from blpsim.workload import WorkloadSpec


def base_config(args) -> RunConfig:
    return RunConfig(
        workload=WorkloadSpec(
            kind="uniform_random",
            length=args.length,
            footprint_bytes=args.footprint,
            write_fraction=0.5,
        ),
        cache=CacheConfig(capacity_bytes=args.llc),
    )


def point(base: RunConfig, policy: str, seed: int) -> RunConfig:
    rc = replace(base, workload=replace(base.workload, seed=seed))
    if policy == "ideal":
        return replace(rc, mc=ControllerConfig(ideal_write=True))
    return replace(rc, cache=replace(rc.cache, write_policy=policy))


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/directional.csv")
    ap.add_argument("--seeds", type=int, default=5, help="seeds 0..N-1")
    ap.add_argument("--length", type=int, default=2_000_000)
    ap.add_argument("--llc", type=int, default=16 << 20)
    ap.add_argument("--footprint", type=int, default=64 << 20)
    args = ap.parse_args(argv)

    base = base_config(args)
    policies = ("baseline", "bard-h", "ideal")
    rows = {}
    lines = [
        f"# point policy={p} seed={s}"
        for p in policies
        for s in range(args.seeds)
    ]
    t_all = time.perf_counter()
    for p in policies:
        for s in range(args.seeds):
            t0 = time.perf_counter()
            rows[p, s] = run_config(point(base, p, s))
            print(
                f"{p} seed={s}: cycles={rows[p, s].total_cycles} "
                f"wblp={rows[p, s].wblp_mean:.2f} "
                f"wmf={rows[p, s].write_mode_fraction:.4f} "
                f"w2w={rows[p, s].w2w_mean_cycles:.2f}/{rows[p, s].w2w_max_cycles} "
                f"[{time.perf_counter() - t0:.1f}s]",
                flush=True,
            )

    text = "\n".join(lines) + "\n" + csv_header(config_items(base))
    for p in policies:
        for s in range(args.seeds):
            text += csv_row(rows[p, s])
    with open(args.out, "w") as f:
        f.write(text)

    n = args.seeds
    mean = lambda xs: sum(xs) / len(xs)
    wblp_b = mean([rows["baseline", s].wblp_mean for s in range(n)])
    wblp_h = mean([rows["bard-h", s].wblp_mean for s in range(n)])
    wmf_b = mean([rows["baseline", s].write_mode_fraction for s in range(n)])
    wmf_h = mean([rows["bard-h", s].write_mode_fraction for s in range(n)])
    order_ok = all(
        rows["ideal", s].w2w_mean_cycles
        <= rows["bard-h", s].w2w_mean_cycles
        <= rows["baseline", s].w2w_mean_cycles
        for s in range(n)
    )
    xwb = [
        rows["bard-h", s].writebacks_total / rows["baseline", s].writebacks_total - 1
        for s in range(n)
    ]
    dmiss = [
        abs(rows["bard-h", s].misses / rows["baseline", s].misses - 1)
        for s in range(n)
    ]
    print(f"\nwrote {3 * n} rows to {args.out} "
          f"[{time.perf_counter() - t_all:.0f}s total]")
    print(f"WBLP mean: baseline={wblp_b:.2f} bard-h={wblp_h:.2f} "
          f"(+{wblp_h - wblp_b:.2f} banks)")
    print(f"write-mode fraction: baseline={wmf_b:.4f} bard-h={wmf_h:.4f}")
    print(f"w2w ordering ideal <= bard-h <= baseline per seed: {order_ok}")
    print(f"extra writebacks: mean {mean(xwb) * 100:+.1f}% "
          f"(per seed {[f'{x * 100:+.1f}%' for x in xwb]})")
    print(f"miss delta: mean {mean(dmiss) * 100:.2f}% "
          f"(per seed {[f'{x * 100:.2f}%' for x in dmiss]})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
