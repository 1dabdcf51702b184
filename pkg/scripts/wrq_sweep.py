#!/usr/bin/env python3
"""Write-queue size sensitivity: baseline vs bard-h across WRQ capacities.

Sweeps wrq in {32,48,64,96,128} (watermarks rescaled to the default 1/6 and
5/6 ratios) on the directional workload and writes a sweep-style CSV whose
`# sweep` header lines plus row order recover each row's configuration.
"""

import argparse
import sys
import time

from blpsim.cli import sweep_points
from blpsim.config import RunConfig, apply_overrides, config_items
from blpsim.cache import CacheConfig
from blpsim.engine import run_config
from blpsim.stats import csv_header, csv_row
from blpsim.workload import WorkloadSpec


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/wrq_sweep.csv")
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--length", type=int, default=2_000_000)
    ap.add_argument("--llc", type=int, default=16 << 20)
    ap.add_argument("--footprint", type=int, default=64 << 20)
    ap.add_argument("--sizes", default="32,48,64,96,128")
    args = ap.parse_args(argv)

    base = RunConfig(
        workload=WorkloadSpec(
            kind="uniform_random",
            length=args.length,
            seed=args.seed,
            footprint_bytes=args.footprint,
            write_fraction=0.5,
        ),
        cache=CacheConfig(capacity_bytes=args.llc),
    )
    axes = [
        ("cache.write_policy", ["baseline", "bard-h"]),
        ("mc.wrq", args.sizes.split(",")),
    ]
    points = sweep_points(axes)
    text = "".join(f"# sweep {k}={','.join(v)}\n" for k, v in axes)
    text += csv_header(config_items(base))
    t_all = time.perf_counter()
    for pt in points:
        t0 = time.perf_counter()
        rep = run_config(apply_overrides(base, pt))
        text += csv_row(rep)
        print(
            f"{pt['cache.write_policy']} wrq={pt['mc.wrq']}: "
            f"cycles={rep.total_cycles} wblp={rep.wblp_mean:.2f} "
            f"[{time.perf_counter() - t0:.1f}s]",
            flush=True,
        )
    with open(args.out, "w") as f:
        f.write(text)
    print(f"wrote {len(points)} rows to {args.out} "
          f"[{time.perf_counter() - t_all:.0f}s total]")
    return 0


if __name__ == "__main__":
    sys.exit(main())
