"""Generate the small fixture CSVs the report package tests against.

Produces two files under report/fixtures/:

  golden.csv        plain runs: 4 policy variants x 3 workloads, seed 1
  golden_sweep.csv  baseline vs bard-h across write-queue capacities

Scale is kept small so regeneration takes well under a minute; the report
tests only care about the CSV contract, not simulation scale.
"""

from __future__ import annotations

import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from blpsim.cache import CacheConfig
from blpsim.cli import sweep_points
from blpsim.config import (
    ControllerConfig,
    RunConfig,
    WorkloadSpec,
    apply_overrides,
    config_items,
)
from blpsim.engine import run_config
from blpsim.stats import csv_header, csv_row


LENGTH = 120_000
FOOTPRINT = 8 << 20
CACHE = CacheConfig(capacity_bytes=2 << 20)
WORKLOADS = ("uniform_random", "stream_triad", "mixed")
SEED = 1


def base_config(workload: str) -> RunConfig:
    return RunConfig(
        workload=WorkloadSpec(
            kind=workload,
            length=LENGTH,
            footprint_bytes=FOOTPRINT,
            seed=SEED,
            write_fraction=0.5,
        ),
        cache=CACHE,
    )


def write_plain(path: str) -> None:
    variants = [
        ("baseline", False),
        ("bard-h", False),
        ("vwq", False),
        ("baseline", True),  # ideal write timing reference
    ]
    rows = []
    for workload in WORKLOADS:
        for policy, ideal in variants:
            rc = base_config(workload)
            rc = RunConfig(
                workload=rc.workload,
                cache=CacheConfig(capacity_bytes=CACHE.capacity_bytes, write_policy=policy),
                mc=ControllerConfig(ideal_write=ideal),
            )
            report = run_config(rc)
            rows.append(csv_row(report))
            print(f"  {report.policy:16s} {workload:16s} cycles={report.total_cycles}")
    with open(path, "w") as f:
        f.write(csv_header(config_items(base_config(WORKLOADS[0]))))
        for row in rows:
            f.write(row)
    print(f"wrote {path} ({len(rows)} rows)")


def write_sweep(path: str) -> None:
    base = base_config("uniform_random")
    axes = [
        ("cache.write_policy", ["baseline", "bard-h"]),
        ("mc.wrq", ["32", "48", "64", "96", "128"]),
    ]
    points = sweep_points(axes)
    with open(path, "w") as f:
        for key, values in axes:
            f.write(f"# sweep {key}={','.join(values)}\n")
        f.write(csv_header(config_items(base)))
        for point in points:
            rc = apply_overrides(base, point)
            report = run_config(rc)
            f.write(csv_row(report))
            print(f"  {dict(point)} cycles={report.total_cycles}")
    print(f"wrote {path} ({len(points)} rows)")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument(
        "--out-dir",
        default=os.path.join(os.path.dirname(__file__), "..", "report", "fixtures"),
    )
    args = ap.parse_args()
    os.makedirs(args.out_dir, exist_ok=True)
    write_plain(os.path.join(args.out_dir, "golden.csv"))
    write_sweep(os.path.join(args.out_dir, "golden_sweep.csv"))


if __name__ == "__main__":
    main()
