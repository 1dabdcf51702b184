"""Command-line front end: single runs, sweeps, trace generation, dumps.

Configuration flows defaults -> config file -> --set pairs -> dedicated
flags, all through the same flat key=value space (see config.py). Exit
codes: 0 ok, 1 usage, 2 bad configuration or input, 3 simulation contract
violation.
"""

import argparse
import dataclasses
import itertools
import os
import sys
import tempfile

from .config import (
    RunConfig,
    apply_overrides,
    config_hash,
    config_items,
)
from .engine import Engine
from .errors import ConfigError, SimulationContractError, TraceParseError
from .geometry import AddressDecoder, default_mapping
from .stats import csv_header, csv_row
from .timing import cycles_to_ns
from .workload import (
    WORKLOAD_KINDS,
    WorkloadSpec,
    make_generator,
    write_csv_trace,
    write_trace,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONFIG = 2
EXIT_CONTRACT = 3

_CMD_NAMES = ("ACT", "PRE", "RD", "WR")


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; the contract reserves 2 for config."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def read_config_file(path: str) -> dict[str, str]:
    """Flat `key=value` lines; blank lines and # comments are skipped."""
    pairs: dict[str, str] = {}
    try:
        lines = open(path).read().splitlines()
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from None
    for ln, line in enumerate(lines, 1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        key, eq, val = s.partition("=")
        if not eq or not key.strip():
            raise ConfigError(f"{path}:{ln}: expected key=value, got {s!r}")
        pairs[key.strip()] = val.strip()
    return pairs


def read_sweep_file(path: str) -> list[tuple[str, list[str]]]:
    """One `key=v1,v2,...` axis per line, kept in file order."""
    axes: list[tuple[str, list[str]]] = []
    try:
        lines = open(path).read().splitlines()
    except OSError as e:
        raise ConfigError(f"cannot read sweep file {path}: {e}") from None
    for ln, line in enumerate(lines, 1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        key, eq, vals = s.partition("=")
        if not eq or not key.strip():
            raise ConfigError(f"{path}:{ln}: expected key=v1,v2,..., got {s!r}")
        values = [v.strip() for v in vals.split(",") if v.strip()]
        if not values:
            raise ConfigError(f"{path}:{ln}: no values for {key.strip()!r}")
        axes.append((key.strip(), values))
    return axes


def sweep_points(axes: list[tuple[str, list[str]]]) -> list[dict[str, str]]:
    """Cartesian product as override dicts: first axis outermost, values in
    listed order. This order is the row order of the merged CSV, so a row's
    configuration is recoverable from its index."""
    keys = [k for k, _ in axes]
    out = []
    for combo in itertools.product(*(vals for _, vals in axes)):
        out.append(dict(zip(keys, combo)))
    return out


# Dedicated flags and the config keys they set.
_FLAG_KEYS = (
    ("policy", "cache.write_policy"),
    ("repl", "cache.repl"),
    ("workload", "workload.kind"),
    ("seed", "workload.seed"),
    ("length", "workload.length"),
    ("footprint", "workload.footprint_bytes"),
    ("write_fraction", "workload.write_fraction"),
    ("wrq", "mc.wrq"),
    ("channels", "geometry.channels"),
)


def _config_from_args(args) -> RunConfig:
    pairs: dict[str, str] = {}
    for path in args.config or ():
        pairs.update(read_config_file(path))
    for item in args.set or ():
        key, eq, val = item.partition("=")
        if not eq or not key:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        pairs[key] = val
    for attr, key in _FLAG_KEYS:
        val = getattr(args, attr, None)
        if val is not None:
            pairs[key] = str(val)
    if getattr(args, "trace", None):
        pairs["workload.kind"] = "trace"
        pairs["workload.path"] = args.trace
    if getattr(args, "x8", False):
        pairs["x8"] = "true"
    if getattr(args, "ideal", False):
        pairs["mc.ideal_write"] = "true"
    if getattr(args, "checked", False):
        pairs["checked"] = "true"
    if getattr(args, "episodes", None):
        pairs["keep_episodes"] = "true"
    if getattr(args, "log_commands", None):
        pairs["log_commands"] = "true"
    return apply_overrides(RunConfig(), pairs)


def _write_atomic(path: str, text: str):
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".blpsim-")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


def _run_one(rc: RunConfig):
    eng = Engine(rc)
    report = eng.run()
    return report, eng


def cmd_run(args) -> int:
    rc = _config_from_args(args)
    report, eng = _run_one(rc)
    text = csv_header(config_items(rc)) + csv_row(report)
    info = sys.stdout if args.out else sys.stderr
    if args.out:
        _write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    print(
        f"{report.policy}/{report.repl} {report.workload} seed={report.seed}: "
        f"cycles={report.total_cycles} wblp={report.wblp_mean:.2f} "
        f"wmf={report.write_mode_fraction:.4f} "
        f"w2w={report.w2w_mean_cycles:.2f}/{report.w2w_max_cycles}",
        file=info,
    )
    if rc.x8:
        tp = rc.effective_timing()
        print(f"effective tCCD_L_WR: {tp.tccd_l_wr} cycles", file=info)
    if args.episodes:
        rows = ["channel,subchannel,start,end,writes,banks,trigger"]
        rows += [",".join(map(str, ep)) for ep in eng.stats.episodes]
        _write_atomic(args.episodes, "\n".join(rows) + "\n")
    if args.log_commands:
        rows = [
            f"{t},{_CMD_NAMES[cmd]},{sc},{bank},{row}"
            for t, cmd, sc, bank, row in eng.log
        ]
        _write_atomic(args.log_commands, "\n".join(rows) + "\n")
    return EXIT_OK


def _sweep_worker(rc: RunConfig):
    return _run_one(rc)[0]


def cmd_sweep(args) -> int:
    base = _config_from_args(args)
    axes = read_sweep_file(args.sweep)
    points = sweep_points(axes)
    configs = [apply_overrides(base, pt) for pt in points]
    workers = os.environ.get("BLPSIM_THREADS", "1")
    try:
        workers = max(1, int(workers))
    except ValueError:
        raise ConfigError(f"BLPSIM_THREADS: expected an integer, got {workers!r}")
    workers = min(workers, len(configs)) or 1
    if workers == 1:
        reports = []
        for i, rc in enumerate(configs):
            print(
                f"[{i + 1}/{len(configs)}] "
                + " ".join(f"{k}={v}" for k, v in sorted(points[i].items())),
                file=sys.stderr,
            )
            reports.append(_sweep_worker(rc))
    else:
        import concurrent.futures as cf

        with cf.ProcessPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(_sweep_worker, configs, chunksize=1))
    out = [f"# sweep {k}={','.join(vals)}" for k, vals in axes]
    text = "\n".join(out) + "\n" if out else ""
    text += csv_header(config_items(base))
    for rep in reports:
        text += csv_row(rep)
    _write_atomic(args.out, text)
    print(f"wrote {len(reports)} rows to {args.out}", file=sys.stderr)
    return EXIT_OK


def cmd_gen_trace(args) -> int:
    spec = WorkloadSpec(
        kind=args.workload,
        length=args.length,
        seed=args.seed,
        footprint_bytes=args.footprint,
        write_fraction=args.write_fraction,
        streams=args.streams,
        base_addr=args.base_addr,
    )
    if spec.kind == "trace":
        raise ConfigError("gen-trace generates from a synthetic workload kind")
    writer = write_csv_trace if args.out.endswith(".csv") else write_trace
    n = writer(args.out, make_generator(spec).chunks())
    print(f"wrote {n} accesses to {args.out}")
    return EXIT_OK


def cmd_validate(args) -> int:
    rc = _config_from_args(args)
    Engine(rc)  # constructing one validates mapping, timing, workload, cache
    if args.print_config:
        for k, v in config_items(rc):
            print(f"{k}={v}")
    print(f"ok {config_hash(rc)}")
    return EXIT_OK


def cmd_dump_timings(args) -> int:
    rc = _config_from_args(args)
    tp = rc.effective_timing()
    for f in dataclasses.fields(tp):
        v = getattr(tp, f.name)
        print(f"{f.name} = {v} cycles ({cycles_to_ns(v):.1f} ns)")
    g = tp.write_conflict_gap
    print(f"write_conflict_gap = {g} cycles ({cycles_to_ns(g):.1f} ns)")
    return EXIT_OK


def cmd_dump_mapping(args) -> int:
    rc = _config_from_args(args)
    mapping = default_mapping(rc.geometry, pbpl=rc.pbpl)
    dec = AddressDecoder(rc.geometry, mapping)
    cap = rc.geometry.capacity_bytes()
    print(f"capacity {cap} bytes, {rc.geometry.total_banks} banks")
    by_field: dict[str, list[int]] = {}
    for name, pos in mapping.fields:
        by_field.setdefault(name, []).append(pos)
    for name, bits in by_field.items():
        print(f"{name}: physical bits {bits} (LSB first)")
    if mapping.pbpl and mapping.pbpl_row_bits:
        print(f"pbpl: bank bits XOR row bits {list(mapping.pbpl_row_bits)}")
    else:
        print("pbpl: off")
    for text in args.addr or ():
        try:
            addr = int(text, 0)
        except ValueError:
            raise ConfigError(f"--addr expects an integer, got {text!r}")
        c = dec.decode(addr)
        print(
            f"0x{addr:x} -> channel={c.channel} subchannel={c.subchannel} "
            f"bankgroup={c.bankgroup} bank={c.bank} row={c.row} "
            f"column={c.column}"
        )
    return EXIT_OK


def _add_config_args(p: argparse.ArgumentParser):
    p.add_argument("--config", action="append", metavar="FILE",
                   help="flat key=value config file (repeatable)")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override a single config key (repeatable)")
    p.add_argument("--policy", help="cache.write_policy")
    p.add_argument("--repl", help="cache.repl")
    p.add_argument("--workload", choices=WORKLOAD_KINDS, help="workload.kind")
    p.add_argument("--trace", metavar="FILE",
                   help="replay this trace file (sets workload.kind=trace)")
    p.add_argument("--seed", type=int, help="workload.seed")
    p.add_argument("--length", type=int, help="workload.length")
    p.add_argument("--footprint", type=lambda s: int(s, 0),
                   help="workload.footprint_bytes")
    p.add_argument("--write-fraction", dest="write_fraction", type=float,
                   help="workload.write_fraction")
    p.add_argument("--wrq", type=int,
                   help="write queue size, watermarks rescaled")
    p.add_argument("--channels", type=int, help="geometry.channels")
    p.add_argument("--x8", action="store_true",
                   help="x8-device write spacing preset")
    p.add_argument("--ideal", action="store_true",
                   help="minimum-latency write mode (mc.ideal_write)")
    p.add_argument("--checked", action="store_true",
                   help="re-verify every committed command time")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="blpsim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("run", help="simulate one configuration")
    _add_config_args(p)
    p.add_argument("--out", metavar="CSV",
                   help="stats CSV path (default: stdout)")
    p.add_argument("--episodes", metavar="CSV", help="per-episode CSV path")
    p.add_argument("--log-commands", dest="log_commands", metavar="FILE",
                   help="spill the full command log")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run a cartesian sweep to one CSV")
    _add_config_args(p)
    p.add_argument("--sweep", required=True, metavar="FILE",
                   help="axis file: one key=v1,v2,... per line")
    p.add_argument("--out", required=True, metavar="CSV")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("gen-trace", help="write a synthetic trace file")
    p.add_argument("--workload", required=True, choices=WORKLOAD_KINDS)
    p.add_argument("--length", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--footprint", type=lambda s: int(s, 0), default=64 << 20)
    p.add_argument("--write-fraction", dest="write_fraction", type=float,
                   default=0.5)
    p.add_argument("--streams", type=int, default=4)
    p.add_argument("--base-addr", dest="base_addr", type=lambda s: int(s, 0),
                   default=0)
    p.add_argument("--out", required=True,
                   help="output path (.csv for text, else binary)")
    p.set_defaults(func=cmd_gen_trace)

    p = sub.add_parser("validate", help="check a configuration and exit")
    _add_config_args(p)
    p.add_argument("--print-config", action="store_true",
                   help="print the resolved flat key=value pairs")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("dump-timings",
                       help="print effective timing parameters")
    _add_config_args(p)
    p.set_defaults(func=cmd_dump_timings)

    p = sub.add_parser("dump-mapping",
                       help="print the address-to-DRAM-coordinate layout")
    _add_config_args(p)
    p.add_argument("--addr", action="append", metavar="ADDR",
                   help="also decode this address (repeatable)")
    p.set_defaults(func=cmd_dump_mapping)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, TraceParseError) as e:
        print(f"blpsim: config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except SimulationContractError as e:
        print(f"blpsim: contract violation: {e}", file=sys.stderr)
        return EXIT_CONTRACT


if __name__ == "__main__":
    sys.exit(main())
