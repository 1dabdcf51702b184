"""CLI contract tests: exit codes, precedence, sweep order, provenance."""

import pytest

from blpsim import cli
from blpsim.config import apply_overrides, config_hash, from_items
from blpsim.engine import run_config
from blpsim.errors import SimulationContractError
from blpsim.geometry import AddressDecoder, DramGeometry, default_mapping
from blpsim.stats import parse_csv
from blpsim.workload import WorkloadSpec, make_generator

SMALL = [
    "--length", "3000", "--footprint", "0x100000",
    "--set", "cache.capacity_bytes=262144",
]


def test_run_writes_csv_row(tmp_path):
    out = str(tmp_path / "r.csv")
    rc = cli.main(["run", "--policy", "bard-h", "--seed", "3", *SMALL,
                   "--out", out])
    assert rc == 0
    items, rows = parse_csv(out)
    assert len(rows) == 1
    assert rows[0]["policy"] == "bard-h"
    assert rows[0]["seed"] == "3"
    assert ("cache.write_policy", "bard-h") in items
    # Full provenance: the header rebuilds the exact config that made the row.
    assert rows[0]["config_hash"] == config_hash(from_items(items))


def test_run_stdout_csv_and_summary(capsys):
    assert cli.main(["run", *SMALL]) == 0
    cap = capsys.readouterr()
    assert cap.out.startswith("# cfg ")
    assert "baseline/lru uniform_random seed=0" in cap.err


def test_x8_prints_effective_spacing(capsys):
    assert cli.main(["run", "--x8", *SMALL]) == 0
    assert "effective tCCD_L_WR: 24 cycles" in capsys.readouterr().err


def test_usage_errors_exit_1():
    with pytest.raises(SystemExit) as e:
        cli.main(["run", "--no-such-flag"])
    assert e.value.code == 1
    with pytest.raises(SystemExit) as e:
        cli.main([])
    assert e.value.code == 1


@pytest.mark.parametrize(
    "argv",
    [
        ["run", "--set", "nope.key=1"],
        ["run", "--set", "mc.wrq_capacity=4"],  # watermarks above capacity
        ["run", "--set", "workload.write_fraction=2.0"],
        ["run", "--workload", "trace"],  # no path given
        ["validate", "--config", "/no/such/file"],
        ["sweep", "--sweep", "/no/such/file", "--out", "/tmp/x.csv"],
    ],
)
def test_config_errors_exit_2(argv):
    assert cli.main(argv) == 2


def test_precedence_defaults_file_set_flags(tmp_path, capsys):
    f = tmp_path / "base.cfg"
    f.write_text("# comment\ncache.write_policy=eager\nworkload.seed=5\n")
    rc = cli.main([
        "validate", "--config", str(f),
        "--set", "cache.write_policy=vwq",
        "--policy", "bard-e", "--print-config",
    ])
    assert rc == 0
    out = capsys.readouterr().out
    assert "cache.write_policy=bard-e" in out  # flag beats --set beats file
    assert "workload.seed=5" in out  # untouched file key survives
    assert out.splitlines()[-1].startswith("ok ")


def test_validate_accepts_every_policy():
    for pol in ("baseline", "eager", "vwq", "bard-e", "bard-c", "bard-h"):
        assert cli.main(["validate", "--policy", pol]) == 0


def test_gen_trace_replays_like_the_generator(tmp_path):
    path = str(tmp_path / "t.blpt")
    assert cli.main(["gen-trace", "--workload", "stream_add",
                     "--length", "500", "--seed", "2", "--out", path]) == 0
    want = make_generator(
        WorkloadSpec(kind="stream_add", length=500, seed=2)
    )
    got = make_generator(WorkloadSpec(kind="trace", path=path))
    for (wk, wa, _), (gk, ga, _) in zip(want.chunks(), got.chunks()):
        assert list(wk) == list(gk)
        assert list(wa) == list(ga)


def test_run_replays_generated_trace(tmp_path):
    path = str(tmp_path / "t.blpt")
    cli.main(["gen-trace", "--workload", "uniform_random", "--length", "2000",
              "--footprint", "0x100000", "--out", path])
    out = str(tmp_path / "r.csv")
    assert cli.main(["run", "--trace", path, "--set",
                     "cache.capacity_bytes=262144", "--out", out]) == 0
    _, rows = parse_csv(out)
    assert rows[0]["workload"] == "trace"
    assert rows[0]["accesses"] == "2000"


def _sweep_files(tmp_path):
    ax = tmp_path / "ax.txt"
    ax.write_text("cache.write_policy=baseline,bard-h\nmc.wrq=32,48\n")
    return str(ax), str(tmp_path / "sweep.csv")


def test_sweep_order_and_row_provenance(tmp_path):
    ax, out = _sweep_files(tmp_path)
    assert cli.main(["sweep", "--sweep", ax, "--out", out, *SMALL]) == 0
    items, rows = parse_csv(out)
    assert [r["policy"] for r in rows] == [
        "baseline", "baseline", "bard-h", "bard-h",
    ]  # first axis outermost, values in listed order
    base = from_items(items)
    points = cli.sweep_points(cli.read_sweep_file(ax))
    assert len(points) == len(rows) == 4
    # Any row regenerates from the header config plus its product point.
    rc3 = apply_overrides(base, points[3])
    assert rows[3]["config_hash"] == config_hash(rc3)
    rep = run_config(rc3)
    assert str(rep.total_cycles) == rows[3]["total_cycles"]
    assert rc3.mc.wrq_capacity == 48 and rc3.mc.high_watermark == 40


def test_sweep_parallel_merge_is_deterministic(tmp_path, monkeypatch):
    ax, out = _sweep_files(tmp_path)
    cli.main(["sweep", "--sweep", ax, "--out", out, *SMALL])
    seq = open(out).read()
    monkeypatch.setenv("BLPSIM_THREADS", "2")
    cli.main(["sweep", "--sweep", ax, "--out", out, *SMALL])
    assert open(out).read() == seq


def test_contract_violation_exits_3(monkeypatch):
    class Boom:
        def __init__(self, rc):
            pass

        def run(self):
            raise SimulationContractError("synthetic")

    monkeypatch.setattr(cli, "Engine", Boom)
    assert cli.main(["run", *SMALL]) == 3


def test_dump_timings_reports_x8_spacing(capsys):
    cli.main(["dump-timings"])
    assert "tccd_l_wr = 48 cycles (20.0 ns)" in capsys.readouterr().out
    cli.main(["dump-timings", "--x8"])
    out = capsys.readouterr().out
    assert "tccd_l_wr = 24 cycles (10.0 ns)" in out
    assert "write_conflict_gap = 188 cycles" in out


def test_dump_mapping_matches_decoder(capsys):
    assert cli.main(["dump-mapping", "--addr", "0x40",
                     "--addr", "0x12345678"]) == 0
    out = capsys.readouterr().out
    assert "subchannel: physical bits [6]" in out
    dec = AddressDecoder(DramGeometry(), default_mapping(DramGeometry()))
    c = dec.decode(0x12345678)
    assert f"bankgroup={c.bankgroup} bank={c.bank} row={c.row}" in out
    assert "0x40 -> channel=0 subchannel=1" in out


def test_episode_and_command_log_spill(tmp_path):
    ep = str(tmp_path / "ep.csv")
    lg = str(tmp_path / "cmd.log")
    rc = cli.main([
        "run", "--length", "3000", "--footprint", "0x100000",
        "--set", "cache.capacity_bytes=65536",
        "--episodes", ep, "--log-commands", lg,
        "--out", str(tmp_path / "r.csv"),
    ])
    assert rc == 0
    ep_lines = open(ep).read().splitlines()
    assert ep_lines[0] == "channel,subchannel,start,end,writes,banks,trigger"
    assert len(ep_lines) > 1
    cmds = {line.split(",")[1] for line in open(lg).read().splitlines()}
    assert {"ACT", "RD", "WR"} <= cmds
