"""Memory-controller tests: drain modes, scheduling order, page policy.

Commands are checked two ways: targeted traces with hand-computed issue
cycles, and randomized streams replayed through the independent legality
checker in naive_checker.py.
"""

import random

import pytest

from blpsim.controller import INF, MODE_READ, MODE_WRITE, ControllerConfig, MemoryController
from blpsim.errors import ConfigError
from blpsim.geometry import DramGeometry
from blpsim.stats import RunStats, TRIGGER_FINAL, TRIGGER_HIGH, TRIGGER_IDLE
from blpsim.timing import ACT, PRE, RD, WR, TimingParams

from naive_checker import check_command_stream

GEOM = DramGeometry()
TP = TimingParams()
BPG = GEOM.banks_per_bankgroup


def make_mc(checked=True, **kw):
    cfg = ControllerConfig(**kw)
    stats = RunStats()
    log = []
    mc = MemoryController(0, cfg, TP, GEOM, stats, log=log, checked=checked)
    return mc, stats, log


_next_addr = [0]


def wr(mc, bank, row, now=0, sc=0, addr=None):
    if addr is None:
        _next_addr[0] += 64
        addr = _next_addr[0]
    return mc.enqueue_write(addr, sc, bank // BPG, bank, row, now)


def rd(mc, bank, row, now=0, sc=0, addr=None, req_id=0):
    if addr is None:
        _next_addr[0] += 64
        addr = _next_addr[0]
    return mc.enqueue_read(addr, sc, bank // BPG, bank, row, now, req_id)


def drain(mc, limit=1 << 40):
    comps = []
    t, c = mc.schedule(limit)
    comps.extend(c)
    while t < INF and t <= limit:
        t, c = mc.schedule(limit)
        comps.extend(c)
        if not c and t >= INF:
            break
    return comps


def test_config_validation():
    with pytest.raises(ConfigError):
        ControllerConfig(low_watermark=10, high_watermark=10)
    with pytest.raises(ConfigError):
        ControllerConfig(low_watermark=0)
    with pytest.raises(ConfigError):
        ControllerConfig(high_watermark=49, wrq_capacity=48)
    with pytest.raises(ConfigError):
        ControllerConfig(page_policy="closed")
    c = ControllerConfig().with_wrq_capacity(96)
    assert (c.low_watermark, c.high_watermark) == (16, 80)


def test_high_watermark_drain_stops_at_low():
    # One write to each of the 32 banks plus 8 younger row hits on banks
    # 0..7, filling the WRQ to the high watermark. The drain must commit
    # exactly high - low = 32 writes and stop, because a read is waiting.
    # Opportunistic drains are off so the leftovers stay queued afterwards.
    mc, stats, log = make_mc(opportunistic_drain=False)
    assert rd(mc, bank=0, row=5, req_id=7) == "accept"
    for b in range(32):
        assert wr(mc, b, 0)
    for b in range(8):
        assert wr(mc, b, 0, now=40)
    comps = drain(mc)
    assert stats.episode_count == 1
    ch, sc, start, end, writes, banks, trig = stats.episodes[0]
    assert (writes, trig) == (32, TRIGGER_HIGH)
    assert end > start > 0
    # WBLP bookkeeping must match the committed command stream.
    seen = {b for t, c, _, b, _ in log if c == WR and start <= t <= end}
    assert banks == len(seen)
    assert banks >= 16  # the drain spread across many banks
    assert mc.wrq_count[0] == 8
    assert mc.mode[0] == MODE_READ
    assert [r for r, _ in comps] == [7]
    assert not check_command_stream(log, TP)


def test_opportunistic_drain_and_final_drain():
    mc, stats, log = make_mc()
    for b in (0, 8, 16):
        assert wr(mc, b, 0)
    drain(mc)
    assert stats.episode_count == 1
    assert stats.episodes[0][6] == TRIGGER_IDLE
    assert stats.episodes[0][4:6] == (3, 3)
    assert not mc.busy()

    mc2, stats2, _ = make_mc(opportunistic_drain=False)
    for b in (0, 8, 16):
        assert wr(mc2, b, 0)
    t, _ = mc2.schedule(1 << 40)
    assert t == INF and mc2.wrq_count[0] == 3  # nothing drains on its own
    mc2.final_drain()
    drain(mc2)
    assert not mc2.busy()
    assert stats2.episodes[0][6] == TRIGGER_FINAL


def test_store_forward_and_backpressure():
    mc, stats, _ = make_mc(rq_capacity=4)
    assert wr(mc, 3, 9, addr=4096)
    assert rd(mc, 3, 9, addr=4096) == "forward"
    assert stats.forwards == 1
    assert mc.rq_count == 0
    for i in range(4):
        assert rd(mc, i, 0, req_id=i) == "accept"
    assert rd(mc, 5, 0) == "backpressure"


def test_write_coalescing():
    mc, stats, _ = make_mc()
    assert wr(mc, 2, 1, addr=128)
    assert wr(mc, 2, 1, addr=128)
    assert stats.coalesced_writes == 1
    assert mc.wrq_count[0] == 1


def test_wrq_full_then_slot_wake():
    mc, _, _ = make_mc(wrq_capacity=4, low_watermark=1, high_watermark=3)
    for b in range(4):
        assert wr(mc, b * BPG, 0)
    assert not wr(mc, 16, 0)
    t, _ = mc.schedule(1 << 40, wr_slot_sc=0)
    first_wr = min(t for t, c, *_ in mc.log if c == WR)
    assert t == first_wr + 1  # stopped right after the freeing write
    assert wr(mc, 16, 0, now=t)


def test_single_bank_row_conflict_gap():
    # Three writes to one bank, three rows: every turnaround pays
    # CWL + tWR + tRP + tRCD = 188 cycles between WR issues.
    mc, stats, log = make_mc()
    for row in range(3):
        assert wr(mc, 12, row)
    drain(mc)
    assert stats.w2w_hist == {188: 2}
    assert stats.w2w_max == TP.write_conflict_gap
    assert not check_command_stream(log, TP)


def test_row_hit_same_bankgroup_gap():
    mc, stats, log = make_mc()
    assert wr(mc, 12, 7)
    assert wr(mc, 12, 7, addr=1 << 20)
    drain(mc)
    assert stats.w2w_hist == {TP.tccd_l_wr: 1}
    assert stats.act_commands == 1  # row stayed open between the writes
    assert stats.pre_commands == 1  # adaptive close once the queue is empty
    assert not check_command_stream(log, TP)


def test_adaptive_close_timing():
    # Lone write: the precharge waits for write recovery, so it lands
    # exactly CWL + tWR after the write issues.
    mc, _, log = make_mc()
    assert wr(mc, 0, 0)
    drain(mc)
    wr_t = next(t for t, c, *_ in log if c == WR)
    pre_t = next(t for t, c, *_ in log if c == PRE)
    assert pre_t == wr_t + TP.cwl + TP.twr
    # A later write to a new row activates tRP after the precharge.
    assert wr(mc, 0, 1, now=pre_t)
    drain(mc)
    act2 = [t for t, c, *_ in log if c == ACT][1]
    assert act2 == pre_t + TP.trp
    assert not check_command_stream(log, TP)


def test_page_decision_truth_table():
    mc, _, _ = make_mc()
    assert wr(mc, 4, 11)
    assert mc.page_decision(0, 4, 11) == "keep_open"
    assert mc.page_decision(0, 4, 12) == "precharge"
    assert mc.page_decision(0, 5, 11) == "precharge"
    assert rd(mc, 9, 3)
    assert mc.page_decision(0, 9, 3) == "keep_open"
    assert mc.page_decision(1, 4, 11) == "precharge"  # other sub-channel


def test_ideal_write_cadence():
    # Ideal mode ignores bank state entirely: 32 writes to 32 banks issue
    # back to back at the burst length, and so do row conflicts.
    mc, stats, _ = make_mc(checked=False, ideal_write=True)
    for b in range(32):
        assert wr(mc, b, b % 3)
    drain(mc)
    assert stats.w2w_hist == {TP.burst: 31}
    assert stats.act_commands == 0 and stats.pre_commands == 0


def test_reads_same_row_share_activation():
    mc, stats, log = make_mc()
    assert rd(mc, 6, 2, req_id=1)
    assert rd(mc, 6, 2, req_id=2)
    comps = drain(mc)
    rds = [t for t, c, *_ in log if c == RD]
    assert len(rds) == 2 and rds[1] - rds[0] == TP.tccd_l_rd
    assert stats.act_commands == 1
    assert comps == [(1, rds[0] + TP.cl + TP.burst), (2, rds[1] + TP.cl + TP.burst)]
    assert not check_command_stream(log, TP)


def test_write_mode_blocks_reads_until_low():
    # While draining, reads queue up but do not issue; the drain stops at
    # the low watermark because they are waiting.
    mc, stats, log = make_mc(opportunistic_drain=False)
    for b in range(32):
        assert wr(mc, b, 0)
    for b in range(8):
        assert wr(mc, b, 0, now=40)
    assert rd(mc, 20, 4, req_id=3) == "accept"
    drain(mc)
    first_rd = next(t for t, c, *_ in log if c == RD)
    last_wr_in_ep = max(
        t for t, c, *_ in log if c == WR and t <= stats.episodes[0][3]
    )
    assert first_rd > last_wr_in_ep
    assert mc.wrq_count[0] == 8


def test_random_stream_drains_and_is_legal():
    rng = random.Random(1234)
    mc, stats, log = make_mc()
    accepted_w = accepted_r = 0
    now = 0
    for i in range(600):
        now += rng.randrange(0, 60)
        if rng.random() < 0.55:
            sc = rng.randrange(2)
            bank = rng.randrange(32)
            ok = mc.enqueue_write(
                rng.randrange(1 << 28) << 6, sc, bank // BPG, bank, rng.randrange(64), now
            )
            accepted_w += 1 if ok else 0
        else:
            sc = rng.randrange(2)
            bank = rng.randrange(32)
            r = mc.enqueue_read(
                (1 << 40) + (i << 6), sc, bank // BPG, bank, rng.randrange(64), now, i
            )
            accepted_r += 1 if r == "accept" else 0
        if rng.random() < 0.3:
            mc.schedule(now)
    mc.final_drain()
    drain(mc)
    assert not mc.busy()
    assert stats.wr_commands == accepted_w - stats.coalesced_writes
    assert stats.rd_commands == accepted_r
    errs = check_command_stream(log, TP)
    assert not errs, errs[:5]
    times = {}
    for t, c, sc, *_ in log:
        assert times.get(sc, -1) < t
        times[sc] = t
