"""Per-channel memory controller: request queues, drain modes, scheduling.

Each channel owns one read queue (RQ) shared by its sub-channels and one
write queue (WRQ) per sub-channel. A sub-channel serves reads until its WRQ
fills to the high watermark (or the RQ runs empty, if opportunistic drains
are on), then switches to write mode and drains to the low watermark. Each
write-mode visit is a drain episode; episodes record writes issued, distinct
banks touched, and the write-to-write issue gaps.

Scheduling picks, per sub-channel, the command that can issue earliest:
for every bank with queued requests either the data command (row already
open) or the next preparation step (PRE on a row conflict, ACT on a closed
bank) toward the bank's oldest request. Data commands win ties, then age.
One command per sub-channel per cycle.

Page policy is adaptive open: after a data command the row stays open only
if another queued request targets the same bank and row; otherwise the bank
is flagged for a precharge that issues when recovery timing allows.
"""

from dataclasses import dataclass

from .errors import ConfigError
from .geometry import DramGeometry
from .stats import RunStats, TRIGGER_FINAL, TRIGGER_HIGH, TRIGGER_IDLE
from .timing import (
    ACT,
    NEG,
    PRE,
    RD,
    WR,
    DIR_READ,
    DIR_WRITE,
    BankState,
    SubchannelBusState,
    TimingParams,
    commit_ideal_write,
    earliest_ideal_write,
    earliest_issue,
)

INF = 1 << 60

MODE_READ = 0
MODE_WRITE = 1

# Entry tuple indices: (addr, bankgroup, bank, row, arrival[, req_id])
E_ADDR, E_BG, E_BANK, E_ROW, E_ARR, E_REQ = range(6)


@dataclass
class ControllerConfig:
    rq_capacity: int = 64  # per channel
    wrq_capacity: int = 48  # per sub-channel
    low_watermark: int = 8
    high_watermark: int = 40
    opportunistic_drain: bool = True
    ideal_write: bool = False
    page_policy: str = "adaptive_open"

    def __post_init__(self):
        if self.page_policy != "adaptive_open":
            raise ConfigError(f"mc.page_policy unknown: {self.page_policy!r}")
        if self.rq_capacity < 1:
            raise ConfigError("mc.rq_capacity must be >= 1")
        if not 0 < self.low_watermark < self.high_watermark <= self.wrq_capacity:
            raise ConfigError(
                "mc watermarks must satisfy 0 < low < high <= wrq_capacity "
                f"(got {self.low_watermark}/{self.high_watermark}/{self.wrq_capacity})"
            )

    def with_wrq_capacity(self, size: int) -> "ControllerConfig":
        """Resize the WRQ, scaling watermarks at the default 1/6 and 5/6."""
        return ControllerConfig(
            rq_capacity=self.rq_capacity,
            wrq_capacity=size,
            low_watermark=max(1, size // 6),
            high_watermark=max(2, (5 * size) // 6),
            opportunistic_drain=self.opportunistic_drain,
            ideal_write=self.ideal_write,
            page_policy=self.page_policy,
        )


class MemoryController:
    def __init__(
        self,
        channel: int,
        cfg: ControllerConfig,
        tp: TimingParams,
        geom: DramGeometry,
        stats: RunStats,
        log: list | None = None,
        checked: bool = False,
    ):
        self.channel = channel
        self.cfg = cfg
        self.tp = tp
        self.stats = stats
        self.log = log  # appended (cycle, cmd, sc, bank, row) when not None
        self.checked = checked
        nsc = geom.subchannels_per_channel
        self.nsc = nsc
        nb = geom.banks_per_subchannel
        self.nbanks = nb
        self.bpg = geom.banks_per_bankgroup
        self.bus = [SubchannelBusState(geom.bankgroups_per_subchannel) for _ in range(nsc)]
        self.banks = [[BankState() for _ in range(nb)] for _ in range(nsc)]
        self.wrq_by_bank: list[dict] = [{} for _ in range(nsc)]
        self.wrq_addrs: list[dict] = [{} for _ in range(nsc)]
        self.wrq_count = [0] * nsc
        self.rq_by_bank: list[dict] = [{} for _ in range(nsc)]
        self.rq_count = 0
        self.mode = [MODE_READ] * nsc
        # Active episode per sub-channel: [start, writes, banks, last_wr, trigger]
        self.episode: list = [None] * nsc
        self.pending_pre: list[dict] = [{} for _ in range(nsc)]  # bank -> ready cycle
        self.last_cmd = [NEG] * nsc
        self.mode_since = [0] * nsc  # mode decisions cannot act retroactively
        self.clock = 0
        self._bank2bg = [b // self.bpg for b in range(nb)]
        # Oldest open-row entry per bank, kept current so candidate scans
        # need no queue walks.
        self._wr_hit: list[dict] = [{} for _ in range(nsc)]
        self._rd_hit: list[dict] = [{} for _ in range(nsc)]
        # Mode-bound views for the slot builder: (queue dict, hit dict,
        # data command). Swapped on every mode change so the per-bank
        # path never re-tests the mode.
        self._cur: list = [None] * nsc
        for sc in range(nsc):
            self._bind_mode(sc)
        # One candidate slot per bank with pending work, holding only the
        # bank-local part of the issue time; shared floors (data bus, tCCD,
        # last-command cycle) are applied during the selection scan, so a
        # slot changes only when its own bank's queue or state does. The
        # scanned best per sub-channel is cached until something there moves.
        # _incremental=False ignores the slots and rescans the queues for
        # every pick (the reference path used by equivalence tests).
        self._slot: list[dict] = [{} for _ in range(nsc)]
        self._best = [None] * nsc  # cached (time, slot) per sub-channel
        # Floors belonging to the cached best, so enqueue-time guards can
        # price a new candidate exactly; None when the pick bypassed slots.
        self._bestfloor = [None] * nsc
        self._slots_stale = [True] * nsc
        self._trans_dirty = True
        self._incremental = True
        # Commit-path constants, folded once.
        self._wr_pre_gap = tp.cwl + tp.twr
        self._data_end_wr = tp.cwl + tp.burst
        self._data_end_rd = tp.cl + tp.burst

    # -- queue interface -------------------------------------------------

    def enqueue_write(self, addr, sc, bg, bank, row, now) -> bool:
        if addr in self.wrq_addrs[sc]:
            self.stats.coalesced_writes += 1
            return True
        if self.wrq_count[sc] >= self.cfg.wrq_capacity:
            return False
        e = (addr, bg, bank, row, now)
        self.wrq_addrs[sc][addr] = e
        q = self.wrq_by_bank[sc].get(bank)
        if q is None:
            self.wrq_by_bank[sc][bank] = [e]
        else:
            q.append(e)
        self.wrq_count[sc] += 1
        if now > self.clock:
            self.clock = now
        popped_pp = False
        if self.banks[sc][bank].open_row == row:
            hc = self._wr_hit[sc]
            if hc.get(bank) is None:
                hc[bank] = e
            # open-row work cancels the close
            popped_pp = self.pending_pre[sc].pop(bank, None) is not None
        self._trans_dirty = True
        if self.mode[sc] == MODE_WRITE or popped_pp:
            self._touch_enqueue(sc, bank)
        return True

    def enqueue_read(self, addr, sc, bg, bank, row, now, req_id) -> str:
        if addr in self.wrq_addrs[sc]:
            self.stats.forwards += 1
            return "forward"
        if self.rq_count >= self.cfg.rq_capacity:
            return "backpressure"
        e = (addr, bg, bank, row, now, req_id)
        q = self.rq_by_bank[sc].get(bank)
        if q is None:
            self.rq_by_bank[sc][bank] = [e]
        else:
            q.append(e)
        self.rq_count += 1
        if now > self.clock:
            self.clock = now
        popped_pp = False
        if self.banks[sc][bank].open_row == row:
            hc = self._rd_hit[sc]
            if hc.get(bank) is None:
                hc[bank] = e
            popped_pp = self.pending_pre[sc].pop(bank, None) is not None
        self._trans_dirty = True
        if self.mode[sc] == MODE_READ or popped_pp:
            self._touch_enqueue(sc, bank)
        return "accept"

    def busy(self) -> bool:
        return self.rq_count > 0 or any(self.wrq_count)

    def final_drain(self):
        """Force write mode on sub-channels with leftover writes."""
        for sc in range(self.nsc):
            if self.mode[sc] == MODE_READ and self.wrq_count[sc] > 0:
                self._enter_write(sc, TRIGGER_FINAL)

    # -- mode transitions ------------------------------------------------

    def _bind_mode(self, sc):
        if self.mode[sc] == MODE_WRITE:
            self._cur[sc] = (self.wrq_by_bank[sc], self._wr_hit[sc], WR)
        else:
            self._cur[sc] = (self.rq_by_bank[sc], self._rd_hit[sc], RD)

    def _enter_write(self, sc, trigger):
        self.mode[sc] = MODE_WRITE
        self.mode_since[sc] = self.clock + 1
        self.episode[sc] = [self.clock + 1, 0, set(), NEG, trigger]
        self._slots_stale[sc] = True
        self._best[sc] = None
        self._bind_mode(sc)

    def _exit_write(self, sc):
        ep = self.episode[sc]
        end = self.last_cmd[sc] if self.last_cmd[sc] > ep[0] else ep[0]
        self.stats.record_episode(self.channel, sc, ep[0], end, ep[1], len(ep[2]), ep[4])
        self.episode[sc] = None
        self.mode[sc] = MODE_READ
        self.mode_since[sc] = self.clock + 1
        self._slots_stale[sc] = True
        self._best[sc] = None
        self._bind_mode(sc)

    def _check_transitions(self):
        cfg = self.cfg
        for sc in range(self.nsc):
            occ = self.wrq_count[sc]
            if self.mode[sc] == MODE_WRITE:
                # Keep draining past the low watermark while no reads wait.
                if occ == 0 or (occ <= cfg.low_watermark and self.rq_count > 0):
                    self._exit_write(sc)
            else:
                if occ >= cfg.high_watermark:
                    self._enter_write(sc, TRIGGER_HIGH)
                elif cfg.opportunistic_drain and occ > 0 and self.rq_count == 0:
                    self._enter_write(sc, TRIGGER_IDLE)

    # -- reference candidate scans (used when _incremental is off) -------

    def _pending_pre_cands(self, sc, by_bank, now0, best):
        pp = self.pending_pre[sc]
        if not pp:
            return best
        banks = self.banks[sc]
        stale = None
        for bank, ready in pp.items():
            if bank in by_bank:
                continue  # conflict path covers this bank
            b = banks[bank]
            if b.open_row < 0:
                stale = bank if stale is None else stale
                continue
            t = b.pre_ok_at
            if ready > t:
                t = ready
            if now0 > t:
                t = now0
            c = (t, 2, ready, PRE, bank, 0, 0, None)
            if best is None or c < best:
                best = c
        if stale is not None:
            del pp[stale]
        return best

    def _write_candidate(self, sc):
        by_bank = self.wrq_by_bank[sc]
        now0 = self.last_cmd[sc] + 1
        if self.mode_since[sc] > now0:
            now0 = self.mode_since[sc]
        best = None
        if by_bank:
            tp = self.tp
            bus = self.bus[sc]
            banks = self.banks[sc]
            if self.cfg.ideal_write:
                e = min((q[0] for q in by_bank.values()), key=lambda e: e[E_ARR])
                t = earliest_ideal_write(now0, bus, tp)
                v = e[E_ARR] + 1
                if v > t:
                    t = v
                return (t, 0, e[E_ARR], WR, e[E_BANK], e[E_BG], e[E_ROW], e)
            floor = bus.bus_free_at
            if bus.direction == DIR_READ:
                floor += tp.turnaround_rd_to_wr
            floor -= tp.cwl
            v = bus.last_wr_issue + tp.tccd_s_wr
            if v > floor:
                floor = v
            if now0 > floor:
                floor = now0
            bg_last = bus.last_wr_issue_bg
            tccd_l = tp.tccd_l_wr
            hits = self._wr_hit[sc]
            b2g = self._bank2bg
            for bank, q in by_bank.items():
                b = banks[bank]
                if b.open_row >= 0:
                    h = hits.get(bank)
                    if h is not None:
                        bg = b2g[bank]
                        t = floor
                        v = b.rd_wr_ok_at
                        if v > t:
                            t = v
                        v = bg_last[bg] + tccd_l
                        if v > t:
                            t = v
                        arr = h[E_ARR]
                        if arr >= t:
                            t = arr + 1
                        c = (t, 0, arr, WR, bank, bg, b.open_row, h)
                    else:
                        e = q[0]
                        t = b.pre_ok_at
                        if now0 > t:
                            t = now0
                        arr = e[E_ARR]
                        if arr >= t:
                            t = arr + 1
                        c = (t, 1, arr, PRE, bank, b2g[bank], 0, None)
                else:
                    e = q[0]
                    t = b.act_ok_at
                    if now0 > t:
                        t = now0
                    arr = e[E_ARR]
                    if arr >= t:
                        t = arr + 1
                    c = (t, 1, arr, ACT, bank, b2g[bank], e[E_ROW], None)
                if best is None or c < best:
                    best = c
        return self._pending_pre_cands(sc, by_bank, now0, best)

    def _read_candidate(self, sc):
        by_bank = self.rq_by_bank[sc]
        now0 = self.last_cmd[sc] + 1
        if self.mode_since[sc] > now0:
            now0 = self.mode_since[sc]
        best = None
        if by_bank:
            tp = self.tp
            bus = self.bus[sc]
            banks = self.banks[sc]
            floor = bus.bus_free_at
            if bus.direction == DIR_WRITE:
                floor += tp.turnaround_wr_to_rd
            floor -= tp.cl
            v = bus.last_rd_issue + tp.tccd_s_rd
            if v > floor:
                floor = v
            if now0 > floor:
                floor = now0
            bg_last = bus.last_rd_issue_bg
            tccd_l = tp.tccd_l_rd
            hits = self._rd_hit[sc]
            b2g = self._bank2bg
            for bank, q in by_bank.items():
                b = banks[bank]
                if b.open_row >= 0:
                    h = hits.get(bank)
                    if h is not None:
                        bg = b2g[bank]
                        t = floor
                        v = b.rd_wr_ok_at
                        if v > t:
                            t = v
                        v = bg_last[bg] + tccd_l
                        if v > t:
                            t = v
                        arr = h[E_ARR]
                        if arr >= t:
                            t = arr + 1
                        c = (t, 0, arr, RD, bank, bg, b.open_row, h)
                    else:
                        e = q[0]
                        t = b.pre_ok_at
                        if now0 > t:
                            t = now0
                        arr = e[E_ARR]
                        if arr >= t:
                            t = arr + 1
                        c = (t, 1, arr, PRE, bank, b2g[bank], 0, None)
                else:
                    e = q[0]
                    t = b.act_ok_at
                    if now0 > t:
                        t = now0
                    arr = e[E_ARR]
                    if arr >= t:
                        t = arr + 1
                    c = (t, 1, arr, ACT, bank, b2g[bank], e[E_ROW], None)
                if best is None or c < best:
                    best = c
        return self._pending_pre_cands(sc, by_bank, now0, best)

    # -- incremental candidate slots -------------------------------------

    def _bank_slot(self, sc, bank):
        """Current-mode candidate for one bank, floors left to the scan.

        Slot layout matches the reference tuples after the time field:
        (T, prio, age, cmd, bank, bg, row, entry). T carries only the
        bank-local readiness (state machine, oldest arrival); the scan adds
        the shared data-bus, bankgroup, and last-command floors.
        """
        qd, hits, data_cmd = self._cur[sc]
        q = qd.get(bank)
        b = self.banks[sc][bank]
        if q:
            if b.open_row >= 0:
                h = hits.get(bank)
                if h is not None:
                    arr = h[E_ARR]
                    t = b.rd_wr_ok_at
                    if arr >= t:
                        t = arr + 1
                    return (t, 0, arr, data_cmd, bank, self._bank2bg[bank], b.open_row, h)
                e = q[0]
                arr = e[E_ARR]
                t = b.pre_ok_at
                if arr >= t:
                    t = arr + 1
                return (t, 1, arr, PRE, bank, self._bank2bg[bank], 0, None)
            e = q[0]
            arr = e[E_ARR]
            t = b.act_ok_at
            if arr >= t:
                t = arr + 1
            return (t, 1, arr, ACT, bank, self._bank2bg[bank], e[E_ROW], None)
        ready = self.pending_pre[sc].get(bank)
        if ready is None:
            return None
        if b.open_row < 0:
            del self.pending_pre[sc][bank]  # already closed: drop the stale flag
            return None
        t = b.pre_ok_at
        if ready > t:
            t = ready
        return (t, 2, ready, PRE, bank, 0, 0, None)

    def _touch(self, sc, bank):
        """Refresh one bank's slot after its queue or state changed."""
        if self._incremental and not self._slots_stale[sc]:
            c = self._bank_slot(sc, bank)
            if c is None:
                self._slot[sc].pop(bank, None)
            else:
                self._slot[sc][bank] = c
        self._best[sc] = None

    def _touch_enqueue(self, sc, bank):
        """Like _touch, but keep the cached best when it provably still wins.

        An enqueue only adds or changes this one bank's candidate, and the
        shared floors cannot move between the scan that produced the cached
        best and now (only commits move them, and commits drop the cache).
        Pricing the refreshed candidate with the floors stored by that scan
        therefore reproduces its exact scan-time key, and the cache survives
        whenever that key loses to the cached pick.
        """
        if not self._incremental or self._slots_stale[sc]:
            self._best[sc] = None
            return
        c = self._bank_slot(sc, bank)
        if c is None:
            self._slot[sc].pop(bank, None)
            self._best[sc] = None
            return
        self._slot[sc][bank] = c
        b = self._best[sc]
        if b is None:
            return
        bc = b[1]
        fl = self._bestfloor[sc]
        if bc is None or fl is None:
            # Cached "nothing pending", or a pick made outside the slot
            # scan: the new entry can change either, so force a rescan.
            self._best[sc] = None
            return
        if bc[4] == bank:
            # The enqueue may have replaced the very candidate we cached.
            if c != bc:
                self._best[sc] = None
            return
        t = c[0]
        if c[1] == 0:
            bus = self.bus[sc]
            if self.mode[sc] == MODE_WRITE:
                v = bus.last_wr_issue_bg[c[5]] + self.tp.tccd_l_wr
            else:
                v = bus.last_rd_issue_bg[c[5]] + self.tp.tccd_l_rd
            if v > t:
                t = v
            if fl[0] > t:
                t = fl[0]
        elif fl[1] > t:
            t = fl[1]
        bt = b[0]
        if t > bt:
            return
        if t == bt:
            # Same cycle: the newcomer wins only if strictly smaller by
            # the scan's (priority, age, tuple) order.
            p = c[1]
            bp = bc[1]
            if p > bp:
                return
            if p == bp:
                a = c[2]
                ba = bc[2]
                if a > ba or (a == ba and not c[1:] < bc[1:]):
                    return
        self._best[sc] = None

    def _rebuild_slots(self, sc):
        slot = self._slot[sc]
        slot.clear()
        bank_slot = self._bank_slot
        for bank in range(self.nbanks):
            c = bank_slot(sc, bank)
            if c is not None:
                slot[bank] = c
        self._slots_stale[sc] = False

    def _scan_best(self, sc):
        """(issue time, slot) of the earliest candidate, or (INF, None)."""
        if self._slots_stale[sc]:
            self._rebuild_slots(sc)
        mode_w = self.mode[sc] == MODE_WRITE
        if mode_w and self.cfg.ideal_write:
            self._bestfloor[sc] = None
            c = self._write_candidate(sc)
            return (c[0], c) if c is not None else (INF, None)
        tp = self.tp
        bus = self.bus[sc]
        now0 = self.last_cmd[sc] + 1
        ms = self.mode_since[sc]
        if ms > now0:
            now0 = ms
        if mode_w:
            floor = bus.bus_free_at
            if bus.direction == DIR_READ:
                floor += tp.turnaround_rd_to_wr
            floor -= tp.cwl
            v = bus.last_wr_issue + tp.tccd_s_wr
            bg_last = bus.last_wr_issue_bg
            tccd_l = tp.tccd_l_wr
        else:
            floor = bus.bus_free_at
            if bus.direction == DIR_WRITE:
                floor += tp.turnaround_wr_to_rd
            floor -= tp.cl
            v = bus.last_rd_issue + tp.tccd_s_rd
            bg_last = bus.last_rd_issue_bg
            tccd_l = tp.tccd_l_rd
        if v > floor:
            floor = v
        if now0 > floor:
            floor = now0
        self._bestfloor[sc] = (floor, now0)
        best_t = INF
        best_c = None
        bp = ba = 0
        for c in self._slot[sc].values():
            t = c[0]
            if c[1] == 0:
                v = bg_last[c[5]] + tccd_l
                if v > t:
                    t = v
                if floor > t:
                    t = floor
            elif now0 > t:
                t = now0
            if t > best_t:
                continue
            if t < best_t:
                best_t = t
                best_c = c
                bp = c[1]
                ba = c[2]
            else:
                # Same cycle: lower priority class, then age, then the full
                # tuple, mirroring the reference scan's ordering.
                p = c[1]
                if p > bp:
                    continue
                a = c[2]
                if p < bp or a < ba or (a == ba and c[1:] < best_c[1:]):
                    best_c = c
                    bp = p
                    ba = a
        return best_t, best_c

    # -- scheduling ------------------------------------------------------

    def schedule(self, limit, wr_slot_sc=-1, rq_slot=False):
        """Commit every command due by `limit`; return (next_time, completions).

        completions holds (req_id, data_ready_cycle) for reads issued here.
        When the frontend is stalled on a full queue it passes wr_slot_sc
        (waiting for WRQ space on that sub-channel) or rq_slot (RQ space);
        scheduling then stops right after a freeing commit so the retry does
        not land in the controller's past.
        """
        completions = []
        if self._trans_dirty:
            self._trans_dirty = False
            self._check_transitions()
        inc = self._incremental
        nsc = self.nsc
        best_l = self._best
        while True:
            best_t = INF
            best_c = None
            best_sc = -1
            for sc in range(nsc):
                if inc:
                    b = best_l[sc]
                    if b is None:
                        b = self._scan_best(sc)
                        best_l[sc] = b
                    t = b[0]
                    if t < best_t:  # sc 0 wins ties; (INF, None) never does
                        best_t = t
                        best_c = b[1]
                        best_sc = sc
                else:
                    if self.mode[sc] == MODE_WRITE:
                        c = self._write_candidate(sc)
                    else:
                        c = self._read_candidate(sc)
                    if c is not None and c[0] < best_t:
                        best_t = c[0]
                        best_c = c
                        best_sc = sc
            if best_c is None:
                return INF, completions
            if best_t > limit:
                return best_t, completions
            cmd = best_c[3]
            self._commit(best_sc, best_t, best_c, completions)
            if cmd >= RD and (
                (cmd == WR and best_sc == wr_slot_sc) or (cmd == RD and rq_slot)
            ):
                return best_t + 1, completions

    def _commit(self, sc, t, cand, completions):
        # Bus and bank state updates are unrolled here per command; the
        # timing module keeps the reference forms used by checked mode and
        # the legality fuzz, which hold this path to the same behavior.
        cmd, bank, bg, row, entry = cand[3], cand[4], cand[5], cand[6], cand[7]
        tp = self.tp
        bus = self.bus[sc]
        bstate = self.banks[sc][bank]
        stats = self.stats
        ideal_wr = False
        if cmd == WR:
            ideal_wr = self.cfg.ideal_write
            if self.checked and not ideal_wr:
                want = earliest_issue(cmd, bg, t, bstate, bus, tp)
                if want != t or t <= self.last_cmd[sc]:
                    raise AssertionError(
                        f"scheduler committed {cmd} at {t}, legal time {want}"
                    )
            if ideal_wr:
                commit_ideal_write(t, bus, tp)
            else:
                bus.last_wr_issue = t
                bgl = bus.last_wr_issue_bg
                if t > bgl[bg]:
                    bgl[bg] = t
                rec = t + self._wr_pre_gap  # write recovery gates the next PRE
                if rec > bstate.pre_ok_at:
                    bstate.pre_ok_at = rec
                end = t + self._data_end_wr
                bstate.last_write_burst_end = end
                bus.bus_free_at = end
                bus.direction = DIR_WRITE
            self.last_cmd[sc] = t
            if t > self.clock:
                self.clock = t
            if self.log is not None:
                self.log.append((t, cmd, sc, bank, row))
            q = self.wrq_by_bank[sc][bank]
            q.remove(entry)
            if not q:
                del self.wrq_by_bank[sc][bank]
            del self.wrq_addrs[sc][entry[E_ADDR]]
            self.wrq_count[sc] -= 1
            stats.wr_commands += 1
            ep = self.episode[sc]
            ep[1] += 1
            ep[2].add(bank)
            if ep[3] != NEG:
                stats.record_w2w(t - ep[3])
            ep[3] = t
            hc = self._wr_hit[sc]
            if hc.get(bank) is entry:
                self._next_hit(hc, bank, q, row)
            if not ideal_wr:
                self._page_policy_after(sc, bank, row)
            # A write commit can only move this sub-channel's exit
            # condition: its WRQ occupancy fell, everything else is
            # untouched. Enqueues cover the rest via _trans_dirty.
            occ = self.wrq_count[sc]
            if occ == 0 or (occ <= self.cfg.low_watermark and self.rq_count > 0):
                self._exit_write(sc)
        else:
            if self.checked:
                want = earliest_issue(cmd, bg, t, bstate, bus, tp)
                if want != t or t <= self.last_cmd[sc]:
                    raise AssertionError(
                        f"scheduler committed {cmd} at {t}, legal time {want}"
                    )
            self.last_cmd[sc] = t
            if t > self.clock:
                self.clock = t
            if self.log is not None:
                self.log.append((t, cmd, sc, bank, row))
            if cmd == RD:
                bus.last_rd_issue = t
                bgl = bus.last_rd_issue_bg
                if t > bgl[bg]:
                    bgl[bg] = t
                ready = t + self._data_end_rd
                bus.bus_free_at = ready
                bus.direction = DIR_READ
                q = self.rq_by_bank[sc][bank]
                q.remove(entry)
                if not q:
                    del self.rq_by_bank[sc][bank]
                self.rq_count -= 1
                stats.rd_commands += 1
                completions.append((entry[E_REQ], ready))
                hc = self._rd_hit[sc]
                if hc.get(bank) is entry:
                    self._next_hit(hc, bank, q, row)
                self._page_policy_after(sc, bank, row)
                # A read commit changes mode conditions only by emptying
                # the shared RQ, which can start opportunistic drains.
                if self.rq_count == 0:
                    self._check_transitions()
            elif cmd == ACT:
                bstate.open_row = row
                bstate.act_at = t
                bstate.rd_wr_ok_at = t + tp.trcd
                ras = t + tp.tras
                if ras > bstate.pre_ok_at:
                    bstate.pre_ok_at = ras
                stats.act_commands += 1
                self._next_hit(self._wr_hit[sc], bank, self.wrq_by_bank[sc].get(bank), row)
                self._next_hit(self._rd_hit[sc], bank, self.rq_by_bank[sc].get(bank), row)
            else:
                bstate.open_row = -1
                bstate.act_ok_at = t + tp.trp
                stats.pre_commands += 1
                self.pending_pre[sc].pop(bank, None)
                self._wr_hit[sc].pop(bank, None)
                self._rd_hit[sc].pop(bank, None)
        if self._incremental and not self._slots_stale[sc]:
            c = self._bank_slot(sc, bank)
            if c is None:
                self._slot[sc].pop(bank, None)
            else:
                self._slot[sc][bank] = c
        self._best[sc] = None

    @staticmethod
    def _next_hit(hc, bank, q, row):
        if q:
            for e in q:
                if e[E_ROW] == row:
                    hc[bank] = e
                    return
        hc.pop(bank, None)

    def _page_policy_after(self, sc, bank, row):
        q = self.wrq_by_bank[sc].get(bank)
        if q:
            for e in q:
                if e[E_ROW] == row:
                    return
        q = self.rq_by_bank[sc].get(bank)
        if q:
            for e in q:
                if e[E_ROW] == row:
                    return
        self.pending_pre[sc][bank] = self.last_cmd[sc] + 1

    def page_decision(self, sc, bank, row) -> str:
        """Adaptive-open outcome if a data command to (bank, row) finished now."""
        q = self.wrq_by_bank[sc].get(bank, ())
        if any(e[E_ROW] == row for e in q):
            return "keep_open"
        q = self.rq_by_bank[sc].get(bank, ())
        if any(e[E_ROW] == row for e in q):
            return "keep_open"
        return "precharge"
