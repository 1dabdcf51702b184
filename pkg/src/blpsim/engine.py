"""Simulation engine: trace frontend, LLC, and memory controllers on one clock.

The frontend issues at most one access per cycle. Hits complete in place;
read misses take an MSHR slot and a read-queue slot and finish when DRAM
returns the line; write misses install the line dirty with no fetch, so the
only write traffic DRAM ever sees is LLC writebacks. The frontend stalls,
conservatively and in order, when any resource it might need is full:
read-queue space, MSHR space, the per-stream outstanding-read budget, or a
WRQ slot for a victim writeback (the cache leaves state untouched on a
blocked eviction and the access retries).

Event order within one cycle: controllers commit commands due at that cycle,
read completions release their slots, then the frontend issues. A request
enqueued at cycle T is schedulable from T+1.
"""

import gc
import heapq

import numpy as np

from .cache import BLOCKED, HIT, LlcCache
from .config import RunConfig, config_hash, config_items
from .controller import INF, MemoryController
from .errors import SimulationContractError
from .geometry import AddressDecoder, default_mapping
from .policies import BlpTracker
from .stats import RunStats, StatsReport
from .workload import READ, make_generator

_BARD = ("bard-e", "bard-c", "bard-h")


class Engine:
    def __init__(self, rc: RunConfig):
        self.rc = rc
        geom = rc.geometry
        self.geom = geom
        tp = rc.effective_timing()
        self.decoder = AddressDecoder(geom, default_mapping(geom, pbpl=rc.pbpl))
        self.stats = RunStats(keep_episodes=rc.keep_episodes)
        self.log = [] if rc.log_commands else None
        self.mcs = [
            MemoryController(ch, rc.mc, tp, geom, self.stats, self.log, rc.checked)
            for ch in range(geom.channels)
        ]
        self.tracker = BlpTracker(
            channels=geom.channels,
            subchannels=geom.subchannels_per_channel,
            banks_per_subchannel=geom.banks_per_subchannel,
            whole_reset=rc.tracker_whole_reset,
            disabled=rc.tracker_disabled,
        )
        self._mark_banks = rc.cache.write_policy in _BARD
        self.cache = LlcCache(rc.cache, self.tracker, self._writeback_sink)
        self._bpg = geom.banks_per_bankgroup
        self.now = 0
        self._blocked_sc = None  # (channel, subchannel) of the last refused writeback
        self._wb_channels = []  # channels that accepted a writeback this access

    # Writebacks land in the owning sub-channel's WRQ; on acceptance the
    # bank's tracker bit is set (bank-aware policies only). The victim's
    # coordinates are recovered from its global bank id rather than by
    # re-decoding the address.
    def _writeback_sink(self, addr, gbank, row) -> bool:
        geom = self.geom
        ch, flat = divmod(gbank, geom.banks_per_channel)
        sc, bank = divmod(flat, geom.banks_per_subchannel)
        ok = self.mcs[ch].enqueue_write(addr, sc, bank // self._bpg, bank, row, self.now)
        if ok:
            self._wb_channels.append(ch)
            if self._mark_banks:
                self.tracker.mark(ch, flat)
        else:
            self._blocked_sc = (ch, sc)
        return ok

    def run(self) -> StatsReport:
        # Hot-path allocations are all acyclic (tuples, small lists), so
        # reference counting reclaims them; the cycle collector only adds
        # pauses here. Restored on exit.
        gc_was = gc.isenabled()
        gc.disable()
        try:
            return self._run()
        finally:
            if gc_was:
                gc.enable()

    def _run(self) -> StatsReport:
        rc = self.rc
        stats = self.stats
        cache = self.cache
        decoder = self.decoder
        mcs = self.mcs
        nch = len(mcs)
        mshr_cap = rc.cache.mshr
        budget = rc.stream_budget
        rq_cap = rc.mc.rq_capacity
        geom = self.geom
        bpg = self._bpg
        banks_sc = geom.banks_per_subchannel
        banks_ch = geom.banks_per_channel

        def predecode(addrs):
            """Chunk-wide address decode into plain lists."""
            a = np.asarray(addrs, dtype=np.int64) & ~0x3F
            f = decoder.decode_arrays(a)
            bank = f["bankgroup"] * bpg + f["bank"]
            gbank = f["channel"] * banks_ch + f["subchannel"] * banks_sc + bank
            return (
                a.tolist(),
                f["channel"].tolist(),
                f["subchannel"].tolist(),
                f["bankgroup"].tolist(),
                bank.tolist(),
                f["row"].tolist(),
                gbank.tolist(),
            )

        chunks = make_generator(rc.workload).chunks()
        kinds = streams = ()
        addr_l = ch_l = sc_l = bg_l = bank_l = row_l = gb_l = ()
        ci = 0
        clen = 0
        exhausted = False

        heap = []  # (ready_cycle, seq, stream)
        seq = 0
        mshr = 0
        per_stream = {}
        psget = per_stream.get
        wake = [0] * nch
        stall = None  # None | ("rq", ch) | ("wr", ch, sc) | ("mshr",) | ("budget", sid)
        wb_channels = self._wb_channels
        now = 0
        reads = writes = 0
        single = nch == 1
        mc0 = mcs[0]
        cache_access = cache.access
        heappush = heapq.heappush
        heappop = heapq.heappop

        while True:
            if single:
                next_ev = wake[0]
                if heap and heap[0][0] < next_ev:
                    next_ev = heap[0][0]
            else:
                next_ev = heap[0][0] if heap else INF
                for ch in range(nch):
                    if wake[ch] < next_ev:
                        next_ev = wake[ch]

            if stall is None and not exhausted and now < next_ev:
                # Frontend slots: issue accesses back to back until either
                # the next event time arrives, the chunk runs dry, a stall
                # hits, or an enqueue schedules controller work (which can
                # move the next event, so fall out and recompute it).
                while True:
                    if ci >= clen:
                        nxt = next(chunks, None)
                        if nxt is None:
                            exhausted = True
                            break
                        kinds, addrs, streams = nxt
                        addr_l, ch_l, sc_l, bg_l, bank_l, row_l, gb_l = predecode(addrs)
                        ci = 0
                        clen = len(kinds)
                    addr = addr_l[ci]
                    sid = streams[ci]
                    self.now = now
                    woke = False
                    if kinds[ci] == READ:
                        # Conservative pre-check: a miss needs all three.
                        if mshr >= mshr_cap:
                            stall = ("mshr",)
                            break
                        if psget(sid, 0) >= budget:
                            stall = ("budget", sid)
                            break
                        ch = ch_l[ci]
                        mc = mc0 if single else mcs[ch]
                        if mc.rq_count >= rq_cap:
                            stall = ("rq", ch)
                            break
                        res = cache_access(addr, False, sid, gb_l[ci], row_l[ci])
                        if res == BLOCKED:
                            stall = ("wr",) + self._blocked_sc
                            break
                        reads += 1
                        if res != HIT:
                            r = mc.enqueue_read(
                                addr, sc_l[ci], bg_l[ci], bank_l[ci], row_l[ci], now, sid
                            )
                            if r == "accept":
                                mshr += 1
                                per_stream[sid] = psget(sid, 0) + 1
                                if now + 1 < wake[ch]:
                                    wake[ch] = now + 1
                                woke = True  # controller has work next cycle
                            elif r == "backpressure":
                                raise SimulationContractError(
                                    "read accepted past pre-check"
                                )
                            # forwarded reads complete from the WRQ buffer
                    else:
                        res = cache_access(addr, True, sid, gb_l[ci], row_l[ci])
                        if res == BLOCKED:
                            stall = ("wr",) + self._blocked_sc
                            break
                        writes += 1
                    if wb_channels:
                        nw = now + 1
                        for wch in wb_channels:
                            if nw < wake[wch]:
                                wake[wch] = nw
                        wb_channels.clear()
                        ci += 1
                        now = nw
                        break
                    ci += 1
                    now += 1
                    if woke or now >= next_ev:
                        break
                continue

            if next_ev >= INF:
                if heap:
                    raise SimulationContractError("completions pending with no wake")
                if stall is not None:
                    raise SimulationContractError(f"frontend wedged on {stall}")
                if any(mc.busy() for mc in mcs):
                    # Leftover writes with opportunistic drains off: flush.
                    for mc in mcs:
                        mc.final_drain()
                    for ch in range(nch):
                        wake[ch] = now + 1
                    continue
                break  # drained and done

            if next_ev > now:
                if stall is not None:
                    stats.stall_cycles += next_ev - now
                now = next_ev

            # While the frontend cannot act, the controller may run ahead
            # of `now`: to the next read completion when stalled on MSHRs
            # or the stream budget (the frontend might resume that cycle),
            # and freely once the trace is exhausted. On a full WRQ or RQ
            # it runs ahead to the freeing commit, and `now` jumps with it
            # so the stall check still reads state the frontend could see.
            # Run-ahead is single-channel only: with several channels a
            # non-stalled channel's state must not outpace the clock.
            if single:
                if wake[0] <= now:
                    if stall is None:
                        t, comps = mc0.schedule(INF if exhausted else now)
                    else:
                        k = stall[0]
                        if k == "wr":
                            sc = stall[2]
                            if mc0.wrq_count[sc] < mc0.cfg.wrq_capacity:
                                t, comps = mc0.schedule(now)
                            else:
                                t, comps = mc0.schedule(INF, wr_slot_sc=sc)
                                if t < INF and t - 1 > now:
                                    stats.stall_cycles += t - 1 - now
                                    now = t - 1
                        elif k == "rq":
                            if mc0.rq_count < rq_cap:
                                t, comps = mc0.schedule(now)
                            else:
                                t, comps = mc0.schedule(INF, rq_slot=True)
                                if t < INF and t - 1 > now:
                                    stats.stall_cycles += t - 1 - now
                                    now = t - 1
                        else:
                            t, comps = mc0.schedule(heap[0][0] if heap else now)
                    wake[0] = t
                    for sid_done, ready in comps:
                        seq += 1
                        heappush(heap, (ready, seq, sid_done))
            else:
                for ch in range(nch):
                    if wake[ch] <= now:
                        if stall is None:
                            t, comps = mcs[ch].schedule(INF if exhausted else now)
                        else:
                            t, comps = mcs[ch].schedule(now)
                        wake[ch] = t
                        for sid_done, ready in comps:
                            seq += 1
                            heappush(heap, (ready, seq, sid_done))

            while heap and heap[0][0] <= now:
                sid_done = heappop(heap)[2]
                mshr -= 1
                per_stream[sid_done] -= 1

            if stall is not None:
                kind = stall[0]
                if kind == "rq":
                    if mcs[stall[1]].rq_count < rq_cap:
                        stall = None
                elif kind == "wr":
                    ch, sc = stall[1], stall[2]
                    if mcs[ch].wrq_count[sc] < mcs[ch].cfg.wrq_capacity:
                        stall = None
                elif kind == "mshr":
                    if mshr < mshr_cap:
                        stall = None
                elif per_stream.get(stall[1], 0) < budget:
                    stall = None

        self.now = now
        stats.reads += reads
        stats.writes += writes
        end = max([now] + [mc.clock for mc in mcs])
        return self._report(end)

    def _report(self, total_cycles: int) -> StatsReport:
        rc = self.rc
        s = self.stats
        cache = self.cache
        accesses = s.reads + s.writes
        ka = accesses / 1000.0 if accesses else 1.0
        wb_evicted = cache.dirty_evictions
        wb_total = (
            wb_evicted + cache.cleanses + cache.eager_writebacks + cache.vwq_writebacks
        )
        nsc = rc.geometry.channels * rc.geometry.subchannels_per_channel
        denom = total_cycles * nsc
        policy = rc.cache.write_policy
        if rc.mc.ideal_write:
            policy += "+ideal"  # same cache decisions, idealized write timing
        return StatsReport(
            policy=policy,
            repl=rc.cache.repl,
            workload=rc.workload.kind,
            seed=rc.workload.seed,
            config_hash=config_hash(rc),
            total_cycles=total_cycles,
            accesses=accesses,
            reads=s.reads,
            writes=s.writes,
            hits=cache.hits,
            misses=cache.misses,
            read_misses=cache.read_misses,
            write_misses=cache.write_misses,
            forwards=s.forwards,
            writebacks_evicted=wb_evicted,
            writebacks_cleansed=cache.cleanses,
            writebacks_eager=cache.eager_writebacks,
            writebacks_vwq=cache.vwq_writebacks,
            writebacks_total=wb_total,
            dirtying_events=cache.dirtying_events,
            dirty_resident_end=cache.dirty_lines(),
            episodes=s.episode_count,
            wblp_mean=s.wblp_sum / s.episode_count if s.episode_count else 0.0,
            wblp_max=s.wblp_max,
            write_mode_cycles=s.write_mode_cycles,
            write_mode_fraction=s.write_mode_cycles / denom if denom else 0.0,
            w2w_count=s.w2w_count,
            w2w_mean_cycles=s.w2w_sum / s.w2w_count if s.w2w_count else 0.0,
            w2w_max_cycles=s.w2w_max,
            mpka=cache.misses / ka,
            wpka=wb_total / ka,
            overrides=cache.overrides,
            cleanses=cache.cleanses,
            lru_evictions=cache.lru_evictions,
            cleanse_skipped=cache.cleanse_skipped,
            vwq_candidates=cache.vwq_candidates,
            rd_commands=s.rd_commands,
            wr_commands=s.wr_commands,
            act_commands=s.act_commands,
            pre_commands=s.pre_commands,
            coalesced_writes=s.coalesced_writes,
            tracker_marks=self.tracker.marks,
            tracker_queries=self.tracker.queries,
            tracker_resets=self.tracker.resets,
        )


def run_config(rc: RunConfig) -> StatsReport:
    return Engine(rc).run()


def run_items(rc: RunConfig):
    """(StatsReport, config items) ready for CSV emission."""
    return Engine(rc).run(), config_items(rc)
