"""Set-associative writeback LLC with pluggable replacement and write policies.

Replacement: lru, srrip (2-bit re-reference prediction), ship (signature
history counter table steering insertion). Write policies decide what happens
around an eviction:

  baseline  evict the replacement victim, write back if dirty
  bard-e    dirty victim: prefer a dirty line whose DRAM bank bit is clear
  bard-c    clean victim: also write back (cleanse) one dirty line with a
            clear bank bit, keeping it resident
  bard-h    bard-e on dirty victims, bard-c on clean victims
  eager     after any hit or eviction, write back the eviction-priority line
            if dirty (bank-unaware)
  vwq       on a dirty eviction, also write back resident dirty lines that
            share the victim's (bank, row), up to write-queue space

State changes only happen once the victim writeback is accepted; a rejected
writeback (queue full) leaves the cache untouched so the access can retry.
"""

from dataclasses import dataclass

from .errors import ConfigError
from .policies import BlpTracker, bard_c_choose, bard_e_choose

HIT = 0
MISS_FILL = 1
MISS_EVICT = 2
BLOCKED = 3

REPL_KINDS = ("lru", "srrip", "ship")
WRITE_POLICIES = ("baseline", "bard-e", "bard-c", "bard-h", "eager", "vwq")

RRPV_MAX = 3  # 2-bit
RRPV_LONG = 2
SHIP_TABLE_BITS = 14


def ship_signature(line: int, stream_id: int) -> int:
    """14-bit access signature from the line address and stream."""
    return (line ^ (line >> SHIP_TABLE_BITS) ^ (stream_id * 0x9E37)) & (
        (1 << SHIP_TABLE_BITS) - 1
    )


@dataclass
class CacheConfig:
    capacity_bytes: int = 16 * 2**20
    ways: int = 16
    repl: str = "lru"
    write_policy: str = "baseline"
    fill_delay: int = 100  # standalone-mode miss latency; engine uses DRAM time
    mshr: int = 128
    slices: int = 1

    def __post_init__(self):
        if self.repl not in REPL_KINDS:
            raise ConfigError(f"cache.repl must be one of {REPL_KINDS}, got {self.repl!r}")
        if self.write_policy not in WRITE_POLICIES:
            raise ConfigError(
                f"cache.write_policy must be one of {WRITE_POLICIES}, "
                f"got {self.write_policy!r}"
            )
        if self.ways < 1 or self.capacity_bytes % (self.ways * 64):
            raise ConfigError("cache.capacity_bytes must be a multiple of ways*64")
        sets = self.sets
        if sets & (sets - 1):
            raise ConfigError(f"cache set count must be a power of two, got {sets}")
        if self.slices < 1 or sets % self.slices:
            raise ConfigError("cache.slices must divide the set count")
        if self.mshr < 1:
            raise ConfigError("cache.mshr must be >= 1")
        if self.fill_delay < 0:
            raise ConfigError("cache.fill_delay must be >= 0")

    @property
    def sets(self) -> int:
        return self.capacity_bytes // (self.ways * 64)


class LlcCache:
    def __init__(self, cfg: CacheConfig, tracker: BlpTracker, writeback_sink=None):
        self.cfg = cfg
        self.tracker = tracker
        # sink(addr, global_bank, row) -> bool; False means queue full.
        self.sink = writeback_sink or (lambda addr, gbank, row: True)
        sets, ways = cfg.sets, cfg.ways
        self._ways = ways
        self._set_mask = sets - 1
        self._set_bits = sets.bit_length() - 1
        self._wp = cfg.write_policy
        self._repl = cfg.repl
        self._is_lru = cfg.repl == "lru"
        self._is_ship = cfg.repl == "ship"
        # single-channel trackers read their one word directly
        self._tr_word = tracker.bits if tracker.channels == 1 else None

        self.tag2way = [dict() for _ in range(sets)]
        self.way_tag = [[0] * ways for _ in range(sets)]
        self.way_bank = [[0] * ways for _ in range(sets)]
        self.way_row = [[0] * ways for _ in range(sets)]
        self.dirty = [0] * sets
        self.filled = [0] * sets
        self.lru = [[] for _ in range(sets)]  # way order, index 0 = next victim
        if cfg.repl != "lru":
            self.rrpv = [[0] * ways for _ in range(sets)]
        if cfg.repl == "ship":
            self.sig = [[0] * ways for _ in range(sets)]
            self.reused = [0] * sets  # bitmask per set
            self.shct = [1] * (1 << SHIP_TABLE_BITS)  # weakly reused at start
        self._vwq_index: dict[tuple[int, int], set] = {} if cfg.write_policy == "vwq" else None

        self.hits = 0
        self.misses = 0
        self.read_misses = 0
        self.write_misses = 0
        self.fills = 0
        self.clean_evictions = 0
        self.dirty_evictions = 0
        self.dirtying_events = 0
        self.blocked = 0
        self.overrides = 0
        self.cleanses = 0
        self.lru_evictions = 0
        self.cleanse_skipped = 0
        self.eager_writebacks = 0
        self.eager_skipped = 0
        self.vwq_writebacks = 0
        self.vwq_candidates = 0

    # -- helpers ---------------------------------------------------------

    def _addr_of(self, s: int, w: int) -> int:
        return ((self.way_tag[s][w] << self._set_bits) | s) << 6

    def _scan_order(self, s: int):
        """Ways in eviction-priority order (victim first)."""
        if self._repl == "lru":
            return self.lru[s]
        b0 = []
        b1 = []
        b2 = []
        b3 = []
        for w, r in enumerate(self.rrpv[s]):
            if r == RRPV_MAX:
                b3.append(w)
            elif r == 2:
                b2.append(w)
            elif r == 1:
                b1.append(w)
            else:
                b0.append(w)
        return b3 + b2 + b1 + b0

    def _priority_way(self, s: int) -> int:
        if self._repl == "lru":
            return self.lru[s][0]
        rr = self.rrpv[s]
        mx = max(rr)
        return rr.index(mx)

    def _vwq_add(self, s, w):
        self._vwq_index.setdefault(
            (self.way_bank[s][w], self.way_row[s][w]), set()
        ).add((s, w))

    def _vwq_remove(self, s, w):
        key = (self.way_bank[s][w], self.way_row[s][w])
        group = self._vwq_index.get(key)
        if group is not None:
            group.discard((s, w))
            if not group:
                del self._vwq_index[key]

    def _set_dirty(self, s, w):
        b = 1 << w
        if not self.dirty[s] & b:
            self.dirty[s] |= b
            self.dirtying_events += 1
            if self._vwq_index is not None:
                self._vwq_add(s, w)

    def _clear_dirty(self, s, w):
        self.dirty[s] &= ~(1 << w)
        if self._vwq_index is not None:
            self._vwq_remove(s, w)

    def _eager_check(self, s):
        w = self._priority_way(s)
        if not (self.dirty[s] >> w) & 1:
            return
        if self.sink(self._addr_of(s, w), self.way_bank[s][w], self.way_row[s][w]):
            self._clear_dirty(s, w)
            self.eager_writebacks += 1
        else:
            self.eager_skipped += 1

    def _vwq_drain(self, gbank, row):
        group = self._vwq_index.get((gbank, row))
        if not group:
            return
        victims = sorted(group)  # deterministic order
        self.vwq_candidates += len(victims)
        for s, w in victims:
            if not self.sink(self._addr_of(s, w), gbank, row):
                break
            self._clear_dirty(s, w)
            self.vwq_writebacks += 1

    # -- main access path ------------------------------------------------

    def access(self, addr: int, is_write: bool, stream_id: int, gbank: int, row: int) -> int:
        line = addr >> 6
        s = line & self._set_mask
        tag = line >> self._set_bits
        t2w = self.tag2way[s]
        w = t2w.get(tag)
        if w is not None:
            self.hits += 1
            if self._is_lru:
                order = self.lru[s]
                order.remove(w)
                order.append(w)
            else:
                self.rrpv[s][w] = 0
                if self._is_ship and not (self.reused[s] >> w) & 1:
                    self.reused[s] |= 1 << w
                    sg = self.sig[s][w]
                    if self.shct[sg] < 3:
                        self.shct[sg] += 1
            if is_write and not (self.dirty[s] >> w) & 1:
                self.dirty[s] |= 1 << w
                self.dirtying_events += 1
                if self._vwq_index is not None:
                    self._vwq_add(s, w)
            if self._wp == "eager":
                self._eager_check(s)
            return HIT

        if self.filled[s] < self._ways:
            w = self.filled[s]
            self._install(s, w, tag, is_write, stream_id, gbank, row)
            self.filled[s] += 1
            self.misses += 1
            if is_write:
                self.write_misses += 1
            else:
                self.read_misses += 1
            self.fills += 1
            return MISS_FILL

        # Full set: pick victim, possibly overridden or paired with a cleanse.
        dirty_mask = self.dirty[s]
        banks = self.way_bank[s]
        if self._is_lru:
            order = self.lru[s]
            base = order[0]
        else:
            order = None
            base = self._priority_way(s)
        victim = base
        overridden = False
        cleanse_way = None
        wp = self._wp
        if wp == "bard-h":
            wp = "bard-e" if (dirty_mask >> base) & 1 else "bard-c"
        if wp == "bard-e" and (dirty_mask >> base) & 1:
            tr = self.tracker
            tr.queries += 1
            snap = self._tr_word[0] if self._tr_word is not None else tr.combined()
            # Unmarked victim: the choice is already the base way, skip the scan.
            if (snap >> banks[base]) & 1:
                victim, overridden = bard_e_choose(
                    order if order is not None else self._scan_order(s),
                    dirty_mask, banks, snap,
                )
        elif wp == "bard-c" and not (dirty_mask >> base) & 1:
            tr = self.tracker
            tr.queries += 1
            snap = self._tr_word[0] if self._tr_word is not None else tr.combined()
            cleanse_way = bard_c_choose(
                order if order is not None else self._scan_order(s),
                dirty_mask, banks, snap,
            )

        victim_dirty = (dirty_mask >> victim) & 1
        victim_gbank = banks[victim]
        victim_row = self.way_row[s][victim]
        if victim_dirty:
            va = ((self.way_tag[s][victim] << self._set_bits) | s) << 6
            if not self.sink(va, victim_gbank, victim_row):
                self.blocked += 1
                return BLOCKED  # nothing mutated; caller retries

        # Commit.
        self.misses += 1
        if is_write:
            self.write_misses += 1
        else:
            self.read_misses += 1
        if victim_dirty:
            self.dirty_evictions += 1
            self._clear_dirty(s, victim)
        else:
            self.clean_evictions += 1
        if not self._is_lru:
            rr = self.rrpv[s]
            delta = RRPV_MAX - max(rr)
            if delta:  # age everyone so some line reaches max
                for i in range(self._ways):
                    rr[i] += delta
            if self._is_ship and not (self.reused[s] >> victim) & 1:
                sg = self.sig[s][victim]
                if self.shct[sg] > 0:
                    self.shct[sg] -= 1
        wt = self.way_tag[s]
        del t2w[wt[victim]]
        # Inline install on the common path.
        t2w[tag] = victim
        wt[victim] = tag
        banks[victim] = gbank
        self.way_row[s][victim] = row
        if order is not None:
            order.remove(victim)
            order.append(victim)
        else:
            if self._is_ship:
                sg = ship_signature(line, stream_id)
                self.sig[s][victim] = sg
                self.reused[s] &= ~(1 << victim)
                self.rrpv[s][victim] = RRPV_MAX if self.shct[sg] == 0 else RRPV_LONG
            else:
                self.rrpv[s][victim] = RRPV_LONG
        if is_write and not (self.dirty[s] >> victim) & 1:
            self.dirty[s] |= 1 << victim
            self.dirtying_events += 1
            if self._vwq_index is not None:
                self._vwq_add(s, victim)

        cleansed = False
        if cleanse_way is not None:
            cw = cleanse_way
            if self.sink(self._addr_of(s, cw), self.way_bank[s][cw], self.way_row[s][cw]):
                self._clear_dirty(s, cw)
                self.cleanses += 1
                cleansed = True
            else:
                self.cleanse_skipped += 1
        if overridden:
            self.overrides += 1
        elif not cleansed:
            self.lru_evictions += 1

        if self._wp == "vwq" and victim_dirty:
            self._vwq_drain(victim_gbank, victim_row)
        elif self._wp == "eager":
            self._eager_check(s)
        return MISS_EVICT

    def _install(self, s, w, tag, is_write, stream_id, gbank, row):
        self.tag2way[s][tag] = w
        self.way_tag[s][w] = tag
        self.way_bank[s][w] = gbank
        self.way_row[s][w] = row
        if self._repl == "lru":
            order = self.lru[s]
            if w in order:
                order.remove(w)
            order.append(w)
        else:
            if self._repl == "ship":
                line = (tag << self._set_bits) | s
                sg = ship_signature(line, stream_id)
                self.sig[s][w] = sg
                self.reused[s] &= ~(1 << w)
                self.rrpv[s][w] = RRPV_MAX if self.shct[sg] == 0 else RRPV_LONG
            else:
                self.rrpv[s][w] = RRPV_LONG
        if is_write:
            self._set_dirty(s, w)

    # -- inspection ------------------------------------------------------

    def dirty_lines(self) -> int:
        return sum(m.bit_count() for m in self.dirty)

    def decisions(self) -> tuple[int, int, int]:
        return self.lru_evictions, self.overrides, self.cleanses
