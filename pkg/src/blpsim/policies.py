"""Bank-activity tracker and bank-aware writeback decision hooks.

The tracker is one bit per DRAM bank per channel (8 bytes per channel at the
default 64-bank geometry). The LLC sets a bank's bit whenever it enqueues a
writeback to that bank; a set bit means the bank already has recent write work
queued, so steering the next writeback elsewhere raises drain parallelism.
Each sub-channel's 32-bit group self-clears when it saturates, restarting the
tracking epoch; clearing the whole channel word instead is a config toggle.
"""


class BlpTracker:
    def __init__(
        self,
        channels: int = 1,
        subchannels: int = 2,
        banks_per_subchannel: int = 32,
        whole_reset: bool = False,
        disabled: bool = False,
    ):
        self.channels = channels
        self.group_bits = banks_per_subchannel
        self.groups = subchannels
        self.word_bits = subchannels * banks_per_subchannel
        self.whole_reset = whole_reset
        self.disabled = disabled
        self._group_full = (1 << banks_per_subchannel) - 1
        self._word_full = (1 << self.word_bits) - 1
        self.bits = [0] * channels
        # Instrumentation: policies that must not consult the tracker are
        # checked against these counters.
        self.marks = 0
        self.queries = 0
        self.resets = 0

    def mark(self, channel: int, bank: int) -> None:
        if self.disabled:
            return
        self.marks += 1
        w = self.bits[channel] | (1 << bank)
        if self.whole_reset:
            if w == self._word_full:
                w = 0
                self.resets += 1
        else:
            shift = (bank // self.group_bits) * self.group_bits
            mask = self._group_full << shift
            if w & mask == mask:
                w &= ~mask
                self.resets += 1
        self.bits[channel] = w

    def pending(self, channel: int, bank: int) -> bool:
        self.queries += 1
        return (self.bits[channel] >> bank) & 1 == 1

    def snapshot(self, channel: int) -> int:
        """Bit word read once at the start of a victim scan."""
        self.queries += 1
        return self.bits[channel]

    def combined_snapshot(self) -> int:
        """All channel words concatenated; bit index = channel*word_bits + bank."""
        self.queries += 1
        return self.combined()

    def combined(self) -> int:
        """The concatenated word without counting a policy query."""
        snap = 0
        for ch in range(self.channels - 1, -1, -1):
            snap = (snap << self.word_bits) | self.bits[ch]
        return snap

    def storage_bytes(self) -> int:
        return self.channels * ((self.word_bits + 7) // 8)


def bard_e_choose(scan, dirty_mask: int, way_banks, snap: int):
    """Victim for a dirty base victim: (way, overridden).

    Keeps the base victim when its bank bit is clear; otherwise takes the
    first dirty line (in eviction-priority order) whose bank bit is clear;
    otherwise falls back to the base victim.
    """
    victim = scan[0]
    if not (snap >> way_banks[victim]) & 1:
        return victim, False
    for i in range(1, len(scan)):
        w = scan[i]
        if (dirty_mask >> w) & 1 and not (snap >> way_banks[w]) & 1:
            return w, True
    return victim, False


def bard_c_choose(scan, dirty_mask: int, way_banks, snap: int):
    """Way to cleanse alongside a clean victim, or None.

    The clean victim is evicted silently either way; the first dirty line
    with a clear bank bit gets written back early and retained clean.
    """
    for i in range(1, len(scan)):
        w = scan[i]
        if (dirty_mask >> w) & 1 and not (snap >> way_banks[w]) & 1:
            return w
    return None
