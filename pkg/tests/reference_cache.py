"""Naive reference model for replacement behavior.

Deliberately simple: one dict per line, sequence counters for recency, a
repeat-increment loop for RRPV aging. Used as the oracle for the fast
implementation's hit/miss and writeback sequences.
"""

from blpsim.cache import ship_signature


class RefCache:
    def __init__(self, sets: int, ways: int, repl: str = "lru"):
        self.nsets = sets
        self.ways = ways
        self.repl = repl
        self.sets = [[] for _ in range(sets)]  # list of line dicts, index = way
        self.seq = 0
        self.shct = {}
        self.writebacks = []

    def _shct(self, sig):
        return self.shct.get(sig, 1)

    def access(self, addr: int, is_write: bool, stream_id: int = 0) -> str:
        self.seq += 1
        line = addr >> 6
        s = line % self.nsets
        tag = line // self.nsets
        entries = self.sets[s]
        for e in entries:
            if e["tag"] == tag:
                if self.repl == "lru":
                    e["last"] = self.seq
                else:
                    e["rrpv"] = 0
                    if self.repl == "ship" and not e["reused"]:
                        e["reused"] = True
                        self.shct[e["sig"]] = min(3, self._shct(e["sig"]) + 1)
                if is_write:
                    e["dirty"] = True
                return "hit"

        new = {
            "tag": tag,
            "dirty": is_write,
            "last": self.seq,
            "reused": False,
            "sig": ship_signature(line, stream_id),
        }
        if self.repl == "ship":
            new["rrpv"] = 3 if self._shct(new["sig"]) == 0 else 2
        else:
            new["rrpv"] = 2
        if len(entries) < self.ways:
            entries.append(new)
            return "miss"

        if self.repl == "lru":
            victim = min(range(self.ways), key=lambda w: entries[w]["last"])
        else:
            while not any(e["rrpv"] == 3 for e in entries):
                for e in entries:
                    e["rrpv"] += 1
            victim = next(w for w in range(self.ways) if entries[w]["rrpv"] == 3)
        ve = entries[victim]
        if ve["dirty"]:
            self.writebacks.append((ve["tag"] * self.nsets + s) << 6)
        if self.repl == "ship" and not ve["reused"]:
            self.shct[ve["sig"]] = max(0, self._shct(ve["sig"]) - 1)
        entries[victim] = new
        return "miss"
