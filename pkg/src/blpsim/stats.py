"""Run statistics: drain-episode records, write-spacing series, CSV emission.

Write bank-level parallelism (WBLP) is the number of distinct banks written
during one drain episode; write-to-write delay is the issue-cycle gap between
consecutive WR commands within an episode on one sub-channel (gaps across
episode boundaries are not delays, they are idle time). MPKA/WPKA are misses
and writebacks per kilo-access: traces carry accesses, not instructions.
"""

import io
from dataclasses import dataclass, field, fields

from .timing import cycles_to_ns

EpisodeRec = tuple  # (channel, subchannel, start, end, writes, banks, trigger)

TRIGGER_HIGH = "high"
TRIGGER_IDLE = "idle"
TRIGGER_FINAL = "final"


class RunStats:
    """Mutable collector shared by the engine and the controllers."""

    def __init__(self, keep_episodes: bool = True):
        self.keep_episodes = keep_episodes
        self.episodes: list[EpisodeRec] = []
        self.episode_count = 0
        self.wblp_sum = 0
        self.wblp_max = 0
        self.writes_in_episodes = 0
        self.write_mode_cycles = 0
        self.w2w_hist: dict[int, int] = {}
        self.w2w_count = 0
        self.w2w_sum = 0
        self.w2w_max = 0
        self.rd_commands = 0
        self.wr_commands = 0
        self.act_commands = 0
        self.pre_commands = 0
        self.forwards = 0
        self.coalesced_writes = 0
        self.reads = 0
        self.writes = 0
        self.stall_cycles = 0

    def record_episode(self, channel, sc, start, end, writes, banks, trigger):
        self.episode_count += 1
        self.wblp_sum += banks
        if banks > self.wblp_max:
            self.wblp_max = banks
        self.writes_in_episodes += writes
        self.write_mode_cycles += end - start
        if self.keep_episodes:
            self.episodes.append((channel, sc, start, end, writes, banks, trigger))

    def record_w2w(self, delta: int):
        self.w2w_count += 1
        self.w2w_sum += delta
        if delta > self.w2w_max:
            self.w2w_max = delta
        self.w2w_hist[delta] = self.w2w_hist.get(delta, 0) + 1


@dataclass
class StatsReport:
    policy: str
    repl: str
    workload: str
    seed: int
    config_hash: str
    total_cycles: int
    accesses: int
    reads: int
    writes: int
    hits: int
    misses: int
    read_misses: int
    write_misses: int
    forwards: int
    writebacks_evicted: int
    writebacks_cleansed: int
    writebacks_eager: int
    writebacks_vwq: int
    writebacks_total: int
    dirtying_events: int
    dirty_resident_end: int
    episodes: int
    wblp_mean: float
    wblp_max: int
    write_mode_cycles: int
    write_mode_fraction: float
    w2w_count: int
    w2w_mean_cycles: float
    w2w_max_cycles: int
    mpka: float
    wpka: float
    overrides: int
    cleanses: int
    lru_evictions: int
    cleanse_skipped: int
    vwq_candidates: int
    rd_commands: int
    wr_commands: int
    act_commands: int
    pre_commands: int
    coalesced_writes: int
    tracker_marks: int
    tracker_queries: int
    tracker_resets: int
    extra_wb_ratio: float | None = None
    miss_delta: float | None = None

    @property
    def w2w_mean_ns(self) -> float:
        return cycles_to_ns(self.w2w_mean_cycles)

    @property
    def w2w_max_ns(self) -> float:
        return cycles_to_ns(self.w2w_max_cycles)


# CSV layout: the comparison columns first, then everything else.
_LEAD = [
    "policy",
    "seed",
    "workload",
    "wblp_mean",
    "write_mode_frac",
    "w2w_mean_cycles",
    "w2w_max_cycles",
    "mpka",
    "wpka",
    "total_cycles",
    "overrides",
    "cleanses",
    "lru_evictions",
    "extra_wb_ratio",
]
_ALIAS = {"write_mode_frac": "write_mode_fraction"}


def csv_columns() -> list[str]:
    lead_real = {_ALIAS.get(c, c) for c in _LEAD}
    rest = [f.name for f in fields(StatsReport) if f.name not in lead_real]
    return _LEAD + rest + ["w2w_mean_ns", "w2w_max_ns"]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(round(v, 9))
    return str(v)


def csv_header(config_items: list[tuple[str, str]]) -> str:
    out = io.StringIO()
    for k, v in config_items:
        out.write(f"# cfg {k}={v}\n")
    out.write(",".join(csv_columns()) + "\n")
    return out.getvalue()


def csv_row(r: StatsReport) -> str:
    vals = []
    for col in csv_columns():
        name = _ALIAS.get(col, col)
        vals.append(_fmt(getattr(r, name)))
    return ",".join(vals) + "\n"


def parse_csv(path: str):
    """Read a stats CSV back: (config_items, list of row dicts)."""
    config_items = []
    rows = []
    cols = None
    with open(path) as f:
        for line in f:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("# cfg "):
                k, _, v = line[len("# cfg "):].partition("=")
                config_items.append((k, v))
            elif line.startswith("#"):
                continue  # other annotations (sweep axes etc.)
            elif cols is None:
                cols = line.split(",")
            else:
                rows.append(dict(zip(cols, line.split(","))))
    return config_items, rows
