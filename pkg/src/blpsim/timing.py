"""DDR5 bank and bus timing at controller clock granularity.

All times are integer controller cycles at 2400 MHz (DDR5-4800 command rate),
so one cycle is 1/2.4 ns. Data bursts occupy the sub-channel bus for `burst`
cycles starting CWL (writes) or CL (reads) after the command issues.

Same-bank write-to-write costs by row-buffer state:
  different bank group      tccd_s_wr          (8 cycles)
  same bank group, row hit  tccd_l_wr          (48 cycles, 6x)
  same bank, row conflict   cwl+twr+trp+trcd   (188 cycles, 23.5x)
"""

from dataclasses import dataclass, replace

from .errors import ConfigError, SimulationContractError

CYCLES_PER_NS = 2.4

# Command kinds.
ACT = 0
PRE = 1
RD = 2
WR = 3
CMD_NAMES = ("ACT", "PRE", "RD", "WR")

DIR_READ = 0
DIR_WRITE = 1

# Far-past sentinel so max() with timestamps is a no-op.
NEG = -(1 << 30)


def cycles_to_ns(cycles: float) -> float:
    return cycles / CYCLES_PER_NS


@dataclass(frozen=True)
class TimingParams:
    cl: int = 40
    cwl: int = 38
    trcd: int = 39
    trp: int = 39
    tras: int = 77
    twr: int = 72
    burst: int = 8  # BL16 at the controller clock
    tccd_s_wr: int = 8
    tccd_l_wr: int = 48
    tccd_s_rd: int = 8
    tccd_l_rd: int = 16
    turnaround_rd_to_wr: int = 53  # 22ns bus reversal, rounded up
    turnaround_wr_to_rd: int = 53

    def __post_init__(self):
        for name, v in self.__dict__.items():
            if not isinstance(v, int) or v <= 0:
                raise ConfigError(f"timing.{name} must be a positive integer, got {v}")
        if self.tccd_l_wr < self.tccd_s_wr or self.tccd_l_rd < self.tccd_s_rd:
            raise ConfigError("timing: tccd_l must be >= tccd_s")
        if self.tras < self.trcd:
            raise ConfigError("timing: tras must be >= trcd")

    def for_x8_devices(self) -> "TimingParams":
        """x8 DRAMs relax same-bank-group write spacing to 10ns."""
        return replace(self, tccd_l_wr=24)

    @property
    def write_conflict_gap(self) -> int:
        """Same-bank row-conflict WR-to-WR issue gap."""
        return self.cwl + self.twr + self.trp + self.trcd


class BankState:
    """Row-buffer and recovery state of one DRAM bank."""

    __slots__ = (
        "open_row",
        "act_at",
        "rd_wr_ok_at",
        "pre_ok_at",
        "act_ok_at",
        "last_write_burst_end",
    )

    def __init__(self):
        self.open_row = -1
        self.act_at = NEG
        self.rd_wr_ok_at = NEG
        self.pre_ok_at = NEG
        self.act_ok_at = NEG
        self.last_write_burst_end = NEG


class SubchannelBusState:
    """Shared data-bus and command-spacing state of one sub-channel."""

    __slots__ = (
        "direction",
        "bus_free_at",
        "last_wr_issue",
        "last_rd_issue",
        "last_wr_issue_bg",
        "last_rd_issue_bg",
    )

    def __init__(self, bankgroups: int = 8):
        self.direction = DIR_READ
        self.bus_free_at = NEG
        self.last_wr_issue = NEG
        self.last_rd_issue = NEG
        self.last_wr_issue_bg = [NEG] * bankgroups
        self.last_rd_issue_bg = [NEG] * bankgroups


def earliest_issue(
    cmd: int,
    bankgroup: int,
    now: int,
    bank: BankState,
    bus: SubchannelBusState,
    tp: TimingParams,
) -> int:
    """Earliest legal issue cycle >= now for cmd on this bank. Pure."""
    if cmd == ACT:
        if bank.open_row >= 0:
            raise SimulationContractError("ACT to a bank with an open row")
        t = bank.act_ok_at
        return t if t > now else now
    if cmd == PRE:
        if bank.open_row < 0:
            raise SimulationContractError("PRE to a bank with no open row")
        t = bank.pre_ok_at
        return t if t > now else now
    if cmd == WR:
        if bank.open_row < 0:
            raise SimulationContractError("WR to a bank with no open row")
        floor = bus.bus_free_at
        if bus.direction == DIR_READ:
            floor += tp.turnaround_rd_to_wr
        t = floor - tp.cwl
        if now > t:
            t = now
        v = bank.rd_wr_ok_at
        if v > t:
            t = v
        v = bus.last_wr_issue + tp.tccd_s_wr
        if v > t:
            t = v
        v = bus.last_wr_issue_bg[bankgroup] + tp.tccd_l_wr
        if v > t:
            t = v
        return t
    if cmd == RD:
        if bank.open_row < 0:
            raise SimulationContractError("RD to a bank with no open row")
        floor = bus.bus_free_at
        if bus.direction == DIR_WRITE:
            floor += tp.turnaround_wr_to_rd
        t = floor - tp.cl
        if now > t:
            t = now
        v = bank.rd_wr_ok_at
        if v > t:
            t = v
        v = bus.last_rd_issue + tp.tccd_s_rd
        if v > t:
            t = v
        v = bus.last_rd_issue_bg[bankgroup] + tp.tccd_l_rd
        if v > t:
            t = v
        return t
    raise SimulationContractError(f"unknown command {cmd}")


def commit_command(
    cmd: int,
    bankgroup: int,
    row: int,
    t: int,
    bank: BankState,
    bus: SubchannelBusState,
    tp: TimingParams,
) -> None:
    """Apply cmd issued at cycle t. Caller guarantees t is legal."""
    if cmd == WR:
        bus.last_wr_issue = t
        if t > bus.last_wr_issue_bg[bankgroup]:
            bus.last_wr_issue_bg[bankgroup] = t
        rec = t + tp.cwl + tp.twr  # write recovery gates the next PRE
        if rec > bank.pre_ok_at:
            bank.pre_ok_at = rec
        end = t + tp.cwl + tp.burst
        bank.last_write_burst_end = end
        bus.bus_free_at = end
        bus.direction = DIR_WRITE
    elif cmd == RD:
        bus.last_rd_issue = t
        if t > bus.last_rd_issue_bg[bankgroup]:
            bus.last_rd_issue_bg[bankgroup] = t
        bus.bus_free_at = t + tp.cl + tp.burst
        bus.direction = DIR_READ
    elif cmd == ACT:
        bank.open_row = row
        bank.act_at = t
        bank.rd_wr_ok_at = t + tp.trcd
        ras = t + tp.tras
        if ras > bank.pre_ok_at:
            bank.pre_ok_at = ras
    elif cmd == PRE:
        bank.open_row = -1
        bank.act_ok_at = t + tp.trp
    else:
        raise SimulationContractError(f"unknown command {cmd}")


def earliest_ideal_write(now: int, bus: SubchannelBusState, tp: TimingParams) -> int:
    """Issue cycle in ideal-write mode: burst cadence, bank state ignored."""
    floor = bus.bus_free_at
    if bus.direction == DIR_READ:
        floor += tp.turnaround_rd_to_wr
    t = floor - tp.cwl
    if now > t:
        t = now
    v = bus.last_wr_issue + tp.burst
    if v > t:
        t = v
    return t


def commit_ideal_write(t: int, bus: SubchannelBusState, tp: TimingParams) -> None:
    bus.last_wr_issue = t
    bus.bus_free_at = t + tp.cwl + tp.burst
    bus.direction = DIR_WRITE
