"""DRAM geometry and physical-address-to-DRAM-coordinate mapping.

Addresses are byte addresses; the low 6 bits select a byte within a 64B line
and never influence the DRAM coordinate. The mapping assigns each remaining
address bit to one coordinate field. Bank-group/bank bits can additionally be
XORed with low row bits so that consecutive same-bank pages land in permuted
banks (reduces row conflicts for streaming writebacks).
"""

from dataclasses import dataclass, field
from typing import NamedTuple

from .errors import ConfigError

LINE_SIZE = 64
LINE_BITS = 6

FIELD_NAMES = ("channel", "subchannel", "bankgroup", "bank", "row", "column")


class DramCoord(NamedTuple):
    channel: int
    subchannel: int
    bankgroup: int
    bank: int
    row: int
    column: int


def _log2(n: int, what: str) -> int:
    if n < 1 or n & (n - 1):
        raise ConfigError(f"{what} must be a power of two >= 1, got {n}")
    return n.bit_length() - 1


@dataclass(frozen=True)
class DramGeometry:
    channels: int = 1
    subchannels_per_channel: int = 2
    bankgroups_per_subchannel: int = 8
    banks_per_bankgroup: int = 4
    rows_per_bank: int = 65536
    columns_per_row: int = 128  # cache lines per row (128 x 64B = 8KB row)

    def __post_init__(self):
        for name in (
            "channels",
            "subchannels_per_channel",
            "bankgroups_per_subchannel",
            "banks_per_bankgroup",
            "rows_per_bank",
            "columns_per_row",
        ):
            _log2(getattr(self, name), f"geom.{name}")

    @property
    def banks_per_subchannel(self) -> int:
        return self.bankgroups_per_subchannel * self.banks_per_bankgroup

    @property
    def banks_per_channel(self) -> int:
        return self.subchannels_per_channel * self.banks_per_subchannel

    @property
    def total_banks(self) -> int:
        return self.channels * self.banks_per_channel

    def field_width(self, name: str) -> int:
        dim = {
            "channel": self.channels,
            "subchannel": self.subchannels_per_channel,
            "bankgroup": self.bankgroups_per_subchannel,
            "bank": self.banks_per_bankgroup,
            "row": self.rows_per_bank,
            "column": self.columns_per_row,
        }[name]
        return _log2(dim, name)

    def capacity_bytes(self) -> int:
        return (
            self.total_banks * self.rows_per_bank * self.columns_per_row * LINE_SIZE
        )


@dataclass(frozen=True)
class AddressMapping:
    """Bit assignment for every coordinate field.

    ``fields`` lists (field_name, physical_bit) pairs; the k-th pair naming a
    field supplies bit k (LSB first) of that field. ``pbpl_row_bits`` are the
    row-field bit indices XORed onto the concatenated (bankgroup, bank) value
    when ``pbpl`` is enabled.
    """

    fields: tuple[tuple[str, int], ...]
    pbpl: bool = True
    pbpl_row_bits: tuple[int, ...] = field(default_factory=tuple)


def default_mapping(geom: DramGeometry, pbpl: bool = True) -> AddressMapping:
    """Interleaving layout used by default.

    From the LSB just above the line offset: sub-channel bit(s), two column
    bits, bank-group bits, bank bits, the remaining column bits, row bits, and
    channel bits last (present only with multiple channels). Spreads
    consecutive lines across sub-channels and bank groups.
    """
    fields: list[tuple[str, int]] = []
    bit = LINE_BITS

    def take(name: str, n: int):
        nonlocal bit
        for _ in range(n):
            fields.append((name, bit))
            bit += 1

    col_bits = geom.field_width("column")
    low_col = min(2, col_bits)
    take("subchannel", geom.field_width("subchannel"))
    take("column", low_col)
    take("bankgroup", geom.field_width("bankgroup"))
    take("bank", geom.field_width("bank"))
    take("column", col_bits - low_col)
    take("row", geom.field_width("row"))
    take("channel", geom.field_width("channel"))

    bank_sel_bits = geom.field_width("bankgroup") + geom.field_width("bank")
    xor_bits = tuple(range(min(bank_sel_bits, geom.field_width("row"))))
    return AddressMapping(tuple(fields), pbpl=pbpl, pbpl_row_bits=xor_bits)


def _segments(assignments: list[int]) -> list[tuple[int, int, int]]:
    """Collapse per-bit source positions into (src_shift, mask, dst_shift) runs."""
    segs = []
    i = 0
    while i < len(assignments):
        j = i
        while j + 1 < len(assignments) and assignments[j + 1] == assignments[j] + 1:
            j += 1
        width = j - i + 1
        segs.append((assignments[i], (1 << width) - 1, i))
        i = j + 1
    return segs


class AddressDecoder:
    """Compiled decode/encode for one (geometry, mapping) pair."""

    def __init__(self, geom: DramGeometry, mapping: AddressMapping):
        self.geom = geom
        self.mapping = mapping
        per_field: dict[str, list[int]] = {name: [] for name in FIELD_NAMES}
        seen_bits: set[int] = set()
        for name, pos in mapping.fields:
            if name not in per_field:
                raise ConfigError(f"mapping names unknown field {name!r}")
            if pos < LINE_BITS:
                raise ConfigError(
                    f"mapping assigns bit {pos} inside the line offset"
                )
            if pos in seen_bits:
                raise ConfigError(f"mapping assigns physical bit {pos} twice")
            seen_bits.add(pos)
            per_field[name].append(pos)
        for name in FIELD_NAMES:
            want = geom.field_width(name)
            got = len(per_field[name])
            if got != want:
                raise ConfigError(
                    f"mapping provides {got} bits for {name}, geometry needs {want}"
                )
        for rb in mapping.pbpl_row_bits:
            if not 0 <= rb < geom.field_width("row"):
                raise ConfigError(
                    f"pbpl row bit {rb} outside row field of "
                    f"{geom.field_width('row')} bits"
                )
        if len(set(mapping.pbpl_row_bits)) != len(mapping.pbpl_row_bits):
            raise ConfigError("pbpl row bits must be distinct")

        self._segs = {name: _segments(bits) for name, bits in per_field.items()}
        self._bank_bits = geom.field_width("bank")
        self._bg_bits = geom.field_width("bankgroup")
        self._bank_sel_mask = (1 << (self._bank_bits + self._bg_bits)) - 1
        # Row-bit gather for the XOR permutation: (row >> src) & 1 << dst.
        self._xor_taps = tuple(
            (rb, dst) for dst, rb in enumerate(mapping.pbpl_row_bits)
        )
        self._pbpl = mapping.pbpl and bool(self._xor_taps)

    def _extract(self, addr: int, name: str) -> int:
        v = 0
        for src, mask, dst in self._segs[name]:
            v |= ((addr >> src) & mask) << dst
        return v

    def _xor_value(self, row: int) -> int:
        x = 0
        for src, dst in self._xor_taps:
            x |= ((row >> src) & 1) << dst
        return x

    def decode_arrays(self, addrs) -> dict:
        """Vector decode of a numpy int64 address array: field name -> array."""
        import numpy as np

        a = np.asarray(addrs, dtype=np.int64)
        out = {}
        for name in FIELD_NAMES:
            v = np.zeros(a.shape, dtype=np.int64)
            for src, mask, dst in self._segs[name]:
                v |= ((a >> src) & mask) << dst
            out[name] = v
        if self._pbpl:
            row = out["row"]
            x = np.zeros(a.shape, dtype=np.int64)
            for src, dst in self._xor_taps:
                x |= ((row >> src) & 1) << dst
            sel = ((out["bankgroup"] << self._bank_bits) | out["bank"]) ^ x
            out["bankgroup"] = sel >> self._bank_bits
            out["bank"] = sel & ((1 << self._bank_bits) - 1)
        return out

    def decode(self, addr: int) -> DramCoord:
        ch = self._extract(addr, "channel")
        sc = self._extract(addr, "subchannel")
        bg = self._extract(addr, "bankgroup")
        ba = self._extract(addr, "bank")
        row = self._extract(addr, "row")
        col = self._extract(addr, "column")
        if self._pbpl:
            sel = ((bg << self._bank_bits) | ba) ^ self._xor_value(row)
            bg = sel >> self._bank_bits
            ba = sel & ((1 << self._bank_bits) - 1)
        return DramCoord(ch, sc, bg, ba, row, col)

    def encode(self, coord: DramCoord) -> int:
        """Inverse of decode; returns the line-aligned byte address."""
        bg, ba = coord.bankgroup, coord.bank
        if self._pbpl:
            sel = ((bg << self._bank_bits) | ba) ^ self._xor_value(coord.row)
            bg = sel >> self._bank_bits
            ba = sel & ((1 << self._bank_bits) - 1)
        values = {
            "channel": coord.channel,
            "subchannel": coord.subchannel,
            "bankgroup": bg,
            "bank": ba,
            "row": coord.row,
            "column": coord.column,
        }
        addr = 0
        for name, stored in values.items():
            for src, mask, dst in self._segs[name]:
                addr |= ((stored >> dst) & mask) << src
        return addr

    def describe(self) -> list[tuple[int, str, int]]:
        """(physical_bit, field, field_bit) rows sorted by physical bit."""
        rows = []
        for name, segs in self._segs.items():
            for src, mask, dst in segs:
                width = mask.bit_length()
                for k in range(width):
                    rows.append((src + k, name, dst + k))
        rows.sort()
        return rows


def flat_bank_id(coord: DramCoord, geom: DramGeometry) -> int:
    """Per-channel bank ordinal in [0, banks_per_channel).

    Sub-channel major, then bank group, then bank: with defaults the last bank
    of the last group of sub-channel 1 is ordinal 63.
    """
    return (
        coord.subchannel * geom.bankgroups_per_subchannel + coord.bankgroup
    ) * geom.banks_per_bankgroup + coord.bank


def global_bank_id(coord: DramCoord, geom: DramGeometry) -> int:
    """Bank ordinal unique across channels."""
    return coord.channel * geom.banks_per_channel + flat_bank_id(coord, geom)


def split_flat_bank(flat: int, geom: DramGeometry) -> tuple[int, int, int]:
    """Inverse of flat_bank_id: (subchannel, bankgroup, bank)."""
    ba = flat % geom.banks_per_bankgroup
    rest = flat // geom.banks_per_bankgroup
    bg = rest % geom.bankgroups_per_subchannel
    return rest // geom.bankgroups_per_subchannel, bg, ba
