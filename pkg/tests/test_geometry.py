"""Address mapping vs an independent bit-by-bit extraction oracle."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blpsim.errors import ConfigError
from blpsim.geometry import (
    FIELD_NAMES,
    AddressDecoder,
    AddressMapping,
    DramCoord,
    DramGeometry,
    default_mapping,
    flat_bank_id,
    split_flat_bank,
)

GEOM = DramGeometry()
MAPPING = default_mapping(GEOM)
DEC = AddressDecoder(GEOM, MAPPING)


def oracle_decode(addr, geom, mapping):
    # Deliberately naive: walk the assignment list one bit at a time.
    vals = {name: 0 for name in FIELD_NAMES}
    counts = {name: 0 for name in FIELD_NAMES}
    for name, pos in mapping.fields:
        vals[name] |= ((addr >> pos) & 1) << counts[name]
        counts[name] += 1
    if mapping.pbpl and mapping.pbpl_row_bits:
        nb = geom.field_width("bank")
        sel = (vals["bankgroup"] << nb) | vals["bank"]
        for i, rb in enumerate(mapping.pbpl_row_bits):
            sel ^= ((vals["row"] >> rb) & 1) << i
        vals["bankgroup"], vals["bank"] = sel >> nb, sel & ((1 << nb) - 1)
    return DramCoord(
        vals["channel"],
        vals["subchannel"],
        vals["bankgroup"],
        vals["bank"],
        vals["row"],
        vals["column"],
    )


def test_zero_address():
    assert DEC.decode(0) == DramCoord(0, 0, 0, 0, 0, 0)


def test_frozen_samples():
    # Hand-traced against the default layout: bit6 sc, bits7-8 col, bits9-11
    # bankgroup, bits12-13 bank, bits14-18 col, bits19-34 row; bank-group/bank
    # XORed with the 5 low row bits.
    samples = [
        (0x40, DramCoord(0, 1, 0, 0, 0, 0)),
        (0x1A40, DramCoord(0, 1, 5, 1, 0, 0)),
        (0x80000, DramCoord(0, 0, 0, 1, 1, 0)),
        (0x80040, DramCoord(0, 1, 0, 1, 1, 0)),
        (0x180000, DramCoord(0, 0, 0, 3, 3, 0)),
    ]
    for addr, want in samples:
        assert DEC.decode(addr) == want, hex(addr)


@pytest.mark.parametrize("pbpl", [True, False])
def test_oracle_random_addresses(pbpl):
    mapping = default_mapping(GEOM, pbpl=pbpl)
    dec = AddressDecoder(GEOM, mapping)
    rng = random.Random(1234)
    top = GEOM.capacity_bytes()
    for _ in range(50):
        addr = rng.randrange(top) & ~0x3F
        assert dec.decode(addr) == oracle_decode(addr, GEOM, mapping)


def test_offset_bits_ignored():
    rng = random.Random(7)
    for _ in range(20):
        addr = rng.randrange(GEOM.capacity_bytes())
        assert DEC.decode(addr) == DEC.decode(addr | 0x3F)


def test_flat_bank_id_corners():
    assert flat_bank_id(DramCoord(0, 0, 0, 0, 0, 0), GEOM) == 0
    assert flat_bank_id(DramCoord(0, 1, 7, 3, 0, 0), GEOM) == 63


def test_flat_bank_id_bijective():
    seen = set()
    for sc in range(GEOM.subchannels_per_channel):
        for bg in range(GEOM.bankgroups_per_subchannel):
            for ba in range(GEOM.banks_per_bankgroup):
                flat = flat_bank_id(DramCoord(0, sc, bg, ba, 0, 0), GEOM)
                assert split_flat_bank(flat, GEOM) == (sc, bg, ba)
                seen.add(flat)
    assert seen == set(range(GEOM.banks_per_channel))


@given(st.integers(min_value=0, max_value=GEOM.capacity_bytes() - 1))
def test_round_trip(addr):
    line_addr = addr & ~0x3F
    assert DEC.encode(DEC.decode(addr)) == line_addr


def test_pbpl_permutes_banks_within_row():
    # For any fixed row the XOR is a bijection on (bankgroup, bank).
    for row in (0, 1, 5, 31, 37, 65535):
        seen = set()
        for bg in range(8):
            for ba in range(4):
                addr = DEC.encode(DramCoord(0, 0, bg, ba, row, 0))
                got = DEC.decode(addr)
                assert got.row == row
                seen.add((got.bankgroup, got.bank))
        assert len(seen) == 32


def test_small_geometry():
    geom = DramGeometry(
        subchannels_per_channel=1,
        bankgroups_per_subchannel=2,
        banks_per_bankgroup=2,
        rows_per_bank=16,
        columns_per_row=4,
    )
    dec = AddressDecoder(geom, default_mapping(geom))
    rng = random.Random(99)
    for _ in range(200):
        addr = rng.randrange(geom.capacity_bytes()) & ~0x3F
        coord = dec.decode(addr)
        assert dec.encode(coord) == addr
        assert coord == oracle_decode(addr, geom, default_mapping(geom))


def test_mapping_validation():
    fields = list(MAPPING.fields)
    with pytest.raises(ConfigError):
        AddressDecoder(GEOM, AddressMapping(tuple(fields[:-1])))  # missing a bit
    dup = fields[:]
    dup[1] = (dup[1][0], dup[0][1])
    with pytest.raises(ConfigError):
        AddressDecoder(GEOM, AddressMapping(tuple(dup)))
    with pytest.raises(ConfigError):
        AddressDecoder(
            GEOM, AddressMapping(MAPPING.fields, pbpl=True, pbpl_row_bits=(99,))
        )
    with pytest.raises(ConfigError):
        DramGeometry(channels=3)


def test_capacity():
    assert GEOM.capacity_bytes() == 32 * 2**30


@settings(max_examples=25)
@given(st.randoms(use_true_random=False))
def test_shuffled_mapping_round_trips(rnd):
    # Any permutation of the physical bit positions is still invertible.
    base = default_mapping(GEOM, pbpl=True)
    positions = [pos for _, pos in base.fields]
    rnd.shuffle(positions)
    fields = tuple(
        (name, positions[i]) for i, (name, _) in enumerate(base.fields)
    )
    dec = AddressDecoder(GEOM, AddressMapping(fields, pbpl=True, pbpl_row_bits=base.pbpl_row_bits))
    for _ in range(5):
        addr = rnd.randrange(GEOM.capacity_bytes()) & ~0x3F
        assert dec.encode(dec.decode(addr)) == addr
