"""Synthetic access-stream generators and trace file IO.

Generators yield chunked (kinds, addrs, streams) parallel lists; kind 0 is a
read, 1 is a write. Binary traces (.blpt) are the magic "BLP1", a u32 LE
record count, then 9-byte records: one type byte (bit 0 kind, high nibble
stream id) and a u64 LE byte address.
"""

import io
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, TraceParseError

READ = 0
WRITE = 1
CHUNK = 1 << 16
MAGIC = b"BLP1"
_REC_DTYPE = np.dtype([("t", "u1"), ("a", "<u8")])

KERNELS = ("stream_copy", "stream_scale", "stream_add", "stream_triad")
WORKLOAD_KINDS = KERNELS + ("uniform_random", "mixed", "trace")


@dataclass
class WorkloadSpec:
    kind: str = "uniform_random"
    length: int = 1_000_000  # number of accesses
    seed: int = 0
    footprint_bytes: int = 64 * 2**20
    write_fraction: float = 0.5
    streams: int = 4  # mixed only
    base_addr: int = 0
    path: str = ""  # trace only

    def __post_init__(self):
        if self.kind not in WORKLOAD_KINDS:
            raise ConfigError(
                f"workload.kind must be one of {WORKLOAD_KINDS}, got {self.kind!r}"
            )
        if self.kind != "trace" and self.length < 1:
            raise ConfigError("workload.length must be >= 1")
        if self.footprint_bytes < 64 * 4 or self.footprint_bytes % 64:
            raise ConfigError("workload.footprint_bytes must be a multiple of 64")
        if not 0.0 <= self.write_fraction <= 1.0:
            raise ConfigError("workload.write_fraction must be in [0, 1]")
        if self.streams < 1 or self.streams > 16:
            raise ConfigError("workload.streams must be in 1..16")
        if self.base_addr % 64:
            raise ConfigError("workload.base_addr must be line aligned")
        if self.kind == "trace" and not self.path:
            raise ConfigError("workload.path required for trace workloads")


# Element patterns: (array_index, kind) per access of one kernel iteration.
_KERNEL_PATTERNS = {
    "stream_copy": ((0, READ), (2, WRITE)),
    "stream_scale": ((2, READ), (1, WRITE)),
    "stream_add": ((0, READ), (1, READ), (2, WRITE)),
    "stream_triad": ((1, READ), (2, READ), (0, WRITE)),
}


class KernelGenerator:
    """Streaming kernel over three arrays laid out back to back."""

    def __init__(self, spec: WorkloadSpec):
        self.spec = spec
        self.pattern = _KERNEL_PATTERNS[spec.kind]
        self.array_lines = max(1, spec.footprint_bytes // (3 * 64))

    def chunks(self):
        spec = self.spec
        per_iter = len(self.pattern)
        bases = np.array(
            [spec.base_addr + a * self.array_lines * 64 for a, _ in self.pattern],
            dtype=np.int64,
        )
        kinds_pat = np.array([k for _, k in self.pattern], dtype=np.uint8)
        streams_pat = np.array([a for a, _ in self.pattern], dtype=np.uint8)
        emitted = 0
        elem = 0
        while emitted < spec.length:
            n_elems = min(CHUNK // per_iter, -(-(spec.length - emitted) // per_iter))
            idx = (np.arange(elem, elem + n_elems, dtype=np.int64) % self.array_lines)
            addrs = (bases[None, :] + (idx[:, None] << 6)).ravel()
            kinds = np.tile(kinds_pat, n_elems)
            streams = np.tile(streams_pat, n_elems)
            take = min(len(addrs), spec.length - emitted)
            yield (
                kinds[:take].tolist(),
                addrs[:take].tolist(),
                streams[:take].tolist(),
            )
            emitted += take
            elem += n_elems


class UniformRandomGenerator:
    def __init__(self, spec: WorkloadSpec):
        self.spec = spec

    def chunks(self):
        spec = self.spec
        rng = np.random.default_rng(spec.seed)
        lines = spec.footprint_bytes // 64
        left = spec.length
        zeros = [0] * CHUNK
        while left > 0:
            n = min(CHUNK, left)
            addrs = (rng.integers(0, lines, n, dtype=np.int64) << 6) + spec.base_addr
            kinds = (rng.random(n) < spec.write_fraction).astype(np.uint8)
            yield kinds.tolist(), addrs.tolist(), zeros[:n]
            left -= n


class MixedGenerator:
    """Round-robin interleave of independent uniform streams over disjoint
    slices of the footprint."""

    def __init__(self, spec: WorkloadSpec):
        self.spec = spec

    def chunks(self):
        spec = self.spec
        ns = spec.streams
        slice_lines = max(1, spec.footprint_bytes // 64 // ns)
        rng = np.random.default_rng(spec.seed)
        left = spec.length
        pos = 0
        while left > 0:
            n = min(CHUNK, left)
            sids = (np.arange(pos, pos + n, dtype=np.int64) % ns).astype(np.uint8)
            offs = rng.integers(0, slice_lines, n, dtype=np.int64)
            addrs = spec.base_addr + ((sids.astype(np.int64) * slice_lines + offs) << 6)
            kinds = (rng.random(n) < spec.write_fraction).astype(np.uint8)
            yield kinds.tolist(), addrs.tolist(), sids.tolist()
            left -= n
            pos += n


class TraceFileGenerator:
    def __init__(self, path: str):
        self.path = path

    def chunks(self):
        if str(self.path).endswith(".csv"):
            yield from _read_csv_chunks(self.path)
        else:
            yield from _read_binary_chunks(self.path)


def make_generator(spec: WorkloadSpec):
    if spec.kind in KERNELS:
        return KernelGenerator(spec)
    if spec.kind == "uniform_random":
        return UniformRandomGenerator(spec)
    if spec.kind == "mixed":
        return MixedGenerator(spec)
    return TraceFileGenerator(spec.path)


# -- trace files ---------------------------------------------------------


def write_trace(path: str, chunks) -> int:
    """Write chunked records as a binary .blpt file; returns record count."""
    count = 0
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(b"\x00\x00\x00\x00")  # patched after the body
        for kinds, addrs, streams in chunks:
            arr = np.empty(len(addrs), dtype=_REC_DTYPE)
            arr["t"] = np.asarray(kinds, dtype=np.uint8) | (
                np.asarray(streams, dtype=np.uint8) << 4
            )
            arr["a"] = np.asarray(addrs, dtype=np.uint64)
            f.write(arr.tobytes())
            count += len(addrs)
        f.seek(4)
        f.write(int(count).to_bytes(4, "little"))
    return count


def _read_binary_chunks(path: str):
    with open(path, "rb") as f:
        head = f.read(8)
        if len(head) < 8 or head[:4] != MAGIC:
            raise TraceParseError(f"{path}: bad magic", offset=0)
        count = int.from_bytes(head[4:8], "little")
        seen = 0
        while seen < count:
            n = min(CHUNK, count - seen)
            raw = f.read(9 * n)
            if len(raw) != 9 * n:
                raise TraceParseError(
                    f"{path}: truncated at record {seen + len(raw) // 9}",
                    offset=8 + 9 * seen + len(raw),
                )
            arr = np.frombuffer(raw, dtype=_REC_DTYPE)
            t = arr["t"]
            bad = np.nonzero(t & 0x0E)[0]
            if len(bad):
                i = int(bad[0])
                raise TraceParseError(
                    f"{path}: invalid type byte {t[i]:#x} in record {seen + i}",
                    offset=8 + 9 * (seen + i),
                )
            yield (
                (t & 1).tolist(),
                arr["a"].astype(np.int64).tolist(),
                (t >> 4).tolist(),
            )
            seen += n
        if f.read(1):
            raise TraceParseError(f"{path}: trailing bytes after {count} records",
                                  offset=8 + 9 * count)


def write_csv_trace(path: str, chunks) -> int:
    count = 0
    with open(path, "w") as f:
        f.write("kind,addr_hex,stream\n")
        for kinds, addrs, streams in chunks:
            for k, a, s in zip(kinds, addrs, streams):
                f.write(f"{'write' if k else 'read'},{a:x},{s}\n")
                count += 1
    return count


def _read_csv_chunks(path: str):
    kinds, addrs, streams = [], [], []
    with open(path) as f:
        header = f.readline()
        if header.strip() != "kind,addr_hex,stream":
            raise TraceParseError(f"{path}: bad header {header.strip()!r}", offset=1)
        for lineno, raw in enumerate(f, start=2):
            raw = raw.strip()
            if not raw:
                continue
            parts = raw.split(",")
            if len(parts) != 3 or parts[0] not in ("read", "write"):
                raise TraceParseError(f"{path}: bad record on line {lineno}", offset=lineno)
            try:
                addr = int(parts[1], 16)
                stream = int(parts[2])
            except ValueError:
                raise TraceParseError(f"{path}: bad number on line {lineno}", offset=lineno)
            kinds.append(WRITE if parts[0] == "write" else READ)
            addrs.append(addr)
            streams.append(stream)
            if len(kinds) == CHUNK:
                yield kinds, addrs, streams
                kinds, addrs, streams = [], [], []
    if kinds:
        yield kinds, addrs, streams
