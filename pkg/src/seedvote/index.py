"""Two-array minimizer index: a cumulative bucket map plus a flat key array.

``map[h] .. map[h+1]`` delimits the locations of bucket ``h`` in ``key``; each
key entry packs ``ref_pos << 1 | strand``.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import BinaryIO

import numpy as np

from .seedquery import MAX_K, extract_minimizers
from .seqio import EncodedReference

MAGIC = b"GSIX"
VERSION = 1
_HEADER = struct.Struct("<4sIIIIIQ")
_U32 = struct.Struct("<I")
_U64 = struct.Struct("<Q")
ELEMENT_BYTES = 8


class IndexFormatError(ValueError):
    pass


class CapacityError(ValueError):
    pass


def default_map_bits(k: int) -> int:
    return min(2 * k, 26)


@dataclass(eq=False)
class SeedIndex:
    k: int
    w: int
    map_bits: int
    max_occ: int
    names: list[str]
    starts: list[int]
    total_len: int
    map: np.ndarray = field(repr=False)
    key: np.ndarray = field(repr=False)

    @property
    def mask(self) -> int:
        return (1 << self.map_bits) - 1

    def query(self, h: int) -> np.ndarray:
        """Packed locations stored under the (already truncated) hash ``h``."""
        start, end = self.map[h], self.map[h + 1]
        return self.key[start:end]

    def seq_lengths(self) -> list[int]:
        ends = self.starts[1:] + [self.total_len]
        return [e - s for s, e in zip(self.starts, ends)]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SeedIndex):
            return NotImplemented
        return (
            (self.k, self.w, self.map_bits, self.max_occ) == (other.k, other.w, other.map_bits, other.max_occ)
            and self.names == other.names
            and self.starts == other.starts
            and self.total_len == other.total_len
            and np.array_equal(self.map, other.map)
            and np.array_equal(self.key, other.key)
        )


def check_params(k: int, w: int, map_bits: int, max_occ: int) -> None:
    if not 1 <= k <= MAX_K:
        raise ValueError(f"k must be in [1, {MAX_K}], got {k}")
    if w < 1:
        raise ValueError(f"w must be >= 1, got {w}")
    if not 1 <= map_bits <= 2 * k:
        raise ValueError(f"map_bits must be in [1, 2k={2 * k}], got {map_bits}")
    if max_occ < 1:
        raise ValueError(f"max_occ must be >= 1, got {max_occ}")


def build_index(
    ref: EncodedReference, k: int, w: int, map_bits: int | None = None, max_occ: int = 10
) -> SeedIndex:
    if map_bits is None:
        map_bits = default_map_bits(k)
    check_params(k, w, map_bits, max_occ)
    pos_parts, hash_parts, strand_parts = [], [], []
    # minimizers never span two reference sequences
    ends = ref.starts[1:] + [ref.total_len]
    for start, end in zip(ref.starts, ends):
        seeds = extract_minimizers(ref.bases[start:end], k, w)
        hash_parts.append(seeds["hash"])
        pos_parts.append(seeds["pos"] + start)
        strand_parts.append(seeds["strand"])
    hashes = np.concatenate(hash_parts)
    pos = np.concatenate(pos_parts)
    strand = np.concatenate(strand_parts)

    # occurrence filter is per seed (full hash), not per bucket
    _, inverse, counts = np.unique(hashes, return_inverse=True, return_counts=True)
    keep = counts[inverse] <= max_occ
    hashes, pos, strand = hashes[keep], pos[keep], strand[keep]

    bucket = (hashes & np.uint64((1 << map_bits) - 1)).astype(np.int64)
    order = np.lexsort((pos, bucket))
    bucket = bucket[order]
    key = (pos[order].astype(np.uint64) << np.uint64(1)) | strand[order].astype(np.uint64)
    offsets = np.zeros((1 << map_bits) + 1, dtype=np.uint64)
    np.cumsum(np.bincount(bucket, minlength=1 << map_bits), out=offsets[1:])
    return SeedIndex(
        k=k,
        w=w,
        map_bits=map_bits,
        max_occ=max_occ,
        names=list(ref.names),
        starts=list(ref.starts),
        total_len=ref.total_len,
        map=offsets,
        key=key,
    )


def query(index: SeedIndex, h: int) -> np.ndarray:
    """Bucket span ``key[map[h]:map[h+1]]``; empty when the seed is absent or filtered."""
    return index.query(h)


def save_index(index: SeedIndex, sink: BinaryIO) -> None:
    sink.write(
        _HEADER.pack(MAGIC, VERSION, index.k, index.w, index.map_bits, index.max_occ, len(index.names))
    )
    for name, start in zip(index.names, index.starts):
        raw = name.encode("utf-8")
        sink.write(_U32.pack(len(raw)))
        sink.write(raw)
        sink.write(_U64.pack(start))
    sink.write(_U64.pack(index.total_len))
    for arr in (index.map, index.key):
        sink.write(_U64.pack(len(arr)))
        sink.write(np.ascontiguousarray(arr, dtype="<u8").tobytes())


def _read_exact(source: BinaryIO, n: int, what: str) -> bytes:
    data = source.read(n)
    if len(data) != n:
        raise IndexFormatError(f"truncated index file while reading {what}")
    return data


def load_index(source: BinaryIO) -> SeedIndex:
    head = _read_exact(source, _HEADER.size, "header")
    magic, version, k, w, map_bits, max_occ, n_seq = _HEADER.unpack(head)
    if magic != MAGIC:
        raise IndexFormatError(f"bad magic {magic!r}, not an index file")
    if version != VERSION:
        raise IndexFormatError(f"unsupported index version {version} (expected {VERSION})")
    try:
        check_params(k, w, map_bits, max_occ)
    except ValueError as exc:
        raise IndexFormatError(f"invalid header: {exc}") from None
    names, starts = [], []
    for _ in range(n_seq):
        (name_len,) = _U32.unpack(_read_exact(source, 4, "name length"))
        names.append(_read_exact(source, name_len, "name").decode("utf-8"))
        (start,) = _U64.unpack(_read_exact(source, 8, "sequence start"))
        starts.append(start)
    (total_len,) = _U64.unpack(_read_exact(source, 8, "total length"))
    arrays = []
    for what in ("map", "key"):
        (n,) = _U64.unpack(_read_exact(source, 8, f"{what} length"))
        raw = _read_exact(source, n * ELEMENT_BYTES, f"{what} entries")
        arrays.append(np.frombuffer(raw, dtype="<u8").astype(np.uint64))
    map_arr, key_arr = arrays
    if len(map_arr) != (1 << map_bits) + 1:
        raise IndexFormatError(f"map has {len(map_arr)} entries, expected {(1 << map_bits) + 1}")
    if map_arr[0] != 0 or map_arr[-1] != len(key_arr):
        raise IndexFormatError("map offsets inconsistent with key array")
    return SeedIndex(k, w, map_bits, max_occ, names, starts, total_len, map_arr, key_arr)


def save_index_file(index: SeedIndex, path: str) -> None:
    with open(path, "wb") as fh:
        save_index(index, fh)


def load_index_file(path: str) -> SeedIndex:
    with open(path, "rb") as fh:
        return load_index(fh)


@dataclass(frozen=True)
class ShardPlan:
    """Tiling of the map and key arrays into capacity-bounded subarrays.

    Offsets and lengths count array elements; ``shard_capacity`` is in bytes.
    """

    shard_capacity: int
    map_shards: list[tuple[int, int]]
    key_shards: list[tuple[int, int]]


def tile(n_elements: int, elem_bytes: int, capacity: int) -> list[tuple[int, int]]:
    """Minimal tiling of ``n_elements`` into shards of at most ``capacity`` bytes."""
    if capacity < elem_bytes:
        raise CapacityError(f"shard capacity {capacity} B is smaller than one {elem_bytes} B element")
    per_shard = capacity // elem_bytes
    return [(off, min(per_shard, n_elements - off)) for off in range(0, n_elements, per_shard)]


def plan_shards(index: SeedIndex, shard_capacity: int, total_capacity: int | None = None) -> ShardPlan:
    """Partition both index arrays into shards of at most ``shard_capacity`` bytes.

    When ``total_capacity`` is given, plans whose shards would not fit in it
    are rejected instead of spilling.
    """
    plan = ShardPlan(
        shard_capacity=shard_capacity,
        map_shards=tile(len(index.map), ELEMENT_BYTES, shard_capacity),
        key_shards=tile(len(index.key), ELEMENT_BYTES, shard_capacity),
    )
    if total_capacity is not None:
        needed = (len(plan.map_shards) + len(plan.key_shards)) * shard_capacity
        if needed > total_capacity:
            raise CapacityError(
                f"index needs {len(plan.map_shards) + len(plan.key_shards)} shards "
                f"({needed} B), exceeding available {total_capacity} B"
            )
    return plan
