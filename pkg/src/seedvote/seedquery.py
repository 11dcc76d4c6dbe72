"""Minimizer extraction, index lookup and anchor generation for reads.

Anchors carry the adjusted location ``delta``: ``ref_pos - read_pos`` on the
forward strand and ``ref_pos + read_pos`` on the reverse strand, so that
collinear matches share one value in both orientations.
"""

from __future__ import annotations

from typing import TYPE_CHECKING, NamedTuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

if TYPE_CHECKING:
    from .index import SeedIndex

FORWARD, REVERSE = 0, 1

MAX_K = 28
# marks k-mers containing N/E; no canonical k-mer below 2**56 mixes to this value
INVALID_HASH = np.uint64(0xFFFFFFFFFFFFFFFF)

SEED_DTYPE = np.dtype([("hash", "<u8"), ("pos", "<i8"), ("strand", "u1")])
ANCHOR_DTYPE = np.dtype([("delta", "<i8"), ("read_pos", "<i8"), ("strand", "u1")])


class Anchor(NamedTuple):
    delta: int
    read_pos: int
    strand: int


def mix64(x: np.ndarray) -> np.ndarray:
    """Invertible 64-bit integer finalizer, applied elementwise (wrapping)."""
    h = np.asarray(x, dtype=np.uint64)
    h = ~h + (h << np.uint64(21))
    h = h ^ (h >> np.uint64(24))
    h = h + (h << np.uint64(3)) + (h << np.uint64(8))
    h = h ^ (h >> np.uint64(14))
    h = h + (h << np.uint64(2)) + (h << np.uint64(4))
    h = h ^ (h >> np.uint64(28))
    h = h + (h << np.uint64(31))
    return h


def kmer_hashes(seq: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Mixed canonical hash and strand bit for every k-mer start of ``seq``.

    Returns ``(hashes, strands)`` of length ``len(seq) - k + 1``. K-mers with a
    symbol outside ACGT get ``INVALID_HASH``. The strand bit is 1 when the
    reverse complement is strictly smaller than the forward encoding.
    """
    if not 1 <= k <= MAX_K:
        raise ValueError(f"k must be in [1, {MAX_K}], got {k}")
    seq = np.asarray(seq, dtype=np.uint8)
    nk = len(seq) - k + 1
    if nk <= 0:
        return np.zeros(0, dtype=np.uint64), np.zeros(0, dtype=np.uint8)
    bad = seq > 3
    sym = np.where(bad, 0, seq).astype(np.uint64)
    comp = np.uint64(3) - sym
    fwd = np.zeros(nk, dtype=np.uint64)
    rev = np.zeros(nk, dtype=np.uint64)
    for j in range(k):
        fwd = (fwd << np.uint64(2)) | sym[j : j + nk]
        rev |= comp[j : j + nk] << np.uint64(2 * j)
    strands = (rev < fwd).astype(np.uint8)
    hashes = mix64(np.minimum(fwd, rev))
    nbad = np.concatenate(([0], np.cumsum(bad, dtype=np.int64)))
    invalid = (nbad[k:] - nbad[:-k]) > 0
    hashes[invalid] = INVALID_HASH
    return hashes, strands


def extract_minimizers(
    seq: np.ndarray, k: int, w: int, map_bits: int | None = None
) -> np.ndarray:
    """Return the (k, w)-minimizers of ``seq`` as a ``SEED_DTYPE`` array.

    Each window spans ``w`` consecutive k-mer starts. The valid k-mer with the
    smallest full 64-bit hash wins, leftmost on ties; windows holding no valid
    k-mer contribute nothing. Positions are unique and ascending. With
    ``map_bits`` set, the emitted hash is truncated to that many low bits.
    """
    if w < 1:
        raise ValueError(f"w must be >= 1, got {w}")
    hashes, strands = kmer_hashes(seq, k)
    if len(hashes) < w:
        return np.zeros(0, dtype=SEED_DTYPE)
    win = sliding_window_view(hashes, w)
    pick = win.argmin(axis=1) + np.arange(len(win))
    pick = pick[hashes[pick] != INVALID_HASH]
    if len(pick) > 1:
        # window winners move monotonically, so duplicates are adjacent
        pick = pick[np.concatenate(([True], pick[1:] != pick[:-1]))]
    out = np.empty(len(pick), dtype=SEED_DTYPE)
    h = hashes[pick]
    if map_bits is not None:
        h = h & np.uint64((1 << map_bits) - 1)
    out["hash"] = h
    out["pos"] = pick
    out["strand"] = strands[pick]
    return out


def generate_anchors(seeds: np.ndarray, index: SeedIndex) -> np.ndarray:
    """Look every seed up in ``index`` and emit one anchor per location.

    ``seeds["hash"]`` must already be truncated to ``index.map_bits``.
    Output order is seed order, then location order within a bucket.
    """
    if len(seeds) == 0:
        return np.zeros(0, dtype=ANCHOR_DTYPE)
    h = seeds["hash"].astype(np.int64)
    lo = index.map[h].astype(np.int64)
    hi = index.map[h + 1].astype(np.int64)
    counts = hi - lo
    total = int(counts.sum())
    out = np.empty(total, dtype=ANCHOR_DTYPE)
    if total == 0:
        return out
    seed_of = np.repeat(np.arange(len(seeds)), counts)
    first = np.cumsum(counts) - counts
    key_idx = np.arange(total) - np.repeat(first, counts) + np.repeat(lo, counts)
    loc = index.key[key_idx]
    ref_pos = (loc >> np.uint64(1)).astype(np.int64)
    loc_strand = (loc & np.uint64(1)).astype(np.uint8)
    read_pos = seeds["pos"][seed_of]
    strand = seeds["strand"][seed_of] ^ loc_strand
    out["delta"] = np.where(strand == FORWARD, ref_pos - read_pos, ref_pos + read_pos)
    out["read_pos"] = read_pos
    out["strand"] = strand
    return out


def anchor_ref_pos(anchors: np.ndarray) -> np.ndarray:
    """Recover reference positions from anchors."""
    return np.where(
        anchors["strand"] == FORWARD,
        anchors["delta"] + anchors["read_pos"],
        anchors["delta"] - anchors["read_pos"],
    )
