"""Anchor sorting and single-pass mapping-location voting."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numba
import numpy as np

from .seedquery import ANCHOR_DTYPE

SortAlgorithm = Literal["radix", "merge"]

MAPQ_MAX = 60


@numba.njit(cache=True)
def _lsd_passes(perm, keys, n_bytes):
    # stable counting sort on one 8-bit digit per pass, least significant first
    n = perm.shape[0]
    cur_keys = keys[perm]
    tmp_perm = np.empty_like(perm)
    tmp_keys = np.empty_like(cur_keys)
    count = np.empty(257, dtype=np.int64)
    for b in range(n_bytes):
        shift = np.uint64(8 * b)
        count[:] = 0
        for i in range(n):
            count[((cur_keys[i] >> shift) & np.uint64(0xFF)) + 1] += 1
        for d in range(256):
            count[d + 1] += count[d]
        for i in range(n):
            d = (cur_keys[i] >> shift) & np.uint64(0xFF)
            j = count[d]
            tmp_perm[j] = perm[i]
            tmp_keys[j] = cur_keys[i]
            count[d] = j + 1
        perm, tmp_perm = tmp_perm, perm
        cur_keys, tmp_keys = tmp_keys, cur_keys
    return perm


@numba.njit(cache=True)
def _merge_argsort(delta, read_pos):
    n = delta.shape[0]
    src = np.arange(n)
    dst = np.empty(n, dtype=src.dtype)
    width = 1
    while width < n:
        lo = 0
        while lo < n:
            mid = min(lo + width, n)
            hi = min(lo + 2 * width, n)
            i, j, o = lo, mid, lo
            while i < mid and j < hi:
                a, b = src[i], src[j]
                # take from the right run only when strictly smaller: stable
                if delta[b] < delta[a] or (delta[b] == delta[a] and read_pos[b] < read_pos[a]):
                    dst[o] = b
                    j += 1
                else:
                    dst[o] = a
                    i += 1
                o += 1
            while i < mid:
                dst[o] = src[i]
                i += 1
                o += 1
            while j < hi:
                dst[o] = src[j]
                j += 1
                o += 1
            lo = hi
        src, dst = dst, src
        width *= 2
    return src


def _biased(values: np.ndarray) -> tuple[np.ndarray, int]:
    # shift to unsigned; digits needed to cover the value range
    lo = int(values.min())
    span = int(values.max()) - lo
    return (values - lo).astype(np.uint64), max(1, (span.bit_length() + 7) // 8)


def sort_anchors(anchors: np.ndarray, algorithm: SortAlgorithm = "radix") -> np.ndarray:
    """Stable sort by ``(delta, read_pos)``."""
    anchors = np.asarray(anchors, dtype=ANCHOR_DTYPE)
    if len(anchors) < 2:
        return anchors.copy()
    delta = np.ascontiguousarray(anchors["delta"])
    read_pos = np.ascontiguousarray(anchors["read_pos"])
    if algorithm == "radix":
        perm = np.arange(len(anchors))
        rkey, rbytes = _biased(read_pos)
        perm = _lsd_passes(perm, rkey, rbytes)
        dkey, dbytes = _biased(delta)
        perm = _lsd_passes(perm, dkey, dbytes)
    elif algorithm == "merge":
        perm = _merge_argsort(delta, read_pos)
    else:
        raise ValueError(f"unknown sort algorithm {algorithm!r}")
    return anchors[perm]


@dataclass(frozen=True)
class SegmentPair:
    """Matched read/reference intervals (end exclusive, global ref offsets)."""

    read_start: int
    read_end: int
    ref_start: int
    ref_end: int
    strand: int
    score: int
    last_delta: int

    def rank_key(self) -> tuple[int, int, int, int, int]:
        # higher is better: score, then earlier ref_start; rest only makes the order total
        return (self.score, -self.ref_start, -self.strand, -self.read_start, -self.last_delta)


@dataclass(frozen=True)
class VoteParams:
    vt_dist: int
    min_score: int = 2
    min_len: int = 0
    max_segments: int = 5

    def __post_init__(self) -> None:
        if self.vt_dist < 0:
            raise ValueError("vt_dist must be >= 0")
        if self.max_segments < 1:
            raise ValueError("max_segments must be >= 1")


class UnsortedAnchorsError(ValueError):
    pass


# row layout of a closed segment: score, read_start, read_end, ref_start, ref_end, strand, last_delta
_SCORE, _RSTART, _REND, _FSTART, _FEND, _STRAND, _LAST = range(7)


@numba.njit(cache=True)
def _outranks(a, b):
    # rank order: higher score, then lower ref_start, strand, read_start, last_delta
    if a[_SCORE] != b[_SCORE]:
        return a[_SCORE] > b[_SCORE]
    for f in (_FSTART, _STRAND, _RSTART, _LAST):
        if a[f] != b[f]:
            return a[f] < b[f]
    return False


@numba.njit(cache=True)
def _offer(best, n_best, sp, strand, min_score, min_len, k):
    # sp: score, read_min, read_max, ref_min, ref_max, last_delta
    if sp[0] < min_score or sp[2] + k - sp[1] < min_len:
        return n_best
    cand = np.empty(7, dtype=np.int64)
    cand[_SCORE] = sp[0]
    cand[_RSTART] = sp[1]
    cand[_REND] = sp[2] + k
    cand[_FSTART] = sp[3]
    cand[_FEND] = sp[4] + k
    cand[_STRAND] = strand
    cand[_LAST] = sp[5]
    if n_best < best.shape[0]:
        best[n_best] = cand
        return n_best + 1
    worst = 0
    for j in range(1, n_best):
        if _outranks(best[worst], best[j]):
            worst = j
    if _outranks(cand, best[worst]):
        best[worst] = cand
    return n_best


@numba.njit(cache=True)
def _vote_scan(delta, read_pos, strand, vt_dist, min_score, min_len, cap, k):
    best = np.empty((cap, 7), dtype=np.int64)
    n_best = 0
    open_sp = np.zeros((2, 6), dtype=np.int64)  # score 0 marks no open segment
    for i in range(delta.shape[0]):
        d = delta[i]
        if i > 0 and d < delta[i - 1]:
            return best[:0], i
        r = read_pos[i]
        s = strand[i]
        ref = d + r if s == 0 else d - r
        sp = open_sp[s]
        if sp[0] > 0 and d <= sp[5] + vt_dist:
            sp[0] += 1
            sp[1] = min(sp[1], r)
            sp[2] = max(sp[2], r)
            sp[3] = min(sp[3], ref)
            sp[4] = max(sp[4], ref)
            sp[5] = d
        else:
            if sp[0] > 0:
                n_best = _offer(best, n_best, sp, s, min_score, min_len, k)
            sp[0] = 1
            sp[1] = r
            sp[2] = r
            sp[3] = ref
            sp[4] = ref
            sp[5] = d
    for s in range(2):
        if open_sp[s, 0] > 0:
            n_best = _offer(best, n_best, open_sp[s], s, min_score, min_len, k)
    return best[:n_best], -1


def vote(anchors: np.ndarray, params: VoteParams, k: int) -> list[SegmentPair]:
    """Group delta-sorted anchors into per-strand segment pairs in one pass.

    An anchor extends the open segment of its strand when its delta is within
    ``vt_dist`` of the last absorbed delta; otherwise that segment is offered
    to a best list bounded at ``max_segments`` and a new one starts. Returns
    the best list by descending rank.
    """
    best, bad = _vote_scan(
        np.ascontiguousarray(anchors["delta"], dtype=np.int64),
        np.ascontiguousarray(anchors["read_pos"], dtype=np.int64),
        np.ascontiguousarray(anchors["strand"], dtype=np.int64),
        params.vt_dist, params.min_score, params.min_len, params.max_segments, k,
    )
    if bad >= 0:
        d = anchors["delta"]
        raise UnsortedAnchorsError(f"anchors not sorted by delta ({d[bad]} after {d[bad - 1]})")
    segs = [
        SegmentPair(rs, re, fs, fe, strand, score, last)
        for score, rs, re, fs, fe, strand, last in best.tolist()
    ]
    return sorted(segs, key=SegmentPair.rank_key, reverse=True)


def assign_mapq(segments: list[SegmentPair]) -> list[tuple[SegmentPair, int]]:
    """Best segment gets ``60 * (s1 - s2) / s1`` rounded half up; others get 0."""
    if not segments:
        return []
    s1 = segments[0].score
    s2 = segments[1].score if len(segments) > 1 else 0
    mapq = (2 * MAPQ_MAX * (s1 - s2) + s1) // (2 * s1) if s1 > 0 else 0
    mapq = max(0, min(MAPQ_MAX, mapq))
    return [(segments[0], mapq)] + [(seg, 0) for seg in segments[1:]]
