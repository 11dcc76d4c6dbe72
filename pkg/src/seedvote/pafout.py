"""PAF rendering of segment pairs.

``n_match`` is implementation-defined: ``min(score * k, block_len)``, i.e. the
bases covered by voting k-mers, capped by the block length.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from typing import Any, Iterable, Iterator

from .seedquery import FORWARD
from .vote import SegmentPair

MAPQ_MISSING = 255


@dataclass(frozen=True)
class PafRecord:
    qname: str
    qlen: int
    qstart: int
    qend: int
    strand: str
    tname: str
    tlen: int
    tstart: int
    tend: int
    n_match: int
    block_len: int
    mapq: int

    @property
    def is_unmapped(self) -> bool:
        return self.strand == "*"

    def to_line(self) -> str:
        return "\t".join(
            str(v)
            for v in (
                self.qname, self.qlen, self.qstart, self.qend, self.strand, self.tname,
                self.tlen, self.tstart, self.tend, self.n_match, self.block_len, self.mapq,
            )
        )

    @classmethod
    def from_line(cls, line: str) -> PafRecord:
        f = line.rstrip("\r\n").split("\t")
        if len(f) < 12:
            raise ValueError(f"PAF line has {len(f)} fields, need at least 12")
        return cls(
            f[0], int(f[1]), int(f[2]), int(f[3]), f[4], f[5],
            int(f[6]), int(f[7]), int(f[8]), int(f[9]), int(f[10]), int(f[11]),
        )


def unmapped_record(qname: str, qlen: int) -> PafRecord:
    return PafRecord(qname, qlen, 0, 0, "*", "*", 0, 0, 0, 0, 0, 0)


def to_paf(
    read_id: str,
    read_len: int,
    segments: Iterable[tuple[SegmentPair, int]],
    ref: Any,
    k: int,
) -> list[PafRecord]:
    """Convert scored segments of one read to PAF records.

    ``ref`` needs ``names``, ``starts`` and ``total_len`` (an ``EncodedReference``
    or a ``SeedIndex``). Segments crossing a sequence boundary are dropped.
    """
    starts = ref.starts
    ends = starts[1:] + [ref.total_len]
    records = []
    for seg, mapq in sorted(segments, key=lambda sm: sm[0].rank_key(), reverse=True):
        i = bisect_right(starts, seg.ref_start) - 1
        if i < 0 or seg.ref_end > ends[i]:
            continue
        tlen = ends[i] - starts[i]
        qspan = seg.read_end - seg.read_start
        tspan = seg.ref_end - seg.ref_start
        block = max(qspan, tspan)
        records.append(
            PafRecord(
                qname=read_id,
                qlen=read_len,
                qstart=seg.read_start,
                qend=min(seg.read_end, read_len),
                strand="+" if seg.strand == FORWARD else "-",
                tname=ref.names[i],
                tlen=tlen,
                tstart=seg.ref_start - starts[i],
                tend=seg.ref_end - starts[i],
                n_match=min(seg.score * k, block),
                block_len=block,
                mapq=mapq,
            )
        )
    return records


def read_paf(lines: Iterable[str]) -> Iterator[PafRecord]:
    """Parse PAF lines; errors carry the 1-based line number."""
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            yield PafRecord.from_line(line)
        except ValueError as exc:
            raise ValueError(f"line {lineno}: unparseable PAF record: {exc}") from None
