"""Mapping accuracy against known read origins.

A read counts as correct when its longest mapping (largest block length) hits
the true sequence and strand and overlaps the true interval by at least 10% of
the true interval's length.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .pafout import MAPQ_MISSING, PafRecord, read_paf

MIN_OVERLAP_FRACTION = 0.10


class TruthError(ValueError):
    pass


@dataclass(frozen=True)
class TruthInterval:
    read_id: str
    tname: str
    tstart: int
    tend: int
    strand: str

    def __post_init__(self) -> None:
        if self.tstart >= self.tend:
            raise TruthError(f"{self.read_id}: empty true interval [{self.tstart}, {self.tend})")
        if self.strand not in ("+", "-"):
            raise TruthError(f"{self.read_id}: bad strand {self.strand!r}")


def encode_read_name(tname: str, tstart: int, tend: int, strand: str, serial: int) -> str:
    return f"{tname}!{tstart}!{tend}!{strand}!{serial}"


def parse_read_name(read_id: str) -> TruthInterval:
    """Decode ``<tname>!<tstart>!<tend>!<strand>!<serial>``."""
    parts = read_id.rsplit("!", 4)
    if len(parts) != 5 or not parts[0]:
        raise TruthError(f"malformed truth-encoded read id {read_id!r}")
    tname, tstart, tend, strand, _serial = parts
    try:
        return TruthInterval(read_id, tname, int(tstart), int(tend), strand)
    except ValueError as exc:
        if isinstance(exc, TruthError):
            raise
        raise TruthError(f"malformed truth-encoded read id {read_id!r}") from None


def parse_truth(names: Iterable[str] | None = None, paf_lines: Iterable[str] | None = None) -> dict[str, TruthInterval]:
    """Truth intervals keyed by read id, from encoded names or a truth PAF."""
    if (names is None) == (paf_lines is None):
        raise ValueError("give exactly one of names or paf_lines")
    truth: dict[str, TruthInterval] = {}
    if names is not None:
        items: Iterable[TruthInterval] = (parse_read_name(n) for n in names)
    else:
        items = (
            TruthInterval(r.qname, r.tname, r.tstart, r.tend, r.strand) for r in read_paf(paf_lines)
        )
    for iv in items:
        if iv.read_id in truth:
            raise TruthError(f"duplicate truth for read {iv.read_id!r}")
        truth[iv.read_id] = iv
    return truth


def overlap(a_start: int, a_end: int, b_start: int, b_end: int) -> int:
    return max(0, min(a_end, b_end) - max(a_start, b_start))


def is_correct(rec: PafRecord, iv: TruthInterval, strict_strand: bool = True) -> bool:
    if rec.tname != iv.tname:
        return False
    if strict_strand and rec.strand != iv.strand:
        return False
    # integer form of overlap >= 0.10 * true length
    return 10 * overlap(rec.tstart, rec.tend, iv.tstart, iv.tend) >= iv.tend - iv.tstart


@dataclass(frozen=True)
class EvalRow:
    mapq_threshold: int
    mapped: int
    incorrect: int
    mapped_fraction: float
    error_rate: float


@dataclass
class EvalReport:
    rows: list[EvalRow]
    reads: int
    mapped: int
    correct: int

    def to_tsv(self) -> str:
        out = ["#mapq\tmapped_fraction\terror_rate\tmapped\tincorrect"]
        out += [
            f"{r.mapq_threshold}\t{r.mapped_fraction:.6f}\t{r.error_rate:.6f}\t{r.mapped}\t{r.incorrect}"
            for r in self.rows
        ]
        out.append(f"#reads={self.reads}\tmapped={self.mapped}\tcorrect={self.correct}")
        return "\n".join(out) + "\n"


def _best_by_read(records: Iterable[PafRecord]) -> dict[str, PafRecord]:
    best: dict[str, PafRecord] = {}
    for rec in records:
        if rec.is_unmapped:
            continue
        cur = best.get(rec.qname)
        # first record wins ties (records are written best-score first)
        if cur is None or rec.block_len > cur.block_len:
            best[rec.qname] = rec
    return best


def evaluate(
    records: Iterable[PafRecord],
    truth: dict[str, TruthInterval],
    total_reads: int | None = None,
    strict_strand: bool = True,
) -> EvalReport:
    """Cumulative (mapped fraction, error rate) rows from MAPQ 60 down to 0.

    Rows are emitted at every distinct MAPQ of the selected mappings plus 0.
    ``total_reads`` defaults to the number of truth intervals.
    """
    best = _best_by_read(records)
    missing = sorted(q for q in best if q not in truth)
    if missing:
        raise TruthError(f"no truth for mapped reads: {', '.join(missing[:10])}")
    if total_reads is None:
        total_reads = len(truth)
    if total_reads < len(best):
        raise ValueError(f"total_reads={total_reads} is below {len(best)} mapped reads")

    def level(mapq: int) -> int:
        return 0 if mapq == MAPQ_MISSING else min(mapq, 60)

    by_level: dict[int, list[int]] = {}
    correct_total = 0
    for qname, rec in best.items():
        ok = is_correct(rec, truth[qname], strict_strand)
        correct_total += ok
        tally = by_level.setdefault(level(rec.mapq), [0, 0])
        tally[0] += 1
        tally[1] += not ok
    rows = []
    mapped = incorrect = 0
    for t in sorted(set(by_level) | {0}, reverse=True):
        n, bad = by_level.get(t, (0, 0))
        mapped += n
        incorrect += bad
        rows.append(
            EvalRow(
                mapq_threshold=t,
                mapped=mapped,
                incorrect=incorrect,
                mapped_fraction=mapped / total_reads if total_reads else 0.0,
                error_rate=incorrect / mapped if mapped else 0.0,
            )
        )
    return EvalReport(rows=rows, reads=total_reads, mapped=len(best), correct=correct_total)


def evaluate_paf(
    paf_lines: Iterable[str],
    truth_paf_lines: Iterable[str] | None = None,
    total_reads: int | None = None,
    strict_strand: bool = True,
) -> EvalReport:
    """Evaluate PAF text; without a truth PAF, truth comes from the read names."""
    records = list(read_paf(paf_lines))
    if truth_paf_lines is None:
        names = sorted({r.qname for r in records})
        truth = parse_truth(names=names)
        if total_reads is None:
            total_reads = len(names)
    else:
        truth = parse_truth(paf_lines=truth_paf_lines)
    return evaluate(records, truth, total_reads, strict_strand)
