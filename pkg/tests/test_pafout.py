import pytest
from hypothesis import given
from hypothesis import strategies as st

from seedvote.pafout import PafRecord, read_paf, to_paf, unmapped_record
from seedvote.seqio import EncodedReference
from seedvote.vote import SegmentPair

import numpy as np

REF = EncodedReference(["chrA", "chrB"], [0, 1_000_000], 1_500_000, np.zeros(0, dtype=np.uint8))


def seg(read_start, read_end, ref_start, ref_end, strand=0, score=3):
    return SegmentPair(read_start, read_end, ref_start, ref_end, strand, score, 0)


def test_second_sequence_coordinates():
    (rec,) = to_paf("r", 600, [(seg(0, 500, 1_000_500, 1_001_000), 60)], REF, 15)
    assert rec.tname == "chrB"
    assert rec.tstart == 500 and rec.tend == 1_000
    assert rec.tlen == 500_000
    assert rec.tstart + REF.starts[1] == 1_000_500


def test_unmapped_read_no_records():
    assert to_paf("r", 100, [], REF, 15) == []


def test_match_and_block_columns():
    (rec,) = to_paf("r", 1_000, [(seg(100, 300, 5_000, 5_180, score=3), 7)], REF, 15)
    assert rec.n_match == 45
    assert rec.block_len == 200
    assert rec.mapq == 7
    assert rec.strand == "+"


def test_n_match_capped_by_block():
    (rec,) = to_paf("r", 1_000, [(seg(0, 40, 0, 40, score=10), 0)], REF, 15)
    assert rec.n_match == 40


def test_boundary_straddling_dropped():
    recs = to_paf("r", 2_000, [(seg(0, 1_000, 999_500, 1_000_500), 0), (seg(0, 100, 10, 110, 1), 0)], REF, 15)
    assert [r.strand for r in recs] == ["-"]


def test_records_ordered_by_score():
    recs = to_paf("r", 2_000, [(seg(0, 100, 10, 110, score=2), 0), (seg(0, 100, 500, 600, score=9), 40)], REF, 15)
    assert [r.mapq for r in recs] == [40, 0]


def test_line_round_trip():
    (rec,) = to_paf("read/1", 600, [(seg(0, 500, 1_000_500, 1_001_000, strand=1), 60)], REF, 15)
    line = rec.to_line()
    assert len(line.split("\t")) == 12
    assert PafRecord.from_line(line + "\n") == rec


def test_unmapped_sentinel_line():
    rec = unmapped_record("r9", 77)
    assert rec.is_unmapped
    assert rec.to_line() == "r9\t77\t0\t0\t*\t*\t0\t0\t0\t0\t0\t0"


def test_read_paf_errors_name_line():
    lines = ["r\t10\t0\t10\t+\tc\t100\t0\t10\t10\t10\t60\n", "broken\tline\n"]
    with pytest.raises(ValueError, match="line 2"):
        list(read_paf(lines))


def test_extra_tags_tolerated():
    rec = PafRecord.from_line("r\t10\t0\t10\t+\tc\t100\t0\t10\t10\t10\t60\ttp:A:P\n")
    assert rec.mapq == 60


@given(
    start=st.integers(0, 1_499_000),
    span=st.integers(1, 900),
    qspan=st.integers(1, 900),
    strand=st.integers(0, 1),
    score=st.integers(1, 100),
    mapq=st.integers(0, 60),
)
def test_records_parse_back(start, span, qspan, strand, score, mapq):
    s = seg(0, qspan, start, start + span, strand, score)
    for rec in to_paf("q", 1_000, [(s, mapq)], REF, 15):
        assert PafRecord.from_line(rec.to_line()) == rec
        assert 0 <= rec.qstart < rec.qend <= rec.qlen
        assert rec.tstart < rec.tend <= rec.tlen
        assert rec.n_match <= rec.block_len
        assert REF.starts[REF.names.index(rec.tname)] + rec.tstart == start
