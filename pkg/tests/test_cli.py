import gzip

import numpy as np
import pytest

from seedvote.cli import build_parser, main
from seedvote.index import load_index_file
from seedvote.presets import MBP, PRESETS, get_preset

from sim import fasta, fastq, random_reference, simulate_reads


@pytest.fixture(scope="module")
def files(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    rng = np.random.default_rng(8)
    ref_text = random_reference(rng, (30_000, 20_000))
    reads = simulate_reads(rng, ref_text, 60, 300, 1_200)
    (root / "ref.fa").write_text(fasta(ref_text))
    with gzip.open(root / "reads.fq.gz", "wt") as fh:
        fh.write(fastq(reads))
    assert main(["index", str(root / "ref.fa"), str(root / "ont.idx"), "--preset", "ont1", "--map-bits", "20"]) == 0
    return root


def test_preset_table():
    assert len(PRESETS) == 9
    ont1 = get_preset("ont1")
    assert (ont1.k, ont1.w, ont1.max_occ, ont1.vt_dist) == (15, 10, 10, 950)
    hifi1 = get_preset("HIFI1")
    assert (hifi1.k, hifi1.w, hifi1.max_occ, hifi1.vt_dist) == (19, 19, 1, 5_000)
    ilmn2 = get_preset("ilmn2")
    assert (ilmn2.max_occ, ilmn2.vt_dist, ilmn2.batch_capacity) == (150, 10, 32 * MBP)
    assert ont1.sort_algorithm == "radix" and hifi1.sort_algorithm == "merge"
    with pytest.raises(ValueError, match="ont9"):
        get_preset("ont9")


def test_index_uses_preset(files):
    index = load_index_file(files / "ont.idx")
    assert (index.k, index.w, index.max_occ, index.map_bits) == (15, 10, 10, 20)
    assert index.names == ["chr1", "chr2"]


def test_index_explicit_params(tmp_path):
    (tmp_path / "toy.fa").write_text(">s\nACGTACGTACGT\n")
    out = tmp_path / "toy.idx"
    assert main(["index", str(tmp_path / "toy.fa"), str(out), "--k", "3", "--w", "2", "--max-occ", "100"]) == 0
    index = load_index_file(out)
    assert (index.k, index.w, index.map_bits) == (3, 2, 6)
    assert len(index.key) == 7


def test_index_partial_flags(tmp_path, capsys):
    (tmp_path / "toy.fa").write_text(">s\nACGT\n")
    assert main(["index", str(tmp_path / "toy.fa"), str(tmp_path / "x.idx"), "--k", "3"]) == 1
    assert "--max-occ are required" in capsys.readouterr().err


def test_index_bad_fasta(tmp_path, capsys):
    (tmp_path / "bad.fa").write_text("ACGT\n>s\nACGT\n")
    assert main(["index", str(tmp_path / "bad.fa"), str(tmp_path / "x.idx"), "--preset", "ont1"]) == 1
    assert "line 1" in capsys.readouterr().err


def test_map_is_reproducible(files, capsys):
    argv = ["map", str(files / "ont.idx"), str(files / "reads.fq.gz"), "--preset", "ont1", "--threads", "1", "--ordered"]
    assert main(argv) == 0
    first = capsys.readouterr()
    assert main(argv) == 0
    second = capsys.readouterr()
    assert first.out == second.out and first.out.count("\n") >= 60
    assert "reads=60" in first.err.splitlines()


def test_map_then_eval(files, capsys, tmp_path):
    assert main(["map", str(files / "ont.idx"), str(files / "reads.fq.gz"), "--preset", "ont1", "--threads", "3",
                 "--kernel-workers", "2"]) == 0
    paf = tmp_path / "out.paf"
    paf.write_text(capsys.readouterr().out)
    assert main(["eval", str(paf)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "#mapq\tmapped_fraction\terror_rate\tmapped\tincorrect"
    zero = next(line for line in lines if line.startswith("0\t")).split("\t")
    assert float(zero[1]) == 1.0 and float(zero[2]) == 0.0


def test_map_without_preset(files, capsys):
    argv = ["map", str(files / "ont.idx"), str(files / "reads.fq.gz")]
    assert main(argv + ["--vt-dist", "950"]) == 1
    assert "--batch-size are required" in capsys.readouterr().err
    assert main(argv + ["--vt-dist", "950", "--batch-size", "0.5", "--sort", "merge"]) == 0
    assert capsys.readouterr().out.count("\n") >= 60


def test_map_rejects_max_occ(files, capsys):
    argv = ["map", str(files / "ont.idx"), str(files / "reads.fq.gz"), "--preset", "ont1", "--max-occ", "5"]
    assert main(argv) == 1
    assert "index" in capsys.readouterr().err


def test_map_preset_mismatch(files, capsys):
    argv = ["map", str(files / "ont.idx"), str(files / "reads.fq.gz"), "--preset", "hifi2"]
    assert main(argv) == 1
    err = capsys.readouterr().err
    assert "k=19, w=19" in err and "k=15, w=10" in err


def test_map_max_occ_drift_warns(files, capsys, caplog):
    argv = ["map", str(files / "ont.idx"), str(files / "reads.fq.gz"), "--preset", "ont2"]
    assert main(argv) == 0
    assert "max_occ=50" in caplog.text


def test_missing_index(tmp_path, capsys):
    assert main(["map", str(tmp_path / "nope.idx"), "-", "--preset", "ont1"]) == 1
    assert "error" in capsys.readouterr().err


def test_help_shows_defaults(capsys):
    with pytest.raises(SystemExit):
        build_parser().parse_args(["map", "--help"])
    text = capsys.readouterr().out
    assert "--max-occ" not in text
    assert "(default: 5)" in text and "(default: auto)" in text
