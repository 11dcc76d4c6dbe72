import io
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from seedvote.index import SeedIndex, build_index  # noqa: E402
from seedvote.pipeline import PipelineConfig, run  # noqa: E402
from seedvote.presets import get_preset  # noqa: E402
from seedvote.seqio import parse_reference  # noqa: E402
from seedvote.vote import VoteParams  # noqa: E402

from sim import fasta, fastq, random_reference, repeat_reference, simulate_reads  # noqa: E402

_VERDICTS = pytest.StashKey[list]()


@dataclass
class Dataset:
    ref_text: dict[str, str]
    reads: list[tuple[str, str]]
    fastq: str
    index: SeedIndex


def map_text(index: SeedIndex, fastq_text: str, **kwargs) -> tuple[str, object]:
    preset = kwargs.pop("preset", None)
    params = kwargs.pop("vote_params", None)
    if params is None:
        params = VoteParams(preset.vt_dist if preset else 500)
    kwargs.setdefault("batch_capacity", preset.batch_capacity if preset else 1_000_000)
    if preset is not None:
        kwargs.setdefault("sort_algorithm", preset.sort_algorithm)
    config = PipelineConfig(vote_params=params, preset=preset, **kwargs)
    out = io.StringIO()
    stats = run(config, index, [io.StringIO(fastq_text)], out)
    return out.getvalue(), stats


def _index(ref_text, k, w, max_occ, map_bits=None):
    ref = parse_reference(io.StringIO(fasta(ref_text)))
    return build_index(ref, k, w, map_bits=map_bits, max_occ=max_occ)


@pytest.fixture(scope="session")
def exact_dataset() -> Dataset:
    """1 Mbp random reference, 1000 error-free reads, ONT1 index."""
    rng = np.random.default_rng(2024)
    ref_text = random_reference(rng)
    reads = simulate_reads(rng, ref_text, 1_000)
    p = get_preset("ont1")
    return Dataset(ref_text, reads, fastq(reads), _index(ref_text, p.k, p.w, p.max_occ))


@pytest.fixture(scope="session")
def noisy_dataset() -> Dataset:
    """1 Mbp reference with planted repeat families, 1000 reads at 5% edits, HiFi3 index."""
    rng = np.random.default_rng(77)
    ref_text = repeat_reference(rng)
    reads = simulate_reads(rng, ref_text, 1_000, error_rate=0.05)
    p = get_preset("hifi3")
    return Dataset(ref_text, reads, fastq(reads), _index(ref_text, p.k, p.w, p.max_occ))


@pytest.fixture(scope="session")
def index_for():
    return _index


@pytest.fixture
def verdict(request):
    """Record one PASS/FAIL line per acceptance criterion."""
    lines = request.config.stash.setdefault(_VERDICTS, [])
    recorded = []

    def record(number: int, title: str, ok: bool, detail: str) -> None:
        line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}: {title} ({detail})"
        recorded.append(line)
        lines.append(line)
        print(line)
        assert ok, line

    yield record
    if not recorded:
        lines.append(f"criterion ?? FAIL: {request.node.name} (did not complete)")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_VERDICTS, [])
    if lines:
        terminalreporter.section("acceptance")
        for line in sorted(lines):
            terminalreporter.write_line(line)
