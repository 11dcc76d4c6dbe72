"""Batch pipeline: parse -> seed/query/adjust -> sort -> vote -> PAF.

A producer thread parses batches and hands each to one of ``kernel_workers``
kernel threads (seed extraction, index querying, delta computation). Kernel
output is split into read chunks processed by a pool of ``threads`` workers
(sort, vote, PAF formatting). The calling thread is the only writer. A
semaphore caps batches in flight beyond the parser at ``kernel_workers``.
"""

from __future__ import annotations

import logging
import queue
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from typing import IO, Iterable

import numpy as np

from .index import SeedIndex
from .pafout import to_paf, unmapped_record
from .presets import Preset
from .seedquery import extract_minimizers, generate_anchors
from .seqio import ReadBatch, ReadMeta, read_batches
from .vote import SortAlgorithm, VoteParams, assign_mapq, sort_anchors, vote

log = logging.getLogger(__name__)


@dataclass
class PipelineConfig:
    vote_params: VoteParams
    batch_capacity: int
    threads: int = 1
    kernel_workers: int = 1
    sort_algorithm: SortAlgorithm = "radix"
    ordered_output: bool = True
    emit_unmapped: bool = False
    chunk_reads: int = 64
    preset: Preset | None = None

    def __post_init__(self) -> None:
        if self.threads < 1 or self.kernel_workers < 1:
            raise ValueError("threads and kernel_workers must be >= 1")
        if self.batch_capacity <= 0:
            raise ValueError("batch capacity must be positive")
        if self.chunk_reads < 1:
            raise ValueError("chunk_reads must be >= 1")


@dataclass
class RunStats:
    reads: int = 0
    batches: int = 0
    anchors: int = 0
    segments: int = 0
    records: int = 0
    parse_time: float = 0.0
    kernel_time: float = 0.0
    sort_time: float = 0.0
    vote_time: float = 0.0
    paf_time: float = 0.0
    write_time: float = 0.0
    wall_time: float = 0.0

    def add(self, other: RunStats) -> None:
        for f in fields(self):
            setattr(self, f.name, getattr(self, f.name) + getattr(other, f.name))

    def lines(self) -> list[str]:
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            out.append(f"{f.name}={v:.6f}" if isinstance(v, float) else f"{f.name}={v}")
        return out


@dataclass
class _Chunk:
    seq: int
    index: int
    n_chunks: int
    text: str
    stats: RunStats = field(default_factory=RunStats)


class PipelineError(RuntimeError):
    pass


def kernel(batch: ReadBatch, index: SeedIndex) -> list[np.ndarray]:
    """Anchors for every read of ``batch``, in read order."""
    k, w, bits = index.k, index.w, index.map_bits
    return [
        generate_anchors(extract_minimizers(batch.read(i), k, w, bits), index)
        for i in range(len(batch))
    ]


def map_reads(
    metas: list[ReadMeta], anchor_lists: list[np.ndarray], index: SeedIndex, config: PipelineConfig
) -> tuple[str, RunStats]:
    stats = RunStats()
    out = []
    for meta, anchors in zip(metas, anchor_lists):
        t0 = time.perf_counter()
        ordered = sort_anchors(anchors, config.sort_algorithm)
        t1 = time.perf_counter()
        segments = vote(ordered, config.vote_params, index.k)
        t2 = time.perf_counter()
        records = to_paf(meta.read_id, meta.read_len, assign_mapq(segments), index, index.k)
        if not records and config.emit_unmapped:
            records = [unmapped_record(meta.read_id, meta.read_len)]
        out.extend(r.to_line() + "\n" for r in records)
        t3 = time.perf_counter()
        stats.sort_time += t1 - t0
        stats.vote_time += t2 - t1
        stats.paf_time += t3 - t2
        stats.anchors += len(anchors)
        stats.segments += len(segments)
        stats.records += sum(not r.is_unmapped for r in records)
    stats.reads = len(metas)
    return "".join(out), stats


def run(
    config: PipelineConfig,
    index: SeedIndex,
    sources: Iterable[Iterable[str | bytes]],
    sink: IO[str],
) -> RunStats:
    """Map every read of ``sources`` and write PAF lines to ``sink``."""
    if config.preset is not None and (config.preset.k, config.preset.w) != (index.k, index.w):
        raise ValueError(
            f"preset {config.preset.name} has k={config.preset.k}, w={config.preset.w} "
            f"but index has k={index.k}, w={index.w}"
        )
    start = time.perf_counter()
    stats = RunStats()
    results: queue.Queue = queue.Queue()
    inflight = threading.Semaphore(config.kernel_workers)
    stop = threading.Event()
    kernel_pool = ThreadPoolExecutor(config.kernel_workers, thread_name_prefix="kernel")
    post_pool = ThreadPoolExecutor(config.threads, thread_name_prefix="post")

    def post_task(seq: int, ci: int, n_chunks: int, metas, anchor_lists) -> None:
        try:
            text, st = map_reads(metas, anchor_lists, index, config)
            results.put(("chunk", _Chunk(seq, ci, n_chunks, text, st)))
        except BaseException as exc:  # noqa: BLE001 - forwarded to the writer
            results.put(("error", exc))

    def kernel_task(seq: int, batch: ReadBatch) -> None:
        try:
            t0 = time.perf_counter()
            anchors = kernel(batch, index)
            results.put(("kernel", time.perf_counter() - t0))
            step = config.chunk_reads
            bounds = range(0, max(len(batch), 1), step)
            for ci, lo in enumerate(bounds):
                post_pool.submit(
                    post_task, seq, ci, len(bounds), batch.metadata[lo : lo + step], anchors[lo : lo + step]
                )
        except BaseException as exc:  # noqa: BLE001
            results.put(("error", exc))

    def produce() -> None:
        seq = 0
        parse_time = 0.0
        try:
            for source in sources:
                batches = read_batches(source, config.batch_capacity)
                while True:
                    t0 = time.perf_counter()
                    batch = next(batches, None)
                    parse_time += time.perf_counter() - t0
                    if batch is None:
                        break
                    while not inflight.acquire(timeout=0.05):
                        if stop.is_set():
                            return
                    if stop.is_set():
                        return
                    kernel_pool.submit(kernel_task, seq, batch)
                    seq += 1
            results.put(("done", seq, parse_time))
        except BaseException as exc:  # noqa: BLE001
            results.put(("error", exc))

    producer = threading.Thread(target=produce, name="parser", daemon=True)
    producer.start()
    try:
        _write_loop(results, inflight, config.ordered_output, sink, stats)
    except BaseException:
        stop.set()
        raise
    finally:
        producer.join()
        kernel_pool.shutdown(wait=True, cancel_futures=True)
        post_pool.shutdown(wait=True, cancel_futures=True)
    stats.wall_time = time.perf_counter() - start
    return stats


def _write_loop(
    results: queue.Queue, inflight: threading.Semaphore, ordered: bool, sink: IO[str], stats: RunStats
) -> None:
    total_batches: int | None = None
    finished = 0
    # ordered mode: seq -> {chunk index: text}; unordered: seq -> chunks written
    buffered: dict[int, dict[int, str]] = {}
    expected: dict[int, int] = {}
    written: dict[int, int] = {}
    next_seq = 0

    def emit(text: str) -> None:
        if not text:
            return
        t0 = time.perf_counter()
        try:
            sink.write(text)
        except OSError as exc:
            log.warning("output write failed; PAF output is partial")
            raise PipelineError(f"sink write failed: {exc}") from exc
        stats.write_time += time.perf_counter() - t0

    while total_batches is None or finished < total_batches:
        msg = results.get()
        kind = msg[0]
        if kind == "error":
            raise msg[1]
        if kind == "done":
            total_batches, stats.parse_time = msg[1], msg[2]
            stats.batches = total_batches
            continue
        if kind == "kernel":
            stats.kernel_time += msg[1]
            continue
        chunk: _Chunk = msg[1]
        stats.add(chunk.stats)
        if ordered:
            buffered.setdefault(chunk.seq, {})[chunk.index] = chunk.text
            expected[chunk.seq] = chunk.n_chunks
            while next_seq in buffered and len(buffered[next_seq]) == expected[next_seq]:
                parts = buffered.pop(next_seq)
                del expected[next_seq]
                emit("".join(parts[i] for i in range(len(parts))))
                inflight.release()
                finished += 1
                next_seq += 1
        else:
            emit(chunk.text)
            written[chunk.seq] = written.get(chunk.seq, 0) + 1
            if written[chunk.seq] == chunk.n_chunks:
                del written[chunk.seq]
                inflight.release()
                finished += 1
