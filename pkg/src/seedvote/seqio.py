"""FASTA/FASTQ parsing, symbol encoding and read batching."""

from __future__ import annotations

import gzip
import io
import sys
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator

import numpy as np

A, C, G, T, N, E = 0, 1, 2, 3, 4, 5

# byte -> symbol code; anything that is not ACGT (either case) becomes N
_ENCODE = np.full(256, N, dtype=np.uint8)
for _i, _b in enumerate(b"ACGT"):
    _ENCODE[_b] = _i
    _ENCODE[_b + 32] = _i
_DECODE = np.frombuffer(b"ACGTNE", dtype=np.uint8)


class ParseError(ValueError):
    """Malformed sequence input."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def encode(seq: str | bytes) -> np.ndarray:
    """Encode a nucleotide string to symbol codes (A=0 .. T=3, other=4)."""
    if isinstance(seq, str):
        seq = seq.encode("ascii")
    return _ENCODE[np.frombuffer(seq, dtype=np.uint8)]


def decode(symbols: np.ndarray) -> str:
    return _DECODE[np.asarray(symbols, dtype=np.uint8)].tobytes().decode("ascii")


def open_input(path: str) -> IO[bytes]:
    """Open a plain or gzip-compressed file in binary mode; '-' is stdin."""
    if path == "-":
        raw = sys.stdin.buffer
    else:
        raw = open(path, "rb")
    buffered = io.BufferedReader(raw) if not hasattr(raw, "peek") else raw
    if buffered.peek(2)[:2] == b"\x1f\x8b":
        return gzip.GzipFile(fileobj=buffered, mode="rb")
    return buffered


def _lines(stream: Iterable[str | bytes]) -> Iterator[tuple[int, bytes]]:
    for lineno, line in enumerate(stream, start=1):
        if isinstance(line, str):
            if not line.isascii():
                raise ParseError("non-ASCII character", lineno)
            line = line.encode("ascii")
        elif not line.isascii():
            raise ParseError("non-ASCII byte", lineno)
        yield lineno, line.rstrip(b"\r\n")


@dataclass
class EncodedReference:
    """Reference sequences concatenated into one symbol array.

    ``starts[i]`` is the global offset of sequence ``names[i]``.
    """

    names: list[str]
    starts: list[int]
    total_len: int
    bases: np.ndarray = field(repr=False)

    def seq_lengths(self) -> list[int]:
        ends = self.starts[1:] + [self.total_len]
        return [e - s for s, e in zip(self.starts, ends)]


def parse_reference(stream: Iterable[str | bytes]) -> EncodedReference:
    names: list[str] = []
    starts: list[int] = []
    chunks: list[np.ndarray] = []
    total = 0
    header_line = 0
    seq_len = 0

    def close_record() -> None:
        if names and seq_len == 0:
            raise ParseError(f"record {names[-1]!r} has no sequence", header_line)

    for lineno, line in _lines(stream):
        if line.startswith(b">"):
            close_record()
            name = line[1:].split(maxsplit=1)
            if not name:
                raise ParseError("record with empty name", lineno)
            names.append(name[0].decode("ascii"))
            starts.append(total)
            header_line = lineno
            seq_len = 0
        else:
            line = line.strip()
            if not line:
                continue
            if not names:
                raise ParseError("sequence data before first header", lineno)
            chunks.append(_ENCODE[np.frombuffer(line, dtype=np.uint8)])
            seq_len += len(line)
            total += len(line)
    if not names:
        raise ParseError("empty FASTA input")
    close_record()
    bases = np.concatenate(chunks) if chunks else np.zeros(0, dtype=np.uint8)
    return EncodedReference(names=names, starts=starts, total_len=total, bases=bases)


@dataclass(frozen=True)
class ReadMeta:
    read_id: str
    read_len: int
    offset: int


@dataclass
class ReadBatch:
    """Reads packed into one symbol buffer, each terminated by ``E``.

    Metadata lives beside the buffer, never inside it.
    """

    buffer: np.ndarray
    metadata: list[ReadMeta]

    def read(self, i: int) -> np.ndarray:
        m = self.metadata[i]
        return self.buffer[m.offset : m.offset + m.read_len]

    def __len__(self) -> int:
        return len(self.metadata)


def parse_fastq(stream: Iterable[str | bytes]) -> Iterator[tuple[str, bytes]]:
    """Yield ``(read_id, sequence)`` from 4-line FASTQ records."""
    it = _lines(stream)
    for lineno, header in it:
        if not header:
            continue
        if not header.startswith(b"@"):
            raise ParseError("expected '@' header", lineno)
        name = header[1:].split(maxsplit=1)
        if not name:
            raise ParseError("record with empty name", lineno)
        try:
            seq_no, seq = next(it)
            plus_no, plus = next(it)
            qual_no, qual = next(it)
        except StopIteration:
            raise ParseError("truncated FASTQ record", lineno) from None
        if not plus.startswith(b"+"):
            raise ParseError("expected '+' separator", plus_no)
        if len(qual) != len(seq):
            raise ParseError("quality length differs from sequence length", qual_no)
        yield name[0].decode("ascii"), seq


def read_batches(stream: Iterable[str | bytes], capacity: int) -> Iterator[ReadBatch]:
    """Greedily pack FASTQ reads into batches of at most ``capacity`` symbols."""
    if capacity < 2:
        raise ValueError("batch capacity must be at least 2 symbols")
    pending: list[tuple[str, bytes]] = []
    used = 0
    for read_id, seq in parse_fastq(stream):
        need = len(seq) + 1
        if need > capacity:
            raise ValueError(
                f"read {read_id!r} of length {len(seq)} exceeds batch capacity {capacity}"
            )
        if used + need > capacity:
            yield _pack(pending, used)
            pending, used = [], 0
        pending.append((read_id, seq))
        used += need
    if pending:
        yield _pack(pending, used)


def _pack(reads: list[tuple[str, bytes]], size: int) -> ReadBatch:
    raw = bytearray(size)
    meta = []
    off = 0
    for read_id, seq in reads:
        raw[off : off + len(seq)] = seq
        meta.append(ReadMeta(read_id, len(seq), off))
        off += len(seq) + 1
    buf = _ENCODE[np.frombuffer(bytes(raw), dtype=np.uint8)]
    ends = np.fromiter((m.offset + m.read_len for m in meta), dtype=np.int64, count=len(meta))
    buf[ends] = E
    buf.flags.writeable = False
    return ReadBatch(buffer=buf, metadata=meta)
