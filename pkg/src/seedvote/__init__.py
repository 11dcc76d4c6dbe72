"""Minimizer seeding, two-array seed index and linear-time seed voting for read mapping."""

from .index import SeedIndex, build_index, load_index, plan_shards, query, save_index
from .mapeval import evaluate, parse_truth
from .pafout import PafRecord, to_paf
from .pipeline import PipelineConfig, RunStats, run
from .presets import PRESETS, Preset, get_preset
from .seedquery import Anchor, extract_minimizers, generate_anchors
from .seqio import EncodedReference, ReadBatch, parse_reference, read_batches
from .vote import SegmentPair, VoteParams, assign_mapq, sort_anchors, vote

__version__ = "0.1.0"

__all__ = [
    "Anchor", "EncodedReference", "PRESETS", "PafRecord", "PipelineConfig", "Preset", "ReadBatch",
    "RunStats", "SeedIndex", "SegmentPair", "VoteParams", "assign_mapq", "build_index", "evaluate",
    "extract_minimizers", "generate_anchors", "get_preset", "load_index", "parse_reference",
    "parse_truth", "plan_shards", "query", "read_batches", "run", "save_index",
    "sort_anchors", "to_paf", "vote",
]
