"""Seeding, indexing and voting presets per sequencing technology."""

from __future__ import annotations

from dataclasses import dataclass

MBP = 1_000_000


@dataclass(frozen=True)
class Preset:
    name: str
    technology: str
    k: int
    w: int
    max_occ: int
    vt_dist: int
    batch_capacity: int

    @property
    def sort_algorithm(self) -> str:
        # radix wins on long noisy reads, merge on HiFi/short reads
        return "radix" if self.technology == "ont" else "merge"


PRESETS: dict[str, Preset] = {
    p.name: p
    for p in (
        Preset("ont1", "ont", 15, 10, 10, 950, 64 * MBP),
        Preset("ont2", "ont", 15, 10, 50, 750, 32 * MBP),
        Preset("ont3", "ont", 15, 10, 100, 700, 16 * MBP),
        Preset("hifi1", "hifi", 19, 19, 1, 5000, 128 * MBP),
        Preset("hifi2", "hifi", 19, 19, 2, 4000, 128 * MBP),
        Preset("hifi3", "hifi", 19, 19, 5, 4000, 128 * MBP),
        Preset("ilmn1", "illumina", 21, 11, 50, 10, 32 * MBP),
        Preset("ilmn2", "illumina", 21, 11, 150, 10, 32 * MBP),
        Preset("ilmn3", "illumina", 21, 11, 450, 10, 32 * MBP),
    )
}


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name.lower()]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None
